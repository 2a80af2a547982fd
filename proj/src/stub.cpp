#include "repeval/stub.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "repeval/errors.hpp"
#include "repeval/fingerprint.hpp"

namespace repeval {

namespace {

const char* shape_name(StubShape s) {
    switch (s) {
        case StubShape::constant: return "constant";
        case StubShape::inverse: return "inverse";
        case StubShape::step: return "step";
    }
    return "?";
}

const char* noise_name(StubNoiseKind k) {
    switch (k) {
        case StubNoiseKind::none: return "none";
        case StubNoiseKind::uniform: return "uniform";
        case StubNoiseKind::bernoulli: return "bernoulli";
    }
    return "?";
}

/// Assigns exp(-loss) to class 0 and spreads the rest evenly, so the
/// negative log-likelihood on a class-0 example is exactly `loss`.
class PrescribedLossPredictor final : public Predictor {
public:
    PrescribedLossPredictor(double loss, std::uint32_t k) : k_(k) {
        log_probs_.resize(k);
        log_probs_[0] = -loss;
        const double rest = -std::expm1(-loss);  // 1 - exp(-loss), accurately
        const double others =
            std::log(rest / static_cast<double>(k - 1));  // -inf when loss == 0
        for (std::uint32_t c = 1; c < k; ++c) log_probs_[c] = others;
    }

    std::uint32_t num_classes() const override { return k_; }

    std::vector<double> predict_log_probs(std::span<const float>) const override {
        return log_probs_;
    }

private:
    std::uint32_t k_;
    std::vector<double> log_probs_;
};

}  // namespace

void StubSpec::validate() const {
    if (!(bound > 0.0) || !std::isfinite(bound)) {
        throw ValidationError("stub loss bound must be positive and finite");
    }
    if (!(a >= 0.0) || a > bound) {
        throw ValidationError("stub level a must lie in [0, bound]");
    }
    if (shape == StubShape::step) {
        if (!(b >= 0.0) || b > bound) {
            throw ValidationError("stub level b must lie in [0, bound]");
        }
        if (n0 == 0) throw ValidationError("stub step threshold must be >= 1");
    }
    if (noise == StubNoiseKind::uniform && !(amplitude >= 0.0)) {
        throw ValidationError("stub noise amplitude must be non-negative");
    }
}

double StubSpec::mean_loss(std::size_t n) const {
    switch (shape) {
        case StubShape::constant: return a;
        case StubShape::inverse: return a / static_cast<double>(n);
        case StubShape::step: return n < n0 ? a : b;
    }
    return 0.0;
}

StubAlgorithm::StubAlgorithm(StubSpec spec) : spec_(spec) { spec_.validate(); }

std::unique_ptr<Predictor> StubAlgorithm::train(const Dataset& train_set,
                                                RngStream stream) const {
    train_set.validate();
    const double base = spec_.mean_loss(train_set.n);
    double loss = base;
    switch (spec_.noise) {
        case StubNoiseKind::none:
            break;
        case StubNoiseKind::uniform:
            loss += (2.0 * stream.next_double() - 1.0) * spec_.amplitude;
            loss = std::clamp(loss, 0.0, spec_.bound);
            break;
        case StubNoiseKind::bernoulli:
            // Two-point mixture on {0, bound} with the prescribed mean.
            loss = stream.next_bernoulli(base / spec_.bound) ? spec_.bound : 0.0;
            break;
    }
    return std::make_unique<PrescribedLossPredictor>(loss, train_set.num_classes);
}

std::string StubAlgorithm::fingerprint() const {
    Fingerprint fp;
    fp.add("algorithm/stub/v1");
    fp.add(shape_name(spec_.shape));
    fp.add(spec_.a);
    fp.add(spec_.b);
    fp.add(static_cast<std::uint64_t>(spec_.n0));
    fp.add(noise_name(spec_.noise));
    fp.add(spec_.amplitude);
    fp.add(spec_.bound);
    return fp.hex();
}

std::string StubAlgorithm::describe() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "stub(%s, a=%g, b=%g, n0=%zu, noise=%s, amplitude=%g, bound=%g)",
                  shape_name(spec_.shape), spec_.a, spec_.b, spec_.n0,
                  noise_name(spec_.noise), spec_.amplitude, spec_.bound);
    return buf;
}

}  // namespace repeval
