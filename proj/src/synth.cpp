#include "repeval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "repeval/errors.hpp"
#include "repeval/gf2.hpp"

namespace repeval {

namespace {

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

void ParitySpec::validate() const {
    if (d == 0) throw ValidationError("parity task needs d >= 1 input bits");
    if (!(alpha >= 0.0) || !(alpha < 0.5)) {
        throw ValidationError("parity noise bias must lie in [0, 0.5)");
    }
    if (!secret.empty() && secret.size() != d) {
        throw ValidationError("parity secret has " + std::to_string(secret.size()) +
                              " bits, expected d = " + std::to_string(d));
    }
    bool any = secret.empty();
    for (std::uint8_t b : secret) {
        if (b > 1) throw ValidationError("parity secret entries must be 0 or 1");
        any = any || b == 1;
    }
    // The zero parity is constant; an empty secret means "draw one", and the
    // drawn secret is always nonzero.
    if (!any) throw ValidationError("parity secret must not be all zeros");
}

Dataset gen_parity(const ParitySpec& spec, std::size_t n, RngStream stream) {
    spec.validate();
    if (n == 0) throw ValidationError("parity task needs n >= 1 examples");

    std::vector<std::uint8_t> secret = spec.secret;
    if (secret.empty()) {
        RngStream s = stream.fork("secret");
        do {
            secret.resize(spec.d);
            for (auto& b : secret) b = static_cast<std::uint8_t>(s.next_u64() & 1);
        } while (std::all_of(secret.begin(), secret.end(),
                             [](std::uint8_t b) { return b == 0; }));
    }

    RngStream inputs = stream.fork("inputs");
    RngStream noise = stream.fork("noise");

    const bool noisy = spec.repr_kind == ParityRepr::noisy_label;
    Dataset ds;
    ds.n = n;
    ds.d = noisy ? 1 : spec.d;
    ds.num_classes = 2;
    ds.features.resize(ds.n * ds.d);
    ds.labels.resize(n);

    std::vector<float> x(spec.d);
    for (std::size_t i = 0; i < n; ++i) {
        unsigned y = 0;
        for (std::size_t c = 0; c < spec.d; ++c) {
            const unsigned bit = static_cast<unsigned>(inputs.next_u64() & 1);
            x[c] = static_cast<float>(bit);
            y ^= bit & secret[c];
        }
        ds.labels[i] = y;
        if (noisy) {
            const unsigned e = noise.next_bernoulli(spec.alpha) ? 1u : 0u;
            ds.features[i] = static_cast<float>(y ^ e);
        } else {
            std::copy(x.begin(), x.end(), ds.features.begin() + i * spec.d);
        }
    }

    if (noisy) {
        ds.name = "parity-noisy-d" + std::to_string(spec.d) + "-alpha" + fmt_g(spec.alpha);
        ds.oracle_loss = binary_entropy(spec.alpha);
    } else {
        ds.name = "parity-raw-d" + std::to_string(spec.d);
        ds.oracle_loss = 0.0;  // labels are a deterministic function of x
    }
    return ds;
}

double gaussian_task_oracle_loss(double mu) {
    if (!std::isfinite(mu)) throw ValidationError("class separation must be finite");
    mu = std::fabs(mu);

    // Bayes loss = E_{t ~ N(mu, 1)} [ H_b(sigmoid(2 mu t)) ] in nats:
    // the posterior of the positive class at x depends only on x_1 = t.
    // Composite Simpson on [mu - 10, mu + 10]; tails are below 1e-22.
    const std::size_t intervals = 20000;  // even
    const double lo = mu - 10.0;
    const double hi = mu + 10.0;
    const double h = (hi - lo) / static_cast<double>(intervals);
    const double inv_sqrt_2pi = 0.3989422804014326779399460599344;

    auto integrand = [&](double t) {
        const double z = t - mu;
        const double density = inv_sqrt_2pi * std::exp(-0.5 * z * z);
        const double p = 1.0 / (1.0 + std::exp(-2.0 * mu * t));
        return density * binary_entropy(p);
    };

    double sum = integrand(lo) + integrand(hi);
    for (std::size_t i = 1; i < intervals; ++i) {
        sum += integrand(lo + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

Dataset gen_gaussian_task(std::size_t d, double mu, std::size_t n,
                          RngStream stream) {
    if (d == 0) throw ValidationError("gaussian task needs d >= 1");
    if (n == 0) throw ValidationError("gaussian task needs n >= 1 examples");
    if (!std::isfinite(mu)) throw ValidationError("class separation must be finite");

    RngStream labels = stream.fork("labels");
    RngStream noise = stream.fork("noise");

    Dataset ds;
    ds.n = n;
    ds.d = d;
    ds.num_classes = 2;
    ds.features.resize(n * d);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned y = static_cast<unsigned>(labels.next_u64() & 1);
        ds.labels[i] = y;
        const double center = y == 1 ? mu : -mu;
        ds.features[i * d] = static_cast<float>(noise.next_normal() + center);
        for (std::size_t c = 1; c < d; ++c) {
            ds.features[i * d + c] = static_cast<float>(noise.next_normal());
        }
    }
    ds.name = "gaussian-mu" + fmt_g(mu) + "-d" + std::to_string(d);
    ds.oracle_loss = gaussian_task_oracle_loss(mu);
    return ds;
}

Dataset gen_constant_task(std::size_t n, std::size_t d,
                          std::uint32_t num_classes) {
    if (n == 0) throw ValidationError("constant task needs n >= 1 examples");
    if (d == 0) throw ValidationError("constant task needs d >= 1");
    if (num_classes < 2) throw ValidationError("constant task needs >= 2 classes");
    Dataset ds;
    ds.n = n;
    ds.d = d;
    ds.num_classes = num_classes;
    ds.features.assign(n * d, 0.0f);
    ds.labels.assign(n, 0);
    ds.name = "constant-k" + std::to_string(num_classes);
    ds.oracle_loss = 0.0;  // the label is always class 0
    return ds;
}

}  // namespace repeval
