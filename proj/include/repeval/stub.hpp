#pragma once

#include <cstdint>
#include <string>

#include "repeval/probe.hpp"

namespace repeval {

/// Closed-form expected-loss shapes for harness algorithms.
enum class StubShape {
    constant,  // L(n) = a
    inverse,   // L(n) = a / n
    step,      // L(n) = a for n < n0, else b
};

/// Noise applied to the deterministic shape per training run.
enum class StubNoiseKind {
    none,
    uniform,    // L(n) + Uniform(-amplitude, +amplitude), clipped to [0, bound]
    bernoulli,  // with prob L(n)/bound the loss is bound, else 0 (mean L(n))
};

struct StubSpec {
    StubShape shape = StubShape::constant;
    double a = 0.5;
    double b = 0.0;        // step shape only
    std::size_t n0 = 1;    // step threshold
    StubNoiseKind noise = StubNoiseKind::none;
    double amplitude = 0.0;  // uniform noise half-width
    double bound = 1.0;      // losses stay in [0, bound]

    void validate() const;
    double mean_loss(std::size_t n) const;
};

/// A fake learning algorithm whose predictor attains a prescribed loss on
/// all-class-zero evaluation data: it assigns probability exp(-loss) to
/// class 0. Exercises the estimation and certificate machinery against
/// known ground truth without any real training.
class StubAlgorithm : public LearningAlgorithm {
public:
    explicit StubAlgorithm(StubSpec spec);

    std::unique_ptr<Predictor> train(const Dataset& train_set,
                                     RngStream stream) const override;
    std::string fingerprint() const override;
    std::string describe() const override;

    const StubSpec& spec() const { return spec_; }

private:
    StubSpec spec_;
};

}  // namespace repeval
