#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "repeval/dataset.hpp"
#include "repeval/rng.hpp"

namespace repeval {

enum class ProbeArch { linear, mlp2 };

/// Configuration of a trainable probe head.
struct ProbeSpec {
    ProbeArch architecture = ProbeArch::mlp2;
    std::size_t hidden_width = 512;  // mlp2 only
    double learning_rate = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t steps = 4000;
    std::size_t batch_size = 32;
    double init_scale = 1.0;  // weights start uniform on +-scale/sqrt(fan_in)
    std::string seed_tag = "probe";

    void validate() const;
};

/// A trained conditional model q(y | x) over a fixed class count.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual std::uint32_t num_classes() const = 0;

    /// Log-probabilities over the classes; exp of the result sums to 1
    /// within 1e-6.
    virtual std::vector<double> predict_log_probs(std::span<const float> x) const = 0;

    /// Batch form: xs is row-major (count x d), out is row-major
    /// (count x num_classes). Default implementation loops the single-row
    /// call; implementations override it when batching is cheaper.
    virtual void predict_log_probs_batch(const float* xs, std::size_t count,
                                         std::size_t d, double* out) const;
};

/// A training procedure mapping a dataset and a random stream to a Predictor.
class LearningAlgorithm {
public:
    virtual ~LearningAlgorithm() = default;

    virtual std::unique_ptr<Predictor> train(const Dataset& train_set,
                                             RngStream stream) const = 0;

    /// Content hash of the algorithm's kind and hyperparameters.
    virtual std::string fingerprint() const = 0;

    /// Human-readable one-line description.
    virtual std::string describe() const = 0;
};

/// Gradient-trained probe (linear or two-hidden-layer ReLU MLP) with a
/// softmax head, trained by Adam on cross-entropy.
class ProbeAlgorithm : public LearningAlgorithm {
public:
    explicit ProbeAlgorithm(ProbeSpec spec);

    std::unique_ptr<Predictor> train(const Dataset& train_set,
                                     RngStream stream) const override;
    std::string fingerprint() const override;
    std::string describe() const override;

    const ProbeSpec& spec() const { return spec_; }

private:
    ProbeSpec spec_;
};

/// Holds the full-batch training loss before and after optimization.
struct ProbeTrainStats {
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

/// Trains a probe and reports training-loss statistics (used to check the
/// optimizer actually descends).
std::unique_ptr<Predictor> train_probe_with_stats(const ProbeSpec& spec,
                                                  const Dataset& train_set,
                                                  RngStream stream,
                                                  ProbeTrainStats* stats);

/// Exact parity learner: solves for the secret over GF(2) and predicts the
/// implied bit, smoothing the probabilities by `smoothing` so the loss on a
/// surprising label stays finite.
class Gf2ParityAlgorithm : public LearningAlgorithm {
public:
    explicit Gf2ParityAlgorithm(double smoothing = 1e-3);

    std::unique_ptr<Predictor> train(const Dataset& train_set,
                                     RngStream stream) const override;
    std::string fingerprint() const override;
    std::string describe() const override;

private:
    double smoothing_;
};

/// Ignores the features entirely and predicts the add-one-smoothed label
/// marginal of the training set.
class ConstantMarginalAlgorithm : public LearningAlgorithm {
public:
    std::unique_ptr<Predictor> train(const Dataset& train_set,
                                     RngStream stream) const override;
    std::string fingerprint() const override;
    std::string describe() const override;
};

/// Reads the first feature as a bit and predicts it as the label, with an
/// add-one-smoothed estimate of the training flip rate as its confidence.
/// Binary tasks only.
class IdentityBitAlgorithm : public LearningAlgorithm {
public:
    std::unique_ptr<Predictor> train(const Dataset& train_set,
                                     RngStream stream) const override;
    std::string fingerprint() const override;
    std::string describe() const override;
};

/// Mean per-example negative log-likelihood in nats, truncating each
/// example's loss at `cap` before averaging.
double evaluate_loss(const Predictor& pred, const Dataset& eval_set, double cap);

/// Fraction of examples whose argmax prediction matches the label.
/// Ties resolve to the lowest class index.
double evaluate_accuracy(const Predictor& pred, const Dataset& eval_set);

/// 1 - accuracy.
double evaluate_zero_one(const Predictor& pred, const Dataset& eval_set);

/// Compares analytic probe gradients against central finite differences on a
/// small sample (n <= 8), all in double precision. Returns the maximum
/// relative error max |a - g| / max(|a|, |g|, 1) over every parameter.
double grad_check(const ProbeSpec& spec, const Dataset& sample);

}  // namespace repeval
