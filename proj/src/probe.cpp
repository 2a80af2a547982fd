#include "repeval/probe.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "repeval/errors.hpp"
#include "repeval/fingerprint.hpp"
#include "repeval/gf2.hpp"

namespace repeval {

namespace {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

const char* arch_name(ProbeArch a) {
    return a == ProbeArch::linear ? "linear" : "mlp2";
}

/// Feed-forward stack: logits = W_last h + b_last with ReLU between layers.
/// linear has one layer (k x d); mlp2 has three (h x d, h x h, k x h).
template <typename Scalar>
struct Net {
    ProbeArch arch = ProbeArch::linear;
    std::vector<Mat<Scalar>> w;
    std::vector<Vec<Scalar>> b;

    static Net init(const ProbeSpec& spec, std::size_t d, std::uint32_t k,
                    RngStream stream) {
        Net net;
        net.arch = spec.architecture;
        std::vector<std::pair<std::size_t, std::size_t>> shapes;  // (rows, cols)
        if (spec.architecture == ProbeArch::linear) {
            shapes = {{k, d}};
        } else {
            const std::size_t h = spec.hidden_width;
            shapes = {{h, d}, {h, h}, {k, h}};
        }
        for (const auto& [rows, cols] : shapes) {
            Mat<Scalar> m(rows, cols);
            const double bound = spec.init_scale / std::sqrt(static_cast<double>(cols));
            // Fixed fill order (row-major) keeps initialization reproducible.
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                        static_cast<Scalar>((2.0 * stream.next_double() - 1.0) * bound);
                }
            }
            net.w.push_back(std::move(m));
            net.b.emplace_back(Vec<Scalar>::Zero(static_cast<Eigen::Index>(rows)));
        }
        return net;
    }

    /// Forward pass on a batch of columns; fills the pre-activation caches
    /// needed by backward().
    Mat<Scalar> forward(const Mat<Scalar>& x, std::vector<Mat<Scalar>>* cache) const {
        if (arch == ProbeArch::linear) {
            return (w[0] * x).colwise() + b[0];
        }
        Mat<Scalar> a1 = (w[0] * x).colwise() + b[0];
        Mat<Scalar> h1 = a1.cwiseMax(Scalar(0));
        Mat<Scalar> a2 = (w[1] * h1).colwise() + b[1];
        Mat<Scalar> h2 = a2.cwiseMax(Scalar(0));
        Mat<Scalar> z = (w[2] * h2).colwise() + b[2];
        if (cache != nullptr) {
            cache->clear();
            cache->push_back(std::move(a1));
            cache->push_back(std::move(h1));
            cache->push_back(std::move(a2));
            cache->push_back(std::move(h2));
        }
        return z;
    }

    /// Mean cross-entropy of the batch in double precision.
    static double mean_loss(const Mat<Scalar>& logits,
                            const std::vector<std::uint32_t>& labels,
                            std::size_t begin, std::size_t count) {
        double total = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
            const auto col = logits.col(static_cast<Eigen::Index>(j));
            double max_z = -std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < col.size(); ++i) {
                max_z = std::max(max_z, static_cast<double>(col(i)));
            }
            double sum = 0.0;
            for (Eigen::Index i = 0; i < col.size(); ++i) {
                sum += std::exp(static_cast<double>(col(i)) - max_z);
            }
            const double lse = max_z + std::log(sum);
            total += lse - static_cast<double>(
                               col(static_cast<Eigen::Index>(labels[begin + j])));
        }
        return total / static_cast<double>(count);
    }

    /// Softmax cross-entropy gradients for a batch; same shapes as w and b.
    void backward(const Mat<Scalar>& x, const std::vector<std::uint32_t>& labels,
                  std::size_t begin, std::vector<Mat<Scalar>>& dw,
                  std::vector<Vec<Scalar>>& db) const {
        std::vector<Mat<Scalar>> cache;
        Mat<Scalar> z = forward(x, &cache);
        const auto batch = z.cols();

        // Column-wise softmax with max subtraction.
        Mat<Scalar> p = z;
        for (Eigen::Index j = 0; j < batch; ++j) {
            auto col = p.col(j);
            col.array() -= col.maxCoeff();
            col = col.array().exp();
            col /= col.sum();
        }
        for (Eigen::Index j = 0; j < batch; ++j) {
            p(static_cast<Eigen::Index>(labels[begin + static_cast<std::size_t>(j)]),
              j) -= Scalar(1);
        }
        p /= static_cast<Scalar>(batch);

        dw.resize(w.size());
        db.resize(b.size());
        if (arch == ProbeArch::linear) {
            dw[0] = p * x.transpose();
            db[0] = p.rowwise().sum();
            return;
        }
        const Mat<Scalar>& a1 = cache[0];
        const Mat<Scalar>& h1 = cache[1];
        const Mat<Scalar>& a2 = cache[2];
        const Mat<Scalar>& h2 = cache[3];

        dw[2] = p * h2.transpose();
        db[2] = p.rowwise().sum();
        Mat<Scalar> d2 = (w[2].transpose() * p).cwiseProduct(
            (a2.array() > Scalar(0)).template cast<Scalar>().matrix());
        dw[1] = d2 * h1.transpose();
        db[1] = d2.rowwise().sum();
        Mat<Scalar> d1 = (w[1].transpose() * d2).cwiseProduct(
            (a1.array() > Scalar(0)).template cast<Scalar>().matrix());
        dw[0] = d1 * x.transpose();
        db[0] = d1.rowwise().sum();
    }
};

/// Adam with bias correction, applied tensor by tensor.
template <typename Scalar>
struct Adam {
    std::vector<Mat<Scalar>> mw, vw;
    std::vector<Vec<Scalar>> mb, vb;
    std::size_t t = 0;

    explicit Adam(const Net<Scalar>& net) {
        for (const auto& m : net.w) {
            mw.emplace_back(Mat<Scalar>::Zero(m.rows(), m.cols()));
            vw.emplace_back(Mat<Scalar>::Zero(m.rows(), m.cols()));
        }
        for (const auto& v : net.b) {
            mb.emplace_back(Vec<Scalar>::Zero(v.size()));
            vb.emplace_back(Vec<Scalar>::Zero(v.size()));
        }
    }

    void step(const ProbeSpec& spec, Net<Scalar>& net,
              const std::vector<Mat<Scalar>>& dw,
              const std::vector<Vec<Scalar>>& db) {
        ++t;
        const Scalar b1 = static_cast<Scalar>(spec.adam_beta1);
        const Scalar b2 = static_cast<Scalar>(spec.adam_beta2);
        const Scalar eps = static_cast<Scalar>(spec.adam_epsilon);
        const Scalar lr = static_cast<Scalar>(spec.learning_rate);
        const Scalar c1 =
            Scalar(1) / (Scalar(1) - static_cast<Scalar>(
                                         std::pow(spec.adam_beta1, static_cast<double>(t))));
        const Scalar c2 =
            Scalar(1) / (Scalar(1) - static_cast<Scalar>(
                                         std::pow(spec.adam_beta2, static_cast<double>(t))));
        for (std::size_t l = 0; l < net.w.size(); ++l) {
            mw[l] = b1 * mw[l] + (Scalar(1) - b1) * dw[l];
            vw[l] = b2 * vw[l] + (Scalar(1) - b2) * dw[l].cwiseProduct(dw[l]);
            net.w[l].array() -=
                lr * (mw[l] * c1).array() / ((vw[l] * c2).array().sqrt() + eps);

            mb[l] = b1 * mb[l] + (Scalar(1) - b1) * db[l];
            vb[l] = b2 * vb[l] + (Scalar(1) - b2) * db[l].cwiseProduct(db[l]);
            net.b[l].array() -=
                lr * (mb[l] * c1).array() / ((vb[l] * c2).array().sqrt() + eps);
        }
    }
};

template <typename Scalar>
Mat<Scalar> dataset_matrix(const Dataset& ds) {
    Mat<Scalar> x(static_cast<Eigen::Index>(ds.d), static_cast<Eigen::Index>(ds.n));
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t c = 0; c < ds.d; ++c) {
            x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(i)) =
                static_cast<Scalar>(ds.features[i * ds.d + c]);
        }
    }
    return x;
}

/// Full-dataset mean cross-entropy, evaluated in chunks.
template <typename Scalar>
double full_loss(const Net<Scalar>& net, const Mat<Scalar>& x,
                 const std::vector<std::uint32_t>& labels) {
    const std::size_t n = static_cast<std::size_t>(x.cols());
    const std::size_t chunk = 8192;
    double total = 0.0;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        const std::size_t count = std::min(chunk, n - begin);
        Mat<Scalar> xb = x.middleCols(static_cast<Eigen::Index>(begin),
                                      static_cast<Eigen::Index>(count));
        Mat<Scalar> z = net.forward(xb, nullptr);
        total += Net<Scalar>::mean_loss(z, labels, begin, count) *
                 static_cast<double>(count);
    }
    return total / static_cast<double>(n);
}

class MlpPredictor final : public Predictor {
public:
    MlpPredictor(Net<float> net, std::size_t d, std::uint32_t k)
        : net_(std::move(net)), d_(d), k_(k) {}

    std::uint32_t num_classes() const override { return k_; }

    std::vector<double> predict_log_probs(std::span<const float> x) const override {
        std::vector<double> out(k_);
        predict_log_probs_batch(x.data(), 1, x.size(), out.data());
        return out;
    }

    void predict_log_probs_batch(const float* xs, std::size_t count, std::size_t d,
                                 double* out) const override {
        if (d != d_) {
            throw ValidationError("predictor expects feature width " +
                                  std::to_string(d_) + ", got " + std::to_string(d));
        }
        const std::size_t chunk = 4096;
        for (std::size_t begin = 0; begin < count; begin += chunk) {
            const std::size_t cols = std::min(chunk, count - begin);
            Mat<float> xb(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(cols));
            for (std::size_t j = 0; j < cols; ++j) {
                for (std::size_t c = 0; c < d_; ++c) {
                    xb(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) =
                        xs[(begin + j) * d_ + c];
                }
            }
            Mat<float> z = net_.forward(xb, nullptr);
            // Log-softmax in double so the probabilities normalize tightly
            // even when float logits are large.
            for (std::size_t j = 0; j < cols; ++j) {
                const auto col = z.col(static_cast<Eigen::Index>(j));
                double max_z = -std::numeric_limits<double>::infinity();
                for (Eigen::Index i = 0; i < col.size(); ++i) {
                    max_z = std::max(max_z, static_cast<double>(col(i)));
                }
                double sum = 0.0;
                for (Eigen::Index i = 0; i < col.size(); ++i) {
                    sum += std::exp(static_cast<double>(col(i)) - max_z);
                }
                const double lse = max_z + std::log(sum);
                double* row = out + (begin + j) * k_;
                for (Eigen::Index i = 0; i < col.size(); ++i) {
                    row[i] = static_cast<double>(col(i)) - lse;
                }
            }
        }
    }

private:
    Net<float> net_;
    std::size_t d_;
    std::uint32_t k_;
};

class ParityPredictor final : public Predictor {
public:
    ParityPredictor(std::vector<std::uint8_t> secret, double smoothing)
        : secret_(std::move(secret)),
          log_hit_(std::log1p(-smoothing)),
          log_miss_(std::log(smoothing)) {}

    std::uint32_t num_classes() const override { return 2; }

    std::vector<double> predict_log_probs(std::span<const float> x) const override {
        const std::uint8_t bit = gf2_dot(secret_, x);
        std::vector<double> out(2);
        out[bit] = log_hit_;
        out[1 - bit] = log_miss_;
        return out;
    }

private:
    std::vector<std::uint8_t> secret_;
    double log_hit_;
    double log_miss_;
};

class FixedDistributionPredictor final : public Predictor {
public:
    explicit FixedDistributionPredictor(std::vector<double> log_probs)
        : log_probs_(std::move(log_probs)) {}

    std::uint32_t num_classes() const override {
        return static_cast<std::uint32_t>(log_probs_.size());
    }

    std::vector<double> predict_log_probs(std::span<const float>) const override {
        return log_probs_;
    }

private:
    std::vector<double> log_probs_;
};

class BitEchoPredictor final : public Predictor {
public:
    explicit BitEchoPredictor(double flip_rate)
        : log_keep_(std::log1p(-flip_rate)), log_flip_(std::log(flip_rate)) {}

    std::uint32_t num_classes() const override { return 2; }

    std::vector<double> predict_log_probs(std::span<const float> x) const override {
        const unsigned bit = x[0] >= 0.5f ? 1u : 0u;
        std::vector<double> out(2);
        out[bit] = log_keep_;
        out[1 - bit] = log_flip_;
        return out;
    }

private:
    double log_keep_;
    double log_flip_;
};

void check_trainable(const Dataset& ds) {
    ds.validate();
}

}  // namespace

void ProbeSpec::validate() const {
    if (architecture == ProbeArch::mlp2 && hidden_width == 0) {
        throw ValidationError("mlp2 probe needs hidden width >= 1");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("learning rate must be positive and finite");
    }
    if (!(adam_beta1 >= 0.0) || !(adam_beta1 < 1.0) || !(adam_beta2 >= 0.0) ||
        !(adam_beta2 < 1.0)) {
        throw ValidationError("adam betas must lie in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) throw ValidationError("adam epsilon must be positive");
    if (steps == 0) throw ValidationError("probe training needs steps >= 1");
    if (batch_size == 0) throw ValidationError("probe batch size must be >= 1");
    if (!(init_scale > 0.0) || !std::isfinite(init_scale)) {
        throw ValidationError("init scale must be positive and finite");
    }
}

void Predictor::predict_log_probs_batch(const float* xs, std::size_t count,
                                        std::size_t d, double* out) const {
    const std::uint32_t k = num_classes();
    for (std::size_t i = 0; i < count; ++i) {
        const auto lp = predict_log_probs({xs + i * d, d});
        std::copy(lp.begin(), lp.end(), out + i * k);
    }
}

ProbeAlgorithm::ProbeAlgorithm(ProbeSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
}

std::unique_ptr<Predictor> train_probe_with_stats(const ProbeSpec& spec,
                                                  const Dataset& train_set,
                                                  RngStream stream,
                                                  ProbeTrainStats* stats) {
    spec.validate();
    check_trainable(train_set);

    RngStream root = stream.fork(spec.seed_tag);
    Net<float> net = Net<float>::init(spec, train_set.d, train_set.num_classes,
                                      root.fork("init"));
    RngStream batches = root.fork("batches");

    const Mat<float> x = dataset_matrix<float>(train_set);
    const std::size_t n = train_set.n;
    if (stats != nullptr) stats->initial_loss = full_loss(net, x, train_set.labels);

    Adam<float> opt(net);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = n;  // forces a shuffle before the first batch

    const std::size_t bs = std::min(spec.batch_size, n);
    Mat<float> xb(static_cast<Eigen::Index>(train_set.d), static_cast<Eigen::Index>(bs));
    std::vector<std::uint32_t> yb(bs);
    std::vector<Mat<float>> dw;
    std::vector<Vec<float>> db;

    for (std::size_t step = 0; step < spec.steps; ++step) {
        if (cursor + bs > n) {
            for (std::size_t i = n - 1; i > 0; --i) {
                const std::size_t j = batches.next_below(i + 1);
                std::swap(order[i], order[j]);
            }
            cursor = 0;
        }
        for (std::size_t j = 0; j < bs; ++j) {
            const std::size_t src = order[cursor + j];
            xb.col(static_cast<Eigen::Index>(j)) =
                x.col(static_cast<Eigen::Index>(src));
            yb[j] = train_set.labels[src];
        }
        cursor += bs;

        net.backward(xb, yb, 0, dw, db);
        opt.step(spec, net, dw, db);
    }

    if (stats != nullptr) stats->final_loss = full_loss(net, x, train_set.labels);
    return std::make_unique<MlpPredictor>(std::move(net), train_set.d,
                                          train_set.num_classes);
}

std::unique_ptr<Predictor> ProbeAlgorithm::train(const Dataset& train_set,
                                                 RngStream stream) const {
    return train_probe_with_stats(spec_, train_set, stream, nullptr);
}

std::string ProbeAlgorithm::fingerprint() const {
    Fingerprint fp;
    fp.add("algorithm/probe/v1");
    fp.add(arch_name(spec_.architecture));
    fp.add(static_cast<std::uint64_t>(
        spec_.architecture == ProbeArch::mlp2 ? spec_.hidden_width : 0));
    fp.add(spec_.learning_rate);
    fp.add(spec_.adam_beta1);
    fp.add(spec_.adam_beta2);
    fp.add(spec_.adam_epsilon);
    fp.add(static_cast<std::uint64_t>(spec_.steps));
    fp.add(static_cast<std::uint64_t>(spec_.batch_size));
    fp.add(spec_.init_scale);
    fp.add(spec_.seed_tag);
    return fp.hex();
}

std::string ProbeAlgorithm::describe() const {
    char buf[160];
    if (spec_.architecture == ProbeArch::linear) {
        std::snprintf(buf, sizeof(buf), "probe(linear, lr=%g, steps=%zu, batch=%zu)",
                      spec_.learning_rate, spec_.steps, spec_.batch_size);
    } else {
        std::snprintf(buf, sizeof(buf),
                      "probe(mlp2, width=%zu, lr=%g, steps=%zu, batch=%zu)",
                      spec_.hidden_width, spec_.learning_rate, spec_.steps,
                      spec_.batch_size);
    }
    return buf;
}

Gf2ParityAlgorithm::Gf2ParityAlgorithm(double smoothing) : smoothing_(smoothing) {
    if (!(smoothing > 0.0) || !(smoothing < 0.5)) {
        throw ValidationError("parity smoothing must lie in (0, 0.5)");
    }
}

std::unique_ptr<Predictor> Gf2ParityAlgorithm::train(const Dataset& train_set,
                                                     RngStream) const {
    check_trainable(train_set);
    if (train_set.num_classes != 2) {
        throw ValidationError("parity learner requires a 2-class task");
    }
    const BitMatrix x = bit_matrix_from_features(train_set);
    std::vector<std::uint8_t> y(train_set.n);
    for (std::size_t i = 0; i < train_set.n; ++i) {
        y[i] = static_cast<std::uint8_t>(train_set.labels[i]);
    }
    Gf2Solution sol = gf2_solve(x, y);
    return std::make_unique<ParityPredictor>(std::move(sol.solution), smoothing_);
}

std::string Gf2ParityAlgorithm::fingerprint() const {
    Fingerprint fp;
    fp.add("algorithm/gf2-parity/v1");
    fp.add(smoothing_);
    return fp.hex();
}

std::string Gf2ParityAlgorithm::describe() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "gf2-parity(smoothing=%g)", smoothing_);
    return buf;
}

std::unique_ptr<Predictor> ConstantMarginalAlgorithm::train(const Dataset& train_set,
                                                            RngStream) const {
    check_trainable(train_set);
    // Add-one smoothing keeps unseen classes at positive probability.
    std::vector<double> log_probs(train_set.num_classes);
    std::vector<std::size_t> counts(train_set.num_classes, 0);
    for (std::uint32_t label : train_set.labels) ++counts[label];
    const double denom =
        static_cast<double>(train_set.n) + static_cast<double>(train_set.num_classes);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        log_probs[c] = std::log((static_cast<double>(counts[c]) + 1.0) / denom);
    }
    return std::make_unique<FixedDistributionPredictor>(std::move(log_probs));
}

std::string ConstantMarginalAlgorithm::fingerprint() const {
    Fingerprint fp;
    fp.add("algorithm/constant-marginal/v1");
    return fp.hex();
}

std::string ConstantMarginalAlgorithm::describe() const {
    return "constant-marginal(add-one smoothing)";
}

std::unique_ptr<Predictor> IdentityBitAlgorithm::train(const Dataset& train_set,
                                                       RngStream) const {
    check_trainable(train_set);
    if (train_set.num_classes != 2) {
        throw ValidationError("identity-bit learner requires a 2-class task");
    }
    std::size_t flips = 0;
    for (std::size_t i = 0; i < train_set.n; ++i) {
        const unsigned bit = train_set.features[i * train_set.d] >= 0.5f ? 1u : 0u;
        if (bit != train_set.labels[i]) ++flips;
    }
    // Add-one smoothing keeps the flip rate inside (0, 1).
    const double flip_rate = (static_cast<double>(flips) + 1.0) /
                             (static_cast<double>(train_set.n) + 2.0);
    return std::make_unique<BitEchoPredictor>(flip_rate);
}

std::string IdentityBitAlgorithm::fingerprint() const {
    Fingerprint fp;
    fp.add("algorithm/identity-bit/v1");
    return fp.hex();
}

std::string IdentityBitAlgorithm::describe() const {
    return "identity-bit(add-one smoothing)";
}

double evaluate_loss(const Predictor& pred, const Dataset& eval_set, double cap) {
    eval_set.validate();
    if (pred.num_classes() != eval_set.num_classes) {
        throw ValidationError("predictor covers " + std::to_string(pred.num_classes()) +
                              " classes, dataset declares " +
                              std::to_string(eval_set.num_classes));
    }
    if (!(cap > 0.0) || !std::isfinite(cap)) {
        throw ValidationError("loss cap must be positive and finite");
    }
    const std::uint32_t k = eval_set.num_classes;
    const std::size_t chunk = 8192;
    std::vector<double> lp(std::min(chunk, eval_set.n) * k);
    double total = 0.0;
    for (std::size_t begin = 0; begin < eval_set.n; begin += chunk) {
        const std::size_t count = std::min(chunk, eval_set.n - begin);
        pred.predict_log_probs_batch(eval_set.features.data() + begin * eval_set.d,
                                     count, eval_set.d, lp.data());
        for (std::size_t i = 0; i < count; ++i) {
            const double nll = -lp[i * k + eval_set.labels[begin + i]];
            total += std::min(cap, nll);
        }
    }
    return total / static_cast<double>(eval_set.n);
}

double evaluate_accuracy(const Predictor& pred, const Dataset& eval_set) {
    eval_set.validate();
    if (pred.num_classes() != eval_set.num_classes) {
        throw ValidationError("predictor covers " + std::to_string(pred.num_classes()) +
                              " classes, dataset declares " +
                              std::to_string(eval_set.num_classes));
    }
    const std::uint32_t k = eval_set.num_classes;
    const std::size_t chunk = 8192;
    std::vector<double> lp(std::min(chunk, eval_set.n) * k);
    std::size_t hits = 0;
    for (std::size_t begin = 0; begin < eval_set.n; begin += chunk) {
        const std::size_t count = std::min(chunk, eval_set.n - begin);
        pred.predict_log_probs_batch(eval_set.features.data() + begin * eval_set.d,
                                     count, eval_set.d, lp.data());
        for (std::size_t i = 0; i < count; ++i) {
            std::uint32_t best = 0;
            for (std::uint32_t c = 1; c < k; ++c) {
                if (lp[i * k + c] > lp[i * k + best]) best = c;  // ties pick lowest
            }
            if (best == eval_set.labels[begin + i]) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(eval_set.n);
}

double evaluate_zero_one(const Predictor& pred, const Dataset& eval_set) {
    return 1.0 - evaluate_accuracy(pred, eval_set);
}

double grad_check(const ProbeSpec& spec, const Dataset& sample) {
    spec.validate();
    check_trainable(sample);
    if (sample.n > 8) {
        throw ValidationError("gradient check expects a sample of at most 8 rows");
    }

    RngStream root = RngStream(0, spec.seed_tag);
    Net<double> net =
        Net<double>::init(spec, sample.d, sample.num_classes, root.fork("init"));
    const Mat<double> x = dataset_matrix<double>(sample);

    std::vector<Mat<double>> dw;
    std::vector<Vec<double>> db;
    net.backward(x, sample.labels, 0, dw, db);

    const double h = 1e-4;
    double worst = 0.0;
    auto probe_param = [&](double& theta, double analytic) {
        const double saved = theta;
        theta = saved + h;
        const double up = full_loss(net, x, sample.labels);
        theta = saved - h;
        const double down = full_loss(net, x, sample.labels);
        theta = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double err = std::fabs(analytic - numeric) /
                           std::max({std::fabs(analytic), std::fabs(numeric), 1.0});
        worst = std::max(worst, err);
    };

    for (std::size_t l = 0; l < net.w.size(); ++l) {
        for (Eigen::Index c = 0; c < net.w[l].cols(); ++c) {
            for (Eigen::Index r = 0; r < net.w[l].rows(); ++r) {
                probe_param(net.w[l](r, c), dw[l](r, c));
            }
        }
        for (Eigen::Index r = 0; r < net.b[l].size(); ++r) {
            probe_param(net.b[l](r), db[l](r));
        }
    }
    return worst;
}

}  // namespace repeval
