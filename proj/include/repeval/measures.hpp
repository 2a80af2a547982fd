#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "repeval/curve.hpp"

namespace repeval {

enum class MeasureKind { va, mdl, sdl, esc };

const char* measure_kind_name(MeasureKind k);

/// Whether a surplus-loss estimate is certified or only bounds from below.
enum class Tightness { tight, lower_bound, not_applicable };

const char* tightness_name(Tightness t);

struct Provenance {
    std::string dataset_fingerprint;
    std::string algorithm_fingerprint;
    std::string detail;  // estimator settings, free-form but deterministic
};

struct MeasureResult {
    MeasureKind kind = MeasureKind::va;
    double value = 0.0;
    std::optional<double> epsilon;      // sdl and esc only
    std::optional<std::size_t> at_n;    // va and mdl only
    bool is_lower_bound = false;        // rendered with a "> " prefix
    Tightness tightness = Tightness::not_applicable;
    std::optional<double> error_bound;  // high-probability deviation bound
    std::string annotation;
    Provenance provenance;
};

/// Validation loss: the curve's mean loss at exactly size n.
MeasureResult va_at(const LossDataCurve& curve, std::size_t n);

/// Prequential code length of the first n examples in nats: the first chunk
/// (before any training data) costs n_1 * ln(num_classes), and each later
/// chunk (n_j, n_{j+1}] costs its width times the raw mean loss at its left
/// edge. Requires n <= the largest grid size.
MeasureResult mdl_at(const LossDataCurve& curve, std::size_t n,
                     std::uint32_t num_classes);

/// Surplus description length above epsilon, computed from the curve's
/// monotone means with the same chunking as mdl_at, keeping only the part of
/// each chunk's loss that exceeds epsilon.
MeasureResult sdl_from_curve(const LossDataCurve& curve, double epsilon);

/// Smallest grid size whose monotone mean is <= epsilon; a lower bound at
/// the largest grid size when the curve never reaches epsilon.
MeasureResult esc_from_curve(const LossDataCurve& curve, double epsilon);

/// Configuration of the direct surplus-loss estimator.
struct SdlEstimatorConfig {
    double epsilon = 0.1;
    std::size_t max_size = 100;   // M: sizes 1..M are (conceptually) summed
    std::size_t replicates = 150; // K per evaluated size
    double delta = 0.05;
    double loss_cap = 1.0;        // B: losses live in [0, B]
    double holdout_fraction = 0.2;
    bool normalize = false;
    LossMetric metric = LossMetric::nll;
    std::uint64_t master_seed = 0;
    // Above this M the exact sum switches to a 20-point log-uniform subgrid
    // with chunk weights.
    std::size_t grid_threshold = 200;
    std::size_t max_train_runs = 1000000;  // refuse larger jobs up front
};

/// Estimates the surplus description length by training at every size
/// (or a weighted subgrid when M is large) and summing the loss above
/// epsilon. Returns a deviation bound of B * M * sqrt(log(2M/delta) / (2K))
/// that holds with probability at least 1 - delta, and a tightness flag
/// telling whether the sum provably covers the whole curve tail.
MeasureResult sdl_direct(const LearningAlgorithm& alg, const Dataset& dataset,
                         const SdlEstimatorConfig& config, unsigned workers = 1);

/// Configuration of the recursive epsilon-sample-complexity search.
struct EscSearchConfig {
    double epsilon = 0.1;
    double delta = 0.05;
    std::size_t search_limit = 1000;  // N: largest size considered
    std::size_t rounds = 1;           // k: grid refinement rounds
    double loss_cap = 1.0;            // B
    double holdout_fraction = 0.2;
    bool normalize = false;
    LossMetric metric = LossMetric::nll;
    std::uint64_t master_seed = 0;
    std::size_t max_replicates = 1000000;  // refuse when S exceeds this
};

/// Replicates per evaluated size: ceil(2 * B^2 * log(20k / delta) / eps^2).
std::size_t esc_search_replicates(const EscSearchConfig& config);

/// Recursive grid search for the epsilon sample complexity. Each round
/// splits the current interval into 10 equispaced bins, accepts the first
/// bin edge whose mean loss over S replicates is <= epsilon / 2, and recurses
/// into the interval just below it. With probability at least 1 - delta the
/// reported value is an upper bound on the true epsilon sample complexity;
/// if no edge qualifies in the first round the result is a lower bound at
/// the search limit.
MeasureResult esc_search(const LearningAlgorithm& alg, const Dataset& dataset,
                         const EscSearchConfig& config, unsigned workers = 1);

/// Smallest replicate count K such that a single mean of K losses in [0, B]
/// deviates from its expectation by more than epsilon with probability at
/// most delta: ceil(B^2 * ln(1/delta) / (2 * eps^2)).
std::size_t hoeffding_min_k(double epsilon, double delta, double loss_bound);

/// JSON codec for measure results (canonical key order, one object each).
std::string measure_to_json(const MeasureResult& r);
MeasureResult measure_from_json(const std::string& text);

/// Rendering used in tables: fixed two decimals for losses, integers for
/// sample complexities, "> " prefix on lower bounds.
std::string format_measure_value(const MeasureResult& r);

}  // namespace repeval
