#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "repeval/dataset.hpp"
#include "repeval/probe.hpp"

namespace repeval {

enum class LossMetric { nll, zero_one };

const char* metric_name(LossMetric m);
LossMetric metric_from_name(const std::string& name);

/// How a loss-data curve is estimated: which sizes, how many bootstrap
/// replicates per size, and the evaluation protocol.
struct EvalPlan {
    std::vector<std::size_t> grid;  // strictly increasing sizes, >= 1 each
    std::size_t replicates = 8;
    // Per-example loss truncation. A non-positive value means "resolve to
    // ln(num_classes) + 5 when the task is known".
    double loss_cap = 0.0;
    double holdout_fraction = 0.2;
    bool normalize = true;
    LossMetric metric = LossMetric::nll;
    std::uint64_t master_seed = 0;

    void validate() const;
};

struct CurvePoint {
    std::size_t n = 0;
    std::vector<double> replicate_losses;
    double mean_loss = 0.0;
    double std_error = 0.0;  // sample std dev / sqrt(replicates); 0 when K = 1
};

/// Estimated loss-data curve plus everything needed to reproduce it.
struct LossDataCurve {
    std::vector<CurvePoint> points;       // one per grid entry, ascending n
    std::vector<double> monotone_means;   // non-increasing projection of means
    std::string algorithm_fingerprint;
    std::string dataset_fingerprint;
    std::string dataset_name;
    EvalPlan plan;                        // echo with loss_cap resolved
    std::uint32_t num_classes = 0;
    std::optional<double> oracle_loss;    // task Bayes loss when known
    std::vector<std::string> warnings;

    /// Point at exactly size n; throws ValidationError listing the grid.
    const CurvePoint& at(std::size_t n) const;
};

/// count log-uniformly spaced integers from n_min to n_max inclusive,
/// deduplicated and sorted.
std::vector<std::size_t> make_grid(std::size_t n_min, std::size_t n_max,
                                   std::size_t count);

/// Least-squares projection onto non-increasing sequences
/// (pool-adjacent-violators). Preserves the overall mean.
std::vector<double> monotone_project(const std::vector<double>& means);

/// One grid point: `replicates` bootstrap train/evaluate runs.
CurvePoint estimate_point(const LearningAlgorithm& alg, const Dataset& pool,
                          const Dataset& holdout, std::size_t n,
                          std::size_t replicates, const EvalPlan& plan,
                          RngStream stream);

/// Full curve with an internal holdout split drawn from the plan's seed.
LossDataCurve estimate_curve(const LearningAlgorithm& alg, const Dataset& dataset,
                             const EvalPlan& plan, unsigned workers = 1);

/// Full curve with a caller-provided pool/holdout split.
LossDataCurve estimate_curve_split(const LearningAlgorithm& alg,
                                   const Dataset& pool, const Dataset& holdout,
                                   const EvalPlan& plan, unsigned workers = 1);

/// JSON codec. Serialization is canonical: keys are sorted and floating
/// point values use shortest-round-trip formatting, so equal curves yield
/// byte-identical documents.
std::string curve_to_json(const LossDataCurve& curve);
LossDataCurve curve_from_json(const std::string& text);

std::string curve_fingerprint(const LossDataCurve& curve);

double untrained_loss(std::uint32_t num_classes, LossMetric metric);

}  // namespace repeval
