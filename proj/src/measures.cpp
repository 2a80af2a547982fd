#include "repeval/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "repeval/errors.hpp"
#include "repeval/parallel.hpp"

namespace repeval {

using nlohmann::json;

namespace {

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw ValidationError("epsilon must be positive and finite");
    }
}

Provenance provenance_of(const LossDataCurve& curve, std::string detail) {
    return {curve.dataset_fingerprint, curve.algorithm_fingerprint,
            std::move(detail)};
}

/// Threshold below which the final mean loss certifies that the measured
/// range covers the whole surplus. The baseline rule is epsilon / 2; when
/// the task's Bayes loss H is known (same units as the metric) and is
/// informative (0 < H < epsilon), the loss can never fall below H, so the
/// midpoint (epsilon + H) / 2 is the equivalent certification point.
double tight_threshold(double epsilon, const std::optional<double>& oracle,
                       LossMetric metric) {
    if (metric == LossMetric::nll && oracle.has_value() && *oracle > 0.0 &&
        *oracle < epsilon) {
        return 0.5 * (epsilon + *oracle);
    }
    return 0.5 * epsilon;
}

/// Shared tail classification for surplus measures.
void classify_tail(MeasureResult& r, double final_loss, double epsilon,
                   double threshold) {
    if (final_loss <= threshold) {
        r.tightness = Tightness::tight;
        r.is_lower_bound = false;
    } else if (final_loss > epsilon) {
        r.tightness = Tightness::lower_bound;
        r.is_lower_bound = true;
        r.annotation = "loss never reached epsilon within the measured range; "
                       "the true value exceeds this estimate";
    } else {
        r.tightness = Tightness::lower_bound;
        r.is_lower_bound = false;
        r.annotation = "final loss is within epsilon but above the certification "
                       "threshold; coverage of the tail is not certified";
    }
}

}  // namespace

const char* measure_kind_name(MeasureKind k) {
    switch (k) {
        case MeasureKind::va: return "va";
        case MeasureKind::mdl: return "mdl";
        case MeasureKind::sdl: return "sdl";
        case MeasureKind::esc: return "esc";
    }
    return "?";
}

const char* tightness_name(Tightness t) {
    switch (t) {
        case Tightness::tight: return "tight";
        case Tightness::lower_bound: return "lower_bound";
        case Tightness::not_applicable: return "not_applicable";
    }
    return "?";
}

MeasureResult va_at(const LossDataCurve& curve, std::size_t n) {
    const CurvePoint& pt = curve.at(n);
    MeasureResult r;
    r.kind = MeasureKind::va;
    r.value = pt.mean_loss;
    r.at_n = n;
    r.provenance = provenance_of(
        curve, "mean over " + std::to_string(pt.replicate_losses.size()) +
                   " replicates at n=" + std::to_string(n) + ", metric=" +
                   metric_name(curve.plan.metric));
    return r;
}

MeasureResult mdl_at(const LossDataCurve& curve, std::size_t n,
                     std::uint32_t num_classes) {
    if (n == 0) throw ValidationError("code length needs n >= 1");
    if (num_classes != curve.num_classes) {
        throw ValidationError("requested class count " + std::to_string(num_classes) +
                              " does not match the curve (" +
                              std::to_string(curve.num_classes) + ")");
    }
    const auto& grid = curve.plan.grid;
    if (n > grid.back()) {
        throw ValidationError("code length at n=" + std::to_string(n) +
                              " needs curve coverage up to n, but the grid stops at " +
                              std::to_string(grid.back()));
    }

    // First chunk: examples arrive before any training data, priced at the
    // untrained loss. Later chunks are priced at their left-edge raw mean.
    double total = static_cast<double>(std::min(n, grid.front())) *
                   untrained_loss(num_classes, curve.plan.metric);
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        if (n > grid[j]) {
            const double width =
                static_cast<double>(std::min(grid[j + 1], n) - grid[j]);
            total += width * curve.points[j].mean_loss;
        }
    }

    MeasureResult r;
    r.kind = MeasureKind::mdl;
    r.value = total;
    r.at_n = n;
    r.provenance = provenance_of(
        curve, "prequential chunked code over " + std::to_string(grid.size()) +
                   " grid sizes, first chunk at untrained loss, metric=" +
                   std::string(metric_name(curve.plan.metric)));
    return r;
}

MeasureResult sdl_from_curve(const LossDataCurve& curve, double epsilon) {
    check_epsilon(epsilon);
    const auto& grid = curve.plan.grid;
    const auto& mono = curve.monotone_means;

    double total = static_cast<double>(grid.front()) *
                   positive_part(untrained_loss(curve.num_classes, curve.plan.metric) -
                                 epsilon);
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        total += static_cast<double>(grid[j + 1] - grid[j]) *
                 positive_part(mono[j] - epsilon);
    }

    MeasureResult r;
    r.kind = MeasureKind::sdl;
    r.value = total;
    r.epsilon = epsilon;
    const double threshold =
        tight_threshold(epsilon, curve.oracle_loss, curve.plan.metric);
    classify_tail(r, mono.back(), epsilon, threshold);
    r.provenance = provenance_of(
        curve, "chunked surplus over " + std::to_string(grid.size()) +
                   " grid sizes from monotone means, metric=" +
                   std::string(metric_name(curve.plan.metric)));
    return r;
}

MeasureResult esc_from_curve(const LossDataCurve& curve, double epsilon) {
    check_epsilon(epsilon);
    const auto& grid = curve.plan.grid;
    const auto& mono = curve.monotone_means;

    MeasureResult r;
    r.kind = MeasureKind::esc;
    r.epsilon = epsilon;
    r.provenance = provenance_of(
        curve, "first grid size whose monotone mean is <= epsilon, metric=" +
                   std::string(metric_name(curve.plan.metric)));
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (mono[j] <= epsilon) {
            r.value = static_cast<double>(grid[j]);
            return r;
        }
    }
    r.value = static_cast<double>(grid.back());
    r.is_lower_bound = true;
    r.annotation = "no measured size reached epsilon; the true sample "
                   "complexity exceeds the largest grid size";
    return r;
}

MeasureResult sdl_direct(const LearningAlgorithm& alg, const Dataset& dataset,
                         const SdlEstimatorConfig& config, unsigned workers) {
    check_epsilon(config.epsilon);
    if (!(config.delta > 0.0) || !(config.delta < 1.0)) {
        throw ValidationError("delta must lie strictly between 0 and 1");
    }
    if (config.max_size == 0) throw ValidationError("max size must be >= 1");
    if (config.replicates == 0) throw ValidationError("replicates must be >= 1");
    if (!(config.loss_cap > 0.0) || !std::isfinite(config.loss_cap)) {
        throw ValidationError("loss bound must be positive and finite");
    }

    const std::size_t m = config.max_size;
    const bool exact = m <= config.grid_threshold;
    std::vector<std::size_t> grid;
    if (exact) {
        grid.resize(m);
        for (std::size_t i = 0; i < m; ++i) grid[i] = i + 1;
    } else {
        grid = make_grid(1, m, 20);
    }

    const std::size_t runs = grid.size() * config.replicates;
    if (runs > config.max_train_runs) {
        throw BudgetError("direct surplus estimation needs " + std::to_string(runs) +
                          " training runs (" + std::to_string(grid.size()) +
                          " sizes x " + std::to_string(config.replicates) +
                          " replicates), above the budget of " +
                          std::to_string(config.max_train_runs));
    }

    EvalPlan plan;
    plan.grid = grid;
    plan.replicates = config.replicates;
    plan.loss_cap = config.loss_cap;
    plan.holdout_fraction = config.holdout_fraction;
    plan.normalize = config.normalize;
    plan.metric = config.metric;
    plan.master_seed = config.master_seed;

    const LossDataCurve curve = estimate_curve(alg, dataset, plan, workers);

    // Chunk weights: width to the next size, and 1 for the last size.
    // On the exact grid every weight is 1 and the sum is plain Algorithm-style
    // summation over n = 1..M.
    double total = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double w = j + 1 < grid.size()
                             ? static_cast<double>(grid[j + 1] - grid[j])
                             : 1.0;
        total += w * positive_part(curve.points[j].mean_loss - config.epsilon);
    }

    const double b = config.loss_cap;
    const double error_bound =
        b * static_cast<double>(m) *
        std::sqrt(std::log(2.0 * static_cast<double>(m) / config.delta) /
                  (2.0 * static_cast<double>(config.replicates)));

    MeasureResult r;
    r.kind = MeasureKind::sdl;
    r.value = total;
    r.epsilon = config.epsilon;
    r.error_bound = error_bound;
    const double threshold =
        tight_threshold(config.epsilon, dataset.oracle_loss, config.metric);
    classify_tail(r, curve.points.back().mean_loss, config.epsilon, threshold);
    r.provenance.dataset_fingerprint = curve.dataset_fingerprint;
    r.provenance.algorithm_fingerprint = curve.algorithm_fingerprint;
    r.provenance.detail =
        "direct surplus estimator: M=" + std::to_string(m) + ", K=" +
        std::to_string(config.replicates) + ", delta=" + fmt_g(config.delta) +
        ", bound=" + fmt_g(b) +
        (exact ? ", exact grid"
               : ", log-uniform subgrid of " + std::to_string(grid.size()) +
                     " sizes with chunk weights") +
        ", metric=" + metric_name(config.metric);
    return r;
}

std::size_t esc_search_replicates(const EscSearchConfig& config) {
    check_epsilon(config.epsilon);
    if (!(config.delta > 0.0) || !(config.delta < 1.0)) {
        throw ValidationError("delta must lie strictly between 0 and 1");
    }
    if (config.rounds == 0) throw ValidationError("search needs rounds >= 1");
    if (!(config.loss_cap > 0.0) || !std::isfinite(config.loss_cap)) {
        throw ValidationError("loss bound must be positive and finite");
    }
    const double b = config.loss_cap;
    const double s = std::ceil(
        2.0 * b * b *
        std::log(20.0 * static_cast<double>(config.rounds) / config.delta) /
        (config.epsilon * config.epsilon));
    return std::max<std::size_t>(1, static_cast<std::size_t>(s));
}

MeasureResult esc_search(const LearningAlgorithm& alg, const Dataset& dataset,
                         const EscSearchConfig& config, unsigned workers) {
    if (config.search_limit == 0) {
        throw ValidationError("search limit must be >= 1");
    }
    const std::size_t s = esc_search_replicates(config);
    if (s > config.max_replicates) {
        throw BudgetError("sample-complexity search needs " + std::to_string(s) +
                          " replicates per evaluated size, above the budget of " +
                          std::to_string(config.max_replicates));
    }

    dataset.validate();
    auto [pool, holdout] =
        split_holdout(dataset, config.holdout_fraction,
                      RngStream(config.master_seed, "holdout-split"));

    const RngStream base(config.master_seed, "esc-search");

    // Mean loss at size n over S fresh training runs; deterministic in
    // (master seed, n, i), so re-evaluating a size reuses its estimate.
    auto mean_loss_at = [&](std::size_t n) {
        std::vector<double> losses(s);
        run_indexed(s, workers, [&](std::size_t i) {
            losses[i] = std::min(
                config.loss_cap,
                [&] {
                    RngStream stream = base.fork("replicate", n, i);
                    Dataset sub =
                        bootstrap_subsample(pool, n, stream.fork("bootstrap"));
                    std::unique_ptr<Predictor> pred;
                    const Dataset* eval_set = &holdout;
                    Dataset eval_storage;
                    if (config.normalize) {
                        auto [train_set, stats] = normalize_features(sub);
                        eval_storage = apply_normalization(holdout, stats);
                        eval_set = &eval_storage;
                        pred = alg.train(train_set, stream.fork("train"));
                    } else {
                        pred = alg.train(sub, stream.fork("train"));
                    }
                    return config.metric == LossMetric::nll
                               ? evaluate_loss(*pred, *eval_set, config.loss_cap)
                               : evaluate_zero_one(*pred, *eval_set);
                }());
        });
        double sum = 0.0;
        for (double v : losses) sum += v;
        return sum / static_cast<double>(s);
    };

    double lo = 1.0;
    double hi = static_cast<double>(config.search_limit);
    std::size_t upper = config.search_limit;
    std::size_t executed = 0;
    bool ever_accepted = false;

    for (std::size_t r = 1; r <= config.rounds; ++r) {
        ++executed;
        const double delta_n = (hi - lo) / 10.0;
        bool accepted = false;
        std::size_t prev_edge = 0;
        for (int j = 1; j <= 10; ++j) {
            auto n = static_cast<std::size_t>(
                std::floor(lo + static_cast<double>(j) * delta_n));
            if (n < 1) n = 1;
            if (n == prev_edge) continue;  // integer rounding collapsed bins
            prev_edge = n;
            if (mean_loss_at(n) <= config.epsilon / 2.0) {
                upper = n;
                hi = static_cast<double>(n);
                lo = std::max(lo, static_cast<double>(n) - delta_n);
                accepted = true;
                ever_accepted = true;
                break;
            }
        }
        if (!accepted) break;
        if (hi - lo < 1.0) break;  // interval already pinned to one integer
    }

    MeasureResult r;
    r.kind = MeasureKind::esc;
    r.epsilon = config.epsilon;
    r.value = static_cast<double>(upper);
    r.provenance.dataset_fingerprint = dataset_fingerprint(dataset);
    r.provenance.algorithm_fingerprint = alg.fingerprint();
    r.provenance.detail =
        "recursive grid search: S=" + std::to_string(s) + " replicates per size, " +
        std::to_string(executed) + " of " + std::to_string(config.rounds) +
        " rounds, delta=" + fmt_g(config.delta) + ", bound=" +
        fmt_g(config.loss_cap) + ", limit=" + std::to_string(config.search_limit) +
        ", metric=" + metric_name(config.metric);
    if (!ever_accepted) {
        r.is_lower_bound = true;
        r.annotation = "no evaluated size reached epsilon/2 in the first round; "
                       "the true sample complexity may exceed the search limit";
    }
    return r;
}

std::size_t hoeffding_min_k(double epsilon, double delta, double loss_bound) {
    check_epsilon(epsilon);
    if (!(delta > 0.0) || delta > 1.0) {
        throw ValidationError("delta must lie in (0, 1]");
    }
    if (!(loss_bound > 0.0) || !std::isfinite(loss_bound)) {
        throw ValidationError("loss bound must be positive and finite");
    }
    const double k = std::ceil(loss_bound * loss_bound * std::log(1.0 / delta) /
                               (2.0 * epsilon * epsilon));
    return static_cast<std::size_t>(std::max(0.0, k));
}

std::string measure_to_json(const MeasureResult& r) {
    json doc;
    doc["kind"] = measure_kind_name(r.kind);
    doc["value"] = r.value;
    if (r.epsilon) doc["epsilon"] = *r.epsilon;
    if (r.at_n) doc["at_n"] = *r.at_n;
    doc["is_lower_bound"] = r.is_lower_bound;
    doc["tightness"] = tightness_name(r.tightness);
    if (r.error_bound) doc["error_bound"] = *r.error_bound;
    doc["annotation"] = r.annotation;
    doc["provenance"] = {
        {"dataset_fingerprint", r.provenance.dataset_fingerprint},
        {"algorithm_fingerprint", r.provenance.algorithm_fingerprint},
        {"detail", r.provenance.detail},
    };
    return doc.dump(2) + "\n";
}

MeasureResult measure_from_json(const std::string& text) {
    const json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ValidationError("measure JSON is not a valid JSON object");
    }
    MeasureResult r;
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "va") {
        r.kind = MeasureKind::va;
    } else if (kind == "mdl") {
        r.kind = MeasureKind::mdl;
    } else if (kind == "sdl") {
        r.kind = MeasureKind::sdl;
    } else if (kind == "esc") {
        r.kind = MeasureKind::esc;
    } else {
        throw ValidationError("unknown measure kind '" + kind + "'");
    }
    r.value = doc.at("value").get<double>();
    if (doc.contains("epsilon")) r.epsilon = doc["epsilon"].get<double>();
    if (doc.contains("at_n")) r.at_n = doc["at_n"].get<std::size_t>();
    r.is_lower_bound = doc.value("is_lower_bound", false);
    const std::string t = doc.value("tightness", "not_applicable");
    if (t == "tight") {
        r.tightness = Tightness::tight;
    } else if (t == "lower_bound") {
        r.tightness = Tightness::lower_bound;
    } else {
        r.tightness = Tightness::not_applicable;
    }
    if (doc.contains("error_bound")) r.error_bound = doc["error_bound"].get<double>();
    r.annotation = doc.value("annotation", std::string());
    if (doc.contains("provenance")) {
        const json& p = doc["provenance"];
        r.provenance.dataset_fingerprint = p.value("dataset_fingerprint", std::string());
        r.provenance.algorithm_fingerprint =
            p.value("algorithm_fingerprint", std::string());
        r.provenance.detail = p.value("detail", std::string());
    }
    return r;
}

std::string format_measure_value(const MeasureResult& r) {
    char buf[48];
    if (r.kind == MeasureKind::esc) {
        std::snprintf(buf, sizeof(buf), "%.0f", r.value);
    } else {
        std::snprintf(buf, sizeof(buf), "%.2f", r.value);
    }
    return r.is_lower_bound ? std::string("> ") + buf : std::string(buf);
}

}  // namespace repeval
