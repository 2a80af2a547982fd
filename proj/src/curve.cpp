#include "repeval/curve.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "repeval/errors.hpp"
#include "repeval/fingerprint.hpp"
#include "repeval/parallel.hpp"

namespace repeval {

using nlohmann::json;

const char* metric_name(LossMetric m) {
    return m == LossMetric::nll ? "nll" : "zero_one";
}

LossMetric metric_from_name(const std::string& name) {
    if (name == "nll") return LossMetric::nll;
    if (name == "zero_one" || name == "01") return LossMetric::zero_one;
    throw ValidationError("unknown loss metric '" + name + "' (use nll or zero_one)");
}

void EvalPlan::validate() const {
    if (grid.empty()) throw ValidationError("evaluation grid is empty");
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (grid[j] == 0) throw ValidationError("grid sizes must be >= 1");
        if (j > 0 && grid[j] <= grid[j - 1]) {
            throw ValidationError("grid sizes must be strictly increasing");
        }
    }
    if (replicates == 0) throw ValidationError("replicates must be >= 1");
    if (loss_cap > 0.0 && !std::isfinite(loss_cap)) {
        throw ValidationError("loss cap must be finite");
    }
    if (!(holdout_fraction > 0.0) || !(holdout_fraction < 1.0)) {
        throw ValidationError("holdout fraction must lie strictly between 0 and 1");
    }
}

const CurvePoint& LossDataCurve::at(std::size_t n) const {
    for (const auto& p : points) {
        if (p.n == n) return p;
    }
    std::string sizes;
    for (const auto& p : points) {
        if (!sizes.empty()) sizes += ", ";
        sizes += std::to_string(p.n);
    }
    throw ValidationError("curve has no point at n=" + std::to_string(n) +
                          " (available sizes: " + sizes + ")");
}

std::vector<std::size_t> make_grid(std::size_t n_min, std::size_t n_max,
                                   std::size_t count) {
    if (n_min == 0) throw ValidationError("grid sizes must be >= 1");
    if (n_max < n_min) throw ValidationError("grid maximum is below its minimum");
    if (count == 0) throw ValidationError("grid needs at least one point");
    if (n_min == n_max) return {n_min};
    if (count < 2) {
        throw ValidationError("a grid spanning distinct endpoints needs count >= 2");
    }

    const double lo = std::log(static_cast<double>(n_min));
    const double hi = std::log(static_cast<double>(n_max));
    std::vector<std::size_t> grid;
    grid.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(count - 1);
        const double v = std::exp(lo + t * (hi - lo));
        auto n = static_cast<std::size_t>(std::llround(v));
        n = std::clamp(n, n_min, n_max);
        grid.push_back(n);
    }
    grid.front() = n_min;
    grid.back() = n_max;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

std::vector<double> monotone_project(const std::vector<double>& means) {
    // Pool-adjacent-violators for the non-increasing least-squares fit:
    // merge a block with its predecessor while the predecessor's mean is
    // strictly smaller.
    struct Block {
        double sum;
        std::size_t count;
    };
    std::vector<Block> blocks;
    blocks.reserve(means.size());
    for (double v : means) {
        blocks.push_back({v, 1});
        while (blocks.size() > 1) {
            const Block& prev = blocks[blocks.size() - 2];
            const Block& last = blocks.back();
            if (prev.sum * static_cast<double>(last.count) <
                last.sum * static_cast<double>(prev.count)) {
                Block merged{prev.sum + last.sum, prev.count + last.count};
                blocks.pop_back();
                blocks.back() = merged;
            } else {
                break;
            }
        }
    }
    std::vector<double> out;
    out.reserve(means.size());
    for (const Block& b : blocks) {
        const double v = b.sum / static_cast<double>(b.count);
        out.insert(out.end(), b.count, v);
    }
    return out;
}

double untrained_loss(std::uint32_t num_classes, LossMetric metric) {
    if (num_classes < 2) throw ValidationError("untrained loss needs >= 2 classes");
    if (metric == LossMetric::nll) return std::log(static_cast<double>(num_classes));
    return 1.0 - 1.0 / static_cast<double>(num_classes);
}

namespace {

std::string task_position(std::size_t n, std::size_t k) {
    return "grid n=" + std::to_string(n) + ", replicate k=" + std::to_string(k) + ": ";
}

double run_replicate(const LearningAlgorithm& alg, const Dataset& pool,
                     const Dataset& holdout, std::size_t n, double cap,
                     const EvalPlan& plan, RngStream stream) {
    Dataset sub = bootstrap_subsample(pool, n, stream.fork("bootstrap"));
    std::unique_ptr<Predictor> pred;
    double loss;
    if (plan.normalize) {
        auto [train_set, stats] = normalize_features(sub);
        const Dataset eval_set = apply_normalization(holdout, stats);
        pred = alg.train(train_set, stream.fork("train"));
        loss = plan.metric == LossMetric::nll ? evaluate_loss(*pred, eval_set, cap)
                                              : evaluate_zero_one(*pred, eval_set);
    } else {
        pred = alg.train(sub, stream.fork("train"));
        loss = plan.metric == LossMetric::nll ? evaluate_loss(*pred, holdout, cap)
                                              : evaluate_zero_one(*pred, holdout);
    }
    return std::min(loss, cap);
}

double run_replicate_annotated(const LearningAlgorithm& alg, const Dataset& pool,
                               const Dataset& holdout, std::size_t n, std::size_t k,
                               double cap, const EvalPlan& plan, RngStream stream) {
    try {
        return run_replicate(alg, pool, holdout, n, cap, plan, stream);
    } catch (const InconsistentSystemError& e) {
        throw InconsistentSystemError(task_position(n, k) + e.what());
    } catch (const BudgetError& e) {
        throw BudgetError(task_position(n, k) + e.what());
    } catch (const IoError& e) {
        throw IoError(task_position(n, k) + e.what());
    } catch (const std::exception& e) {
        throw ValidationError(task_position(n, k) + e.what());
    }
}

void finalize_point(CurvePoint& pt) {
    const std::size_t k = pt.replicate_losses.size();
    double sum = 0.0;
    for (double v : pt.replicate_losses) sum += v;
    pt.mean_loss = sum / static_cast<double>(k);
    if (k < 2) {
        pt.std_error = 0.0;
        return;
    }
    double ss = 0.0;
    for (double v : pt.replicate_losses) {
        const double delta = v - pt.mean_loss;
        ss += delta * delta;
    }
    const double sample_var = ss / static_cast<double>(k - 1);
    pt.std_error = std::sqrt(sample_var / static_cast<double>(k));
}

double resolve_cap(const EvalPlan& plan, std::uint32_t num_classes) {
    if (plan.loss_cap > 0.0) return plan.loss_cap;
    return std::log(static_cast<double>(num_classes)) + 5.0;
}

LossDataCurve estimate_curve_core(const LearningAlgorithm& alg, const Dataset& pool,
                                  const Dataset& holdout, const EvalPlan& plan,
                                  unsigned workers, std::string ds_fingerprint,
                                  std::string ds_name,
                                  std::optional<double> oracle_loss) {
    plan.validate();
    pool.validate();
    holdout.validate();
    if (pool.d != holdout.d) {
        throw ValidationError("pool and holdout disagree on feature width (" +
                              std::to_string(pool.d) + " vs " +
                              std::to_string(holdout.d) + ")");
    }
    if (pool.num_classes != holdout.num_classes) {
        throw ValidationError("pool and holdout disagree on class count");
    }

    LossDataCurve curve;
    curve.plan = plan;
    curve.plan.loss_cap = resolve_cap(plan, pool.num_classes);
    curve.num_classes = pool.num_classes;
    curve.oracle_loss = oracle_loss;
    curve.dataset_fingerprint = std::move(ds_fingerprint);
    curve.dataset_name = std::move(ds_name);
    curve.algorithm_fingerprint = alg.fingerprint();

    if (holdout.n < 100) {
        curve.warnings.push_back("holdout has only " + std::to_string(holdout.n) +
                                 " examples; loss estimates will be noisy");
    }
    for (std::size_t n : plan.grid) {
        if (n > pool.n) {
            curve.warnings.push_back("grid size " + std::to_string(n) +
                                     " exceeds the training pool (" +
                                     std::to_string(pool.n) +
                                     " rows); bootstrap samples will repeat rows");
        }
    }

    const double cap = curve.plan.loss_cap;
    const std::size_t reps = plan.replicates;
    const std::size_t total = plan.grid.size() * reps;
    std::vector<double> losses(total);

    // Each task owns one output slot and derives its stream from
    // (master seed, n, k), so results do not depend on the worker count.
    const RngStream base(plan.master_seed, "curve");
    run_indexed(total, workers, [&](std::size_t t) {
        const std::size_t j = t / reps;
        const std::size_t k = t % reps;
        const std::size_t n = plan.grid[j];
        losses[t] = run_replicate_annotated(alg, pool, holdout, n, k, cap, plan,
                                            base.fork("replicate", n, k));
    });

    curve.points.resize(plan.grid.size());
    std::vector<double> means;
    means.reserve(plan.grid.size());
    for (std::size_t j = 0; j < plan.grid.size(); ++j) {
        CurvePoint& pt = curve.points[j];
        pt.n = plan.grid[j];
        pt.replicate_losses.assign(losses.begin() + static_cast<std::ptrdiff_t>(j * reps),
                                   losses.begin() + static_cast<std::ptrdiff_t>((j + 1) * reps));
        finalize_point(pt);
        means.push_back(pt.mean_loss);
    }
    curve.monotone_means = monotone_project(means);
    return curve;
}

}  // namespace

CurvePoint estimate_point(const LearningAlgorithm& alg, const Dataset& pool,
                          const Dataset& holdout, std::size_t n,
                          std::size_t replicates, const EvalPlan& plan,
                          RngStream stream) {
    if (n == 0) throw ValidationError("grid sizes must be >= 1");
    if (replicates == 0) throw ValidationError("replicates must be >= 1");
    pool.validate();
    holdout.validate();
    if (pool.d != holdout.d) {
        throw ValidationError("pool and holdout disagree on feature width (" +
                              std::to_string(pool.d) + " vs " +
                              std::to_string(holdout.d) + ")");
    }
    if (pool.num_classes != holdout.num_classes) {
        throw ValidationError("pool and holdout disagree on class count");
    }
    const double cap = resolve_cap(plan, pool.num_classes);
    CurvePoint pt;
    pt.n = n;
    pt.replicate_losses.resize(replicates);
    for (std::size_t k = 0; k < replicates; ++k) {
        pt.replicate_losses[k] = run_replicate_annotated(
            alg, pool, holdout, n, k, cap, plan, stream.fork("replicate", n, k));
    }
    finalize_point(pt);
    return pt;
}

LossDataCurve estimate_curve(const LearningAlgorithm& alg, const Dataset& dataset,
                             const EvalPlan& plan, unsigned workers) {
    plan.validate();
    dataset.validate();
    auto [pool, holdout] = split_holdout(dataset, plan.holdout_fraction,
                                         RngStream(plan.master_seed, "holdout-split"));
    return estimate_curve_core(alg, pool, holdout, plan, workers,
                               dataset_fingerprint(dataset), dataset.name,
                               dataset.oracle_loss);
}

LossDataCurve estimate_curve_split(const LearningAlgorithm& alg, const Dataset& pool,
                                   const Dataset& holdout, const EvalPlan& plan,
                                   unsigned workers) {
    Fingerprint fp;
    fp.add("dataset-split/v1");
    fp.add(dataset_fingerprint(pool));
    fp.add(dataset_fingerprint(holdout));
    return estimate_curve_core(alg, pool, holdout, plan, workers, fp.hex(),
                               pool.name, pool.oracle_loss);
}

std::string curve_to_json(const LossDataCurve& curve) {
    json plan;
    plan["grid"] = curve.plan.grid;
    plan["replicates"] = curve.plan.replicates;
    plan["loss_cap"] = curve.plan.loss_cap;
    plan["holdout_fraction"] = curve.plan.holdout_fraction;
    plan["normalize"] = curve.plan.normalize;
    plan["metric"] = metric_name(curve.plan.metric);
    plan["master_seed"] = curve.plan.master_seed;

    json points = json::array();
    for (const auto& pt : curve.points) {
        json p;
        p["n"] = pt.n;
        p["replicate_losses"] = pt.replicate_losses;
        p["mean_loss"] = pt.mean_loss;
        p["std_error"] = pt.std_error;
        points.push_back(std::move(p));
    }

    json doc;
    doc["schema_version"] = 1;
    doc["dataset_fingerprint"] = curve.dataset_fingerprint;
    doc["dataset_name"] = curve.dataset_name;
    doc["algorithm_fingerprint"] = curve.algorithm_fingerprint;
    doc["plan"] = std::move(plan);
    doc["points"] = std::move(points);
    doc["monotone_means"] = curve.monotone_means;
    doc["num_classes"] = curve.num_classes;
    if (curve.oracle_loss) doc["oracle_loss"] = *curve.oracle_loss;
    doc["warnings"] = curve.warnings;
    return doc.dump(2) + "\n";
}

namespace {

const json& require_field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ValidationError(std::string("curve JSON lacks required field '") + key +
                              "'");
    }
    return *it;
}

}  // namespace

LossDataCurve curve_from_json(const std::string& text) {
    const json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ValidationError("curve JSON is not a valid JSON object");
    }
    if (require_field(doc, "schema_version").get<int>() != 1) {
        throw ValidationError("unsupported curve schema version");
    }

    LossDataCurve curve;
    curve.dataset_fingerprint = require_field(doc, "dataset_fingerprint").get<std::string>();
    curve.dataset_name = doc.value("dataset_name", std::string());
    curve.algorithm_fingerprint =
        require_field(doc, "algorithm_fingerprint").get<std::string>();

    const json& plan = require_field(doc, "plan");
    curve.plan.grid = require_field(plan, "grid").get<std::vector<std::size_t>>();
    curve.plan.replicates = require_field(plan, "replicates").get<std::size_t>();
    curve.plan.loss_cap = require_field(plan, "loss_cap").get<double>();
    curve.plan.holdout_fraction = require_field(plan, "holdout_fraction").get<double>();
    curve.plan.normalize = require_field(plan, "normalize").get<bool>();
    curve.plan.metric = metric_from_name(require_field(plan, "metric").get<std::string>());
    curve.plan.master_seed = require_field(plan, "master_seed").get<std::uint64_t>();

    for (const json& p : require_field(doc, "points")) {
        CurvePoint pt;
        pt.n = require_field(p, "n").get<std::size_t>();
        pt.replicate_losses =
            require_field(p, "replicate_losses").get<std::vector<double>>();
        pt.mean_loss = require_field(p, "mean_loss").get<double>();
        pt.std_error = require_field(p, "std_error").get<double>();
        curve.points.push_back(std::move(pt));
    }
    curve.monotone_means = require_field(doc, "monotone_means").get<std::vector<double>>();
    curve.num_classes = require_field(doc, "num_classes").get<std::uint32_t>();
    if (doc.contains("oracle_loss")) curve.oracle_loss = doc["oracle_loss"].get<double>();
    if (doc.contains("warnings")) {
        curve.warnings = doc["warnings"].get<std::vector<std::string>>();
    }

    curve.plan.validate();
    if (curve.points.size() != curve.plan.grid.size() ||
        curve.monotone_means.size() != curve.points.size()) {
        throw ValidationError("curve JSON is inconsistent: points, grid, and "
                              "monotone_means must have equal lengths");
    }
    for (std::size_t j = 0; j < curve.points.size(); ++j) {
        if (curve.points[j].n != curve.plan.grid[j]) {
            throw ValidationError("curve JSON is inconsistent: point sizes do not "
                                  "match the plan grid");
        }
    }
    if (curve.num_classes < 2) {
        throw ValidationError("curve JSON declares fewer than 2 classes");
    }
    return curve;
}

std::string curve_fingerprint(const LossDataCurve& curve) {
    Fingerprint fp;
    fp.add("curve/v1");
    fp.add(curve_to_json(curve));
    return fp.hex();
}

}  // namespace repeval
