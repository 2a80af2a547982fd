#include <doctest.h>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "repeval/curve.hpp"
#include "repeval/errors.hpp"
#include "repeval/measures.hpp"
#include "repeval/rng.hpp"
#include "repeval/stub.hpp"
#include "repeval/synth.hpp"

using namespace repeval;

namespace {

StubSpec stub_spec(StubShape shape, double a, double b = 0.0, std::size_t n0 = 1) {
    StubSpec s;
    s.shape = shape;
    s.a = a;
    s.b = b;
    s.n0 = n0;
    s.bound = 2.0;
    return s;
}

/// Noiseless stub curve over the constant task; loss values are exact.
LossDataCurve stub_curve(const StubSpec& spec, std::vector<std::size_t> grid,
                         std::uint32_t k = 2) {
    EvalPlan plan;
    plan.grid = std::move(grid);
    plan.replicates = 2;
    plan.loss_cap = 3.0;
    plan.normalize = false;
    const Dataset task = gen_constant_task(2000, 1, k);
    return estimate_curve(StubAlgorithm(spec), task, plan);
}

std::vector<std::size_t> unit_grid(std::size_t m) {
    std::vector<std::size_t> g(m);
    for (std::size_t i = 0; i < m; ++i) g[i] = i + 1;
    return g;
}

/// Directly assembled curve for exercising classification rules.
LossDataCurve hand_curve(std::vector<std::size_t> grid, std::vector<double> means,
                         LossMetric metric, std::optional<double> oracle) {
    LossDataCurve c;
    c.plan.grid = grid;
    c.plan.replicates = 1;
    c.plan.loss_cap = 5.0;
    c.plan.metric = metric;
    c.num_classes = 2;
    c.oracle_loss = oracle;
    c.dataset_fingerprint = "handmade-data";
    c.algorithm_fingerprint = "handmade-alg";
    c.dataset_name = "handmade";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CurvePoint pt;
        pt.n = grid[i];
        pt.replicate_losses = {means[i]};
        pt.mean_loss = means[i];
        c.points.push_back(pt);
    }
    c.monotone_means = monotone_project(means);
    return c;
}

}  // namespace

TEST_CASE("validation loss reads the curve at an exact size") {
    const auto curve =
        stub_curve(stub_spec(StubShape::step, 0.7, 0.2, 100), {20, 60, 200});
    const MeasureResult r = va_at(curve, 60);
    CHECK(r.kind == MeasureKind::va);
    CHECK(r.value == doctest::Approx(0.7).epsilon(1e-12));
    REQUIRE(r.at_n.has_value());
    CHECK(*r.at_n == 60);
    CHECK_FALSE(r.epsilon.has_value());
    CHECK(r.tightness == Tightness::not_applicable);
    CHECK_FALSE(r.is_lower_bound);
    CHECK(r.provenance.dataset_fingerprint == curve.dataset_fingerprint);
    CHECK(r.provenance.algorithm_fingerprint == curve.algorithm_fingerprint);
    CHECK_THROWS_AS(va_at(curve, 61), ValidationError);
}

TEST_CASE("code length of a constant unit loss is exact") {
    // Unit per-example loss everywhere, ten classes: the first example costs
    // ln 10 and the remaining 36 cost 1 nat each.
    const auto curve =
        stub_curve(stub_spec(StubShape::constant, 1.0), {1, 5, 37, 60}, 10);
    const MeasureResult r = mdl_at(curve, 37, 10);
    CHECK(r.kind == MeasureKind::mdl);
    CHECK(r.value == doctest::Approx(38.302585092994046).epsilon(1e-12));
    REQUIRE(r.at_n.has_value());
    CHECK(*r.at_n == 37);
}

TEST_CASE("code length on a unit grid telescopes the harmonic series") {
    const auto curve = stub_curve(stub_spec(StubShape::inverse, 1.0), unit_grid(40));
    double expected = std::log(2.0);  // first example, untrained
    for (int j = 1; j <= 39; ++j) expected += 1.0 / j;
    CHECK(mdl_at(curve, 40, 2).value == doctest::Approx(expected).epsilon(1e-12));

    double expected17 = std::log(2.0);
    for (int j = 1; j <= 16; ++j) expected17 += 1.0 / j;
    CHECK(mdl_at(curve, 17, 2).value == doctest::Approx(expected17).epsilon(1e-12));
}

TEST_CASE("code length clips the final chunk at n") {
    const auto curve = stub_curve(stub_spec(StubShape::constant, 0.5), {1, 10, 100});
    CHECK(mdl_at(curve, 55, 2).value ==
          doctest::Approx(std::log(2.0) + 9 * 0.5 + 45 * 0.5).epsilon(1e-12));
    // Before the first grid size the code is all untrained loss.
    const auto late = stub_curve(stub_spec(StubShape::constant, 0.5), {4, 8});
    CHECK(mdl_at(late, 3, 2).value == doctest::Approx(3 * std::log(2.0)).epsilon(1e-12));
    CHECK(mdl_at(late, 4, 2).value == doctest::Approx(4 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("code length rejects bad arguments") {
    const auto curve = stub_curve(stub_spec(StubShape::constant, 0.5), {2, 8});
    CHECK_THROWS_AS(mdl_at(curve, 0, 2), ValidationError);
    CHECK_THROWS_AS(mdl_at(curve, 9, 2), ValidationError);
    CHECK_THROWS_AS(mdl_at(curve, 4, 3), ValidationError);
}

TEST_CASE("surplus length of a step curve is exact and certified") {
    const auto curve =
        stub_curve(stub_spec(StubShape::step, 0.6, 0.04, 21), unit_grid(40));
    const MeasureResult r = sdl_from_curve(curve, 0.1);
    CHECK(r.kind == MeasureKind::sdl);
    // First chunk [ln2 - 0.1] plus twenty unit chunks of surplus 0.5 each.
    CHECK(r.value == doctest::Approx(10.593147180559945).epsilon(1e-12));
    REQUIRE(r.epsilon.has_value());
    CHECK(*r.epsilon == 0.1);
    CHECK(r.tightness == Tightness::tight);  // final loss 0.04 < eps / 2
    CHECK_FALSE(r.is_lower_bound);
    CHECK(r.annotation.empty());

    // The certification boundary itself is inclusive (exact means, no
    // averaging dust).
    const auto edge = hand_curve({2, 50}, {0.6, 0.05}, LossMetric::nll,
                                 std::nullopt);
    CHECK(sdl_from_curve(edge, 0.1).tightness == Tightness::tight);
}

TEST_CASE("surplus length above an unreached threshold is a lower bound") {
    const auto curve = stub_curve(stub_spec(StubShape::constant, 0.3), unit_grid(40));
    const MeasureResult r = sdl_from_curve(curve, 0.2);
    CHECK(r.value == doctest::Approx(std::log(2.0) - 0.2 + 39 * 0.1).epsilon(1e-12));
    CHECK(r.is_lower_bound);
    CHECK(r.tightness == Tightness::lower_bound);
    CHECK(r.annotation.find("never reached") != std::string::npos);
}

TEST_CASE("surplus length in the uncertified middle zone") {
    // Final loss 0.15 is below eps = 0.2 but above the certification point 0.1.
    const auto curve = stub_curve(stub_spec(StubShape::constant, 0.15), unit_grid(40));
    const MeasureResult r = sdl_from_curve(curve, 0.2);
    CHECK(r.value == doctest::Approx(std::log(2.0) - 0.2).epsilon(1e-12));
    CHECK_FALSE(r.is_lower_bound);
    CHECK(r.tightness == Tightness::lower_bound);
    CHECK(r.annotation.find("not certified") != std::string::npos);
}

TEST_CASE("surplus length is non-increasing in the threshold") {
    const auto curve =
        stub_curve(stub_spec(StubShape::step, 0.6, 0.05, 21), unit_grid(40));
    double prev = sdl_from_curve(curve, 0.01).value;
    for (double eps : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        const double v = sdl_from_curve(curve, eps).value;
        CHECK(v <= prev + 1e-12);
        prev = v;
    }
}

TEST_CASE("known task floor widens the certification zone") {
    // Final mean 0.34 with eps 0.4: the plain threshold 0.2 would refuse to
    // certify, but a known Bayes floor of 0.325 moves the bar to 0.3625.
    const auto grid = std::vector<std::size_t>{2, 50};
    const auto with_oracle =
        hand_curve(grid, {0.6, 0.34}, LossMetric::nll, 0.325);
    CHECK(sdl_from_curve(with_oracle, 0.4).tightness == Tightness::tight);

    const auto no_oracle =
        hand_curve(grid, {0.6, 0.34}, LossMetric::nll, std::nullopt);
    CHECK(sdl_from_curve(no_oracle, 0.4).tightness == Tightness::lower_bound);
    CHECK_FALSE(sdl_from_curve(no_oracle, 0.4).is_lower_bound);

    // A floor at or above eps is uninformative; fall back to eps / 2.
    const auto high_oracle =
        hand_curve(grid, {0.6, 0.34}, LossMetric::nll, 0.5);
    CHECK(sdl_from_curve(high_oracle, 0.4).tightness == Tightness::lower_bound);

    // The floor is in nats, so it never applies to the error-rate metric.
    const auto zero_one =
        hand_curve(grid, {0.45, 0.34}, LossMetric::zero_one, 0.325);
    CHECK(sdl_from_curve(zero_one, 0.4).tightness == Tightness::lower_bound);
}

TEST_CASE("sample complexity from a curve finds the first crossing") {
    const auto curve =
        stub_curve(stub_spec(StubShape::step, 0.6, 0.05, 21), unit_grid(40));
    const MeasureResult r = esc_from_curve(curve, 0.1);
    CHECK(r.kind == MeasureKind::esc);
    CHECK(r.value == 21.0);
    CHECK_FALSE(r.is_lower_bound);

    const auto flat = stub_curve(stub_spec(StubShape::constant, 0.3), unit_grid(40));
    const MeasureResult lb = esc_from_curve(flat, 0.2);
    CHECK(lb.value == 40.0);
    CHECK(lb.is_lower_bound);
    CHECK_FALSE(lb.annotation.empty());
}

TEST_CASE("sample complexity boundary is inclusive") {
    const auto curve = hand_curve({2, 20}, {0.5, 0.1}, LossMetric::nll, std::nullopt);
    CHECK(esc_from_curve(curve, 0.1).value == 20.0);
    CHECK(esc_from_curve(curve, 0.5).value == 2.0);
    CHECK(esc_from_curve(curve, 0.09).is_lower_bound);
}

TEST_CASE("threshold measures reject non-positive epsilon") {
    const auto curve = hand_curve({2, 20}, {0.5, 0.1}, LossMetric::nll, std::nullopt);
    CHECK_THROWS_AS(sdl_from_curve(curve, 0.0), ValidationError);
    CHECK_THROWS_AS(esc_from_curve(curve, -0.1), ValidationError);
}

TEST_CASE("code length is bounded by surplus plus linear term") {
    // On a noiseless non-increasing curve the chunked estimators satisfy
    // MDL(n) <= SDL(eps) + n * eps for every eps.
    const auto curve = stub_curve(stub_spec(StubShape::inverse, 1.0), unit_grid(40));
    const double mdl = mdl_at(curve, 40, 2).value;
    for (double eps : {0.05, 0.1, 0.3, 0.6931471805599453, 1.5}) {
        CHECK(mdl <= sdl_from_curve(curve, eps).value + 40.0 * eps + 1e-9);
    }
}

TEST_CASE("direct surplus estimation on an exact unit range") {
    SdlEstimatorConfig config;
    config.epsilon = 0.1;
    config.max_size = 3;
    config.replicates = 25;
    config.delta = 0.05;
    config.loss_cap = 1.0;
    config.normalize = false;
    const Dataset task = gen_constant_task(2000);
    const StubAlgorithm alg(stub_spec(StubShape::inverse, 1.0));
    const MeasureResult r = sdl_direct(alg, task, config);

    // Exact means 1, 1/2, 1/3 give 0.9 + 0.4 + (1/3 - 0.1).
    CHECK(r.value == doctest::Approx(1.5333333333333334).epsilon(1e-12));
    REQUIRE(r.error_bound.has_value());
    const double expected_bound =
        1.0 * 3.0 * std::sqrt(std::log(2.0 * 3.0 / 0.05) / (2.0 * 25.0));
    CHECK(*r.error_bound == doctest::Approx(expected_bound).epsilon(1e-12));
    CHECK(*r.error_bound == doctest::Approx(0.9283041062608568).epsilon(1e-12));
    // Final mean 1/3 stays above eps: only a lower bound.
    CHECK(r.is_lower_bound);
    CHECK(r.tightness == Tightness::lower_bound);
    CHECK(r.provenance.detail.find("exact grid") != std::string::npos);
}

TEST_CASE("direct surplus estimation certifies a decayed tail") {
    SdlEstimatorConfig config;
    config.epsilon = 0.2;
    config.max_size = 5;
    config.replicates = 10;
    config.loss_cap = 1.0;
    config.normalize = false;
    const Dataset task = gen_constant_task(2000);
    const StubAlgorithm alg(stub_spec(StubShape::step, 0.8, 0.02, 3));
    const MeasureResult r = sdl_direct(alg, task, config);
    CHECK(r.value == doctest::Approx(1.2).epsilon(1e-12));  // two sizes at 0.6
    CHECK(r.tightness == Tightness::tight);
    CHECK_FALSE(r.is_lower_bound);
}

TEST_CASE("direct surplus estimation switches to a weighted subgrid") {
    SdlEstimatorConfig config;
    config.epsilon = 0.1;
    config.max_size = 1000;
    config.replicates = 10;
    config.loss_cap = 1.0;
    config.normalize = false;
    const Dataset task = gen_constant_task(5000);
    const StubAlgorithm alg(stub_spec(StubShape::constant, 0.4));
    const MeasureResult r = sdl_direct(alg, task, config);
    // Chunk weights sum to M, so a constant surplus of 0.3 integrates to 300.
    CHECK(r.value == doctest::Approx(300.0).epsilon(1e-9));
    CHECK(r.provenance.detail.find("subgrid") != std::string::npos);
}

TEST_CASE("direct surplus estimation enforces the training budget") {
    SdlEstimatorConfig config;
    config.max_size = 1000;
    config.replicates = 150;
    config.max_train_runs = 2000;  // 20 sizes x 150 replicates = 3000
    const Dataset task = gen_constant_task(2000);
    const StubAlgorithm alg(stub_spec(StubShape::constant, 0.4));
    CHECK_THROWS_AS(sdl_direct(alg, task, config), BudgetError);
}

TEST_CASE("direct surplus estimate lands within its own error bound") {
    // Bernoulli noise with mean 0.3 and range [0, 1]; the certificate says
    // |estimate - 4| <= bound with probability 0.95, and the run is fixed.
    StubSpec s = stub_spec(StubShape::constant, 0.3);
    s.noise = StubNoiseKind::bernoulli;
    s.bound = 1.0;
    SdlEstimatorConfig config;
    config.epsilon = 0.1;
    config.max_size = 20;
    config.replicates = 200;
    config.loss_cap = 1.0;
    config.normalize = false;
    config.master_seed = 21;
    const Dataset task = gen_constant_task(2000);
    const MeasureResult r = sdl_direct(StubAlgorithm(s), task, config);
    REQUIRE(r.error_bound.has_value());
    CHECK(std::abs(r.value - 20.0 * 0.2) <= *r.error_bound);
}

TEST_CASE("search replicate counts follow the union bound") {
    EscSearchConfig config;
    config.epsilon = 0.2;
    config.delta = 0.05;
    config.rounds = 2;
    config.loss_cap = 1.0;
    CHECK(esc_search_replicates(config) == 335);
    config.epsilon = 0.1;
    CHECK(esc_search_replicates(config) == 1337);
    config.rounds = 1;
    CHECK(esc_search_replicates(config) == 1199);
    config.rounds = 2;
    config.loss_cap = 2.0;
    config.epsilon = 0.2;
    CHECK(esc_search_replicates(config) == 1337);  // B^2 scales like 1/eps^2
}

TEST_CASE("recursive search narrows a noiseless decaying curve") {
    const Dataset task = gen_constant_task(5000);
    const StubAlgorithm alg(stub_spec(StubShape::inverse, 1.0));
    EscSearchConfig config;
    config.epsilon = 0.2;
    config.delta = 0.05;
    config.search_limit = 1000;
    config.loss_cap = 1.0;
    config.normalize = false;

    config.rounds = 1;
    CHECK(esc_search(alg, task, config).value == 100.0);
    config.rounds = 2;
    const MeasureResult two = esc_search(alg, task, config);
    CHECK(two.value == 10.0);
    CHECK_FALSE(two.is_lower_bound);
    // The answer is pinned after round 2; extra rounds cannot move it.
    config.rounds = 3;
    const MeasureResult three = esc_search(alg, task, config);
    CHECK(three.value == 10.0);
    CHECK(three.provenance.detail.find("3 of 3") != std::string::npos);
}

TEST_CASE("recursive search on a coarse first round") {
    const Dataset task = gen_constant_task(3000);
    const StubAlgorithm alg(stub_spec(StubShape::inverse, 1.0));
    EscSearchConfig config;
    config.epsilon = 0.2;
    config.search_limit = 40;
    config.rounds = 1;
    config.loss_cap = 1.0;
    config.normalize = false;
    // Bin edges 4, 8, 12, ...: the first mean at or below 0.1 is 1/12.
    CHECK(esc_search(alg, task, config).value == 12.0);
}

TEST_CASE("recursive search reports a lower bound when nothing qualifies") {
    const Dataset task = gen_constant_task(5000);
    const StubAlgorithm alg(stub_spec(StubShape::constant, 0.3));
    EscSearchConfig config;
    config.epsilon = 0.2;
    config.search_limit = 1000;
    config.rounds = 2;
    config.loss_cap = 1.0;
    config.normalize = false;
    const MeasureResult r = esc_search(alg, task, config);
    CHECK(r.value == 1000.0);
    CHECK(r.is_lower_bound);
    CHECK(r.annotation.find("first round") != std::string::npos);
    CHECK(r.provenance.detail.find("S=335") != std::string::npos);
}

TEST_CASE("recursive search is deterministic") {
    const Dataset task = gen_constant_task(4000);
    StubSpec s = stub_spec(StubShape::inverse, 1.0);
    s.noise = StubNoiseKind::uniform;
    s.amplitude = 0.05;
    s.bound = 1.0;
    EscSearchConfig config;
    config.epsilon = 0.2;
    config.search_limit = 500;
    config.rounds = 2;
    config.loss_cap = 1.0;
    config.normalize = false;
    config.master_seed = 5;
    const std::string a = measure_to_json(esc_search(StubAlgorithm(s), task, config));
    const std::string b = measure_to_json(esc_search(StubAlgorithm(s), task, config));
    CHECK(a == b);
}

TEST_CASE("recursive search enforces the replicate budget") {
    const Dataset task = gen_constant_task(1000);
    const StubAlgorithm alg(stub_spec(StubShape::inverse, 1.0));
    EscSearchConfig config;
    config.epsilon = 0.1;
    config.rounds = 2;
    config.loss_cap = 1.0;
    config.max_replicates = 100;  // S = 1337 exceeds this
    CHECK_THROWS_AS(esc_search(alg, task, config), BudgetError);
}

TEST_CASE("single-mean replicate floor matches the closed form") {
    CHECK(hoeffding_min_k(0.1, 0.05, 1.0) == 150);
    CHECK(hoeffding_min_k(0.1, 0.05, 2.0) == 600);
    CHECK(hoeffding_min_k(0.2, 0.05, 1.0) == 38);
    CHECK(hoeffding_min_k(0.1, 1.0, 1.0) == 0);  // no confidence requested
    CHECK_THROWS_AS(hoeffding_min_k(0.0, 0.05, 1.0), ValidationError);
    CHECK_THROWS_AS(hoeffding_min_k(0.1, 0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(hoeffding_min_k(0.1, 1.5, 1.0), ValidationError);
    CHECK_THROWS_AS(hoeffding_min_k(0.1, 0.05, 0.0), ValidationError);
}

TEST_CASE("measure serialization round-trips every field") {
    const auto curve =
        stub_curve(stub_spec(StubShape::step, 0.6, 0.05, 21), unit_grid(40));
    for (const MeasureResult& original :
         {sdl_from_curve(curve, 0.1), esc_from_curve(curve, 0.01),
          va_at(curve, 21), mdl_at(curve, 30, 2)}) {
        const MeasureResult back = measure_from_json(measure_to_json(original));
        CHECK(back.kind == original.kind);
        CHECK(back.value == original.value);
        CHECK(back.epsilon == original.epsilon);
        CHECK(back.at_n == original.at_n);
        CHECK(back.is_lower_bound == original.is_lower_bound);
        CHECK(back.tightness == original.tightness);
        CHECK(back.error_bound == original.error_bound);
        CHECK(back.annotation == original.annotation);
        CHECK(back.provenance.dataset_fingerprint ==
              original.provenance.dataset_fingerprint);
        CHECK(back.provenance.algorithm_fingerprint ==
              original.provenance.algorithm_fingerprint);
        CHECK(back.provenance.detail == original.provenance.detail);
    }
    CHECK_THROWS_AS(measure_from_json("not json"), ValidationError);
}

TEST_CASE("value formatting distinguishes bounds and kinds") {
    MeasureResult r;
    r.kind = MeasureKind::va;
    r.value = 0.7;
    CHECK(format_measure_value(r) == "0.70");
    r.kind = MeasureKind::esc;
    r.value = 40.0;
    r.is_lower_bound = true;
    CHECK(format_measure_value(r) == "> 40");
    r.is_lower_bound = false;
    CHECK(format_measure_value(r) == "40");
    r.kind = MeasureKind::sdl;
    r.value = 1.5333;
    CHECK(format_measure_value(r) == "1.53");
}
