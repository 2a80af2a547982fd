#include <doctest.h>

#include <cmath>
#include <vector>

#include "repeval/errors.hpp"
#include "repeval/gf2.hpp"
#include "repeval/rng.hpp"
#include "repeval/synth.hpp"

using namespace repeval;

TEST_CASE("raw parity labels satisfy the planted parity") {
    ParitySpec spec;
    spec.d = 10;
    spec.secret = {1, 0, 1, 0, 0, 1, 0, 0, 0, 1};
    spec.repr_kind = ParityRepr::raw;
    const Dataset ds = gen_parity(spec, 500, RngStream(3, "parity"));
    CHECK(ds.n == 500);
    CHECK(ds.d == 10);
    CHECK(ds.num_classes == 2);
    CHECK(ds.name == "parity-raw-d10");
    REQUIRE(ds.oracle_loss.has_value());
    CHECK(*ds.oracle_loss == 0.0);
    for (std::size_t i = 0; i < ds.n; ++i) {
        CHECK(ds.labels[i] == gf2_dot(spec.secret, ds.row(i)));
    }
}

TEST_CASE("raw parity inputs are roughly uniform bits") {
    ParitySpec spec;
    spec.d = 8;
    const Dataset ds = gen_parity(spec, 20000, RngStream(11, "parity"));
    double ones = 0.0;
    for (float f : ds.features) {
        REQUIRE((f == 0.0f || f == 1.0f));
        ones += f;
    }
    const double frac = ones / static_cast<double>(ds.features.size());
    CHECK(std::abs(frac - 0.5) < 0.01);  // 160k bits, 5 sigma ~ 0.006
    // Labels of a nonzero parity are balanced too.
    double label_ones = 0.0;
    for (auto y : ds.labels) label_ones += y;
    CHECK(std::abs(label_ones / 20000.0 - 0.5) < 0.02);
}

TEST_CASE("default secret is deterministic in the seed and nonzero") {
    ParitySpec spec;
    spec.d = 6;
    const Dataset a = gen_parity(spec, 50, RngStream(21, "parity"));
    const Dataset b = gen_parity(spec, 50, RngStream(21, "parity"));
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    const Dataset c = gen_parity(spec, 50, RngStream(22, "parity"));
    CHECK(a.features != c.features);
}

TEST_CASE("noisy-label representation is one bit with the advertised flip rate") {
    ParitySpec spec;
    spec.d = 12;
    spec.alpha = 0.1;
    spec.repr_kind = ParityRepr::noisy_label;
    const Dataset ds = gen_parity(spec, 40000, RngStream(5, "parity"));
    CHECK(ds.d == 1);
    CHECK(ds.name == "parity-noisy-d12-alpha0.1");
    REQUIRE(ds.oracle_loss.has_value());
    CHECK(*ds.oracle_loss ==
          doctest::Approx(binary_entropy(0.1)).epsilon(1e-12));
    double flips = 0.0;
    for (std::size_t i = 0; i < ds.n; ++i) {
        const int z = ds.features[i] >= 0.5f ? 1 : 0;
        flips += z != static_cast<int>(ds.labels[i]);
    }
    const double rate = flips / static_cast<double>(ds.n);
    CHECK(std::abs(rate - 0.1) < 0.0075);  // se = 0.0015, 5 sigma
}

TEST_CASE("alpha zero makes the noisy feature equal the label") {
    ParitySpec spec;
    spec.d = 4;
    spec.alpha = 0.0;
    spec.repr_kind = ParityRepr::noisy_label;
    const Dataset ds = gen_parity(spec, 300, RngStream(9, "parity"));
    REQUIRE(ds.oracle_loss.has_value());
    CHECK(*ds.oracle_loss == 0.0);
    for (std::size_t i = 0; i < ds.n; ++i) {
        CHECK(static_cast<int>(ds.features[i]) == static_cast<int>(ds.labels[i]));
    }
}

TEST_CASE("parity spec validation") {
    ParitySpec spec;
    spec.d = 0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.d = 4;
    spec.alpha = 0.5;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.alpha = 0.1;
    spec.secret = {1, 0};  // wrong length
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.secret = {0, 0, 0, 0};  // all-zero parity is constant
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("gaussian task geometry and balance") {
    const Dataset ds = gen_gaussian_task(3, 1.0, 50000, RngStream(2, "gauss"));
    CHECK(ds.d == 3);
    CHECK(ds.num_classes == 2);
    CHECK(ds.name == "gaussian-mu1-d3");
    double count1 = 0.0;
    double sum0_by_class[2] = {0.0, 0.0};
    double sum1 = 0.0;
    for (std::size_t i = 0; i < ds.n; ++i) {
        count1 += ds.labels[i];
        sum0_by_class[ds.labels[i]] += ds.features[i * 3];
        sum1 += ds.features[i * 3 + 1];
    }
    CHECK(std::abs(count1 / 50000.0 - 0.5) < 0.012);
    const double mean0 = sum0_by_class[0] / (50000.0 - count1);
    const double mean1 = sum0_by_class[1] / count1;
    CHECK(std::abs(mean0 + 1.0) < 0.033);  // se ~ 1/sqrt(25000), 5 sigma
    CHECK(std::abs(mean1 - 1.0) < 0.033);
    CHECK(std::abs(sum1 / 50000.0) < 0.023);
}

TEST_CASE("gaussian oracle loss endpoints") {
    // mu = 0: the feature carries nothing, posterior entropy is ln 2.
    CHECK(gaussian_task_oracle_loss(0.0) ==
          doctest::Approx(0.6931471805599453).epsilon(1e-10));
    // mu = 10: classes are essentially separated.
    CHECK(gaussian_task_oracle_loss(10.0) < 1e-6);
    // Monotone decreasing in the separation.
    CHECK(gaussian_task_oracle_loss(0.5) > gaussian_task_oracle_loss(1.0));
    CHECK(gaussian_task_oracle_loss(1.0) > gaussian_task_oracle_loss(2.0));
}

TEST_CASE("gaussian oracle loss agrees with direct simulation") {
    // Independent oracle: Monte Carlo estimate of E[H(p(x))] where
    // p(x) = 1 / (1 + exp(-2 mu x0)) is the true posterior of class 1.
    const double mu = 1.0;
    RngStream stream(123, "gauss-mc");
    const int draws = 400000;
    double sum = 0.0;
    for (int i = 0; i < draws; ++i) {
        const int y = stream.next_bernoulli(0.5) ? 1 : 0;
        const double x0 = stream.next_normal() + (y == 1 ? mu : -mu);
        const double p1 = 1.0 / (1.0 + std::exp(-2.0 * mu * x0));
        sum += binary_entropy(p1);
    }
    const double mc = sum / draws;
    const double quad = gaussian_task_oracle_loss(mu);
    CHECK(std::abs(mc - quad) < 2.5e-3);
    REQUIRE(gen_gaussian_task(2, mu, 10, RngStream(0, "g")).oracle_loss.has_value());
    CHECK(*gen_gaussian_task(2, mu, 10, RngStream(0, "g")).oracle_loss ==
          doctest::Approx(quad).epsilon(1e-12));
}

TEST_CASE("constant task is all zeros with zero oracle loss") {
    const Dataset ds = gen_constant_task(40, 2, 3);
    CHECK(ds.n == 40);
    CHECK(ds.d == 2);
    CHECK(ds.num_classes == 3);
    CHECK(ds.name == "constant-k3");
    REQUIRE(ds.oracle_loss.has_value());
    CHECK(*ds.oracle_loss == 0.0);
    for (float f : ds.features) CHECK(f == 0.0f);
    for (auto y : ds.labels) CHECK(y == 0);
    ds.validate();
}
