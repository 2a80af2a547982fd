#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "repeval/fingerprint.hpp"
#include "repeval/rng.hpp"

using namespace repeval;

TEST_CASE("equal seeds give equal sequences") {
    RngStream a(42);
    RngStream b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different sequences") {
    RngStream a(1);
    RngStream b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += a.next_u64() == b.next_u64();
    CHECK(same == 0);
}

TEST_CASE("mix_seed is a pure function of its inputs") {
    CHECK(mix_seed(7, "train", 3, 9) == mix_seed(7, "train", 3, 9));
    CHECK(mix_seed(7, "train", 3, 9) != mix_seed(7, "train", 9, 3));
    CHECK(mix_seed(7, "train", 3, 9) != mix_seed(7, "eval", 3, 9));
    CHECK(mix_seed(7, "train", 3, 9) != mix_seed(8, "train", 3, 9));
}

TEST_CASE("fork depends only on identity, not on draw state") {
    RngStream fresh(11);
    RngStream drained(11);
    for (int i = 0; i < 1000; ++i) drained.next_u64();
    RngStream fa = fresh.fork("child", 5);
    RngStream fb = drained.fork("child", 5);
    for (int i = 0; i < 20; ++i) CHECK(fa.next_u64() == fb.next_u64());
}

TEST_CASE("sibling forks are distinct") {
    RngStream root(3);
    auto a = root.fork("rep", 0);
    auto b = root.fork("rep", 1);
    auto c = root.fork("other", 0);
    std::set<std::uint64_t> firsts{a.next_u64(), b.next_u64(), c.next_u64()};
    CHECK(firsts.size() == 3);
}

TEST_CASE("next_double lies in the unit interval") {
    RngStream s(5);
    for (int i = 0; i < 10000; ++i) {
        const double u = s.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("next_below respects the bound and is roughly uniform") {
    RngStream s(9);
    std::vector<int> counts(10, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const std::uint64_t v = s.next_below(10);
        REQUIRE(v < 10);
        counts[static_cast<std::size_t>(v)]++;
    }
    // Expected 10000 per bucket; 5 sigma is about 474.
    for (int c : counts) {
        CHECK(c > 9500);
        CHECK(c < 10500);
    }
}

TEST_CASE("next_normal matches standard moments") {
    RngStream s(13);
    const int draws = 50000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double x = s.next_normal();
        REQUIRE(std::isfinite(x));
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / draws;
    const double var = sumsq / draws - mean * mean;
    CHECK(std::abs(mean) < 0.02);          // se = 1/sqrt(50000) ~ 0.0045
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("next_bernoulli frequency tracks p") {
    RngStream s(17);
    const int draws = 50000;
    int hits = 0;
    for (int i = 0; i < draws; ++i) hits += s.next_bernoulli(0.3);
    const double freq = static_cast<double>(hits) / draws;
    CHECK(std::abs(freq - 0.3) < 0.01);  // 5 sigma ~ 0.0102
    RngStream t(18);
    for (int i = 0; i < 100; ++i) {
        CHECK_FALSE(t.next_bernoulli(0.0));
        CHECK(t.next_bernoulli(1.0));
    }
}

TEST_CASE("fingerprint is stable and input-sensitive") {
    Fingerprint a;
    a.add("hello");
    a.add(1.5);
    Fingerprint b;
    b.add("hello");
    b.add(1.5);
    CHECK(a.hex() == b.hex());
    CHECK(a.hex().size() == 16);

    Fingerprint c;
    c.add("hello");
    c.add(1.5000001);
    CHECK(a.hex() != c.hex());

    // Length-prefixed strings: ("ab","c") must differ from ("a","bc").
    Fingerprint d1, d2;
    d1.add("ab");
    d1.add("c");
    d2.add("a");
    d2.add("bc");
    CHECK(d1.hex() != d2.hex());
}
