#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace repeval {

/// Mixes a seed with a purpose tag and two indices into a new 64-bit seed.
/// The mixing is a fixed function of its inputs, so two processes that agree
/// on (seed, tag, a, b) derive the same child stream regardless of scheduling.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag,
                       std::uint64_t a, std::uint64_t b);

/// Deterministic, forkable random stream.
///
/// Every task derives its own stream from (master seed, purpose tag, indices)
/// via fork(), which reads only the stream's identity, never its draw state.
/// Draw results are therefore independent of how many values sibling streams
/// consumed, which makes multi-worker runs bit-identical to sequential ones.
///
/// All distributions are implemented on top of the raw 64-bit generator so
/// that sequences are reproducible across standard library implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);
    RngStream(std::uint64_t master_seed, std::string_view purpose,
              std::uint64_t a = 0, std::uint64_t b = 0);

    /// Child stream keyed by this stream's seed plus (purpose, a, b).
    /// Does not consume draw state.
    RngStream fork(std::string_view purpose, std::uint64_t a = 0,
                   std::uint64_t b = 0) const;

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double next_double();

    /// Standard normal via Box-Muller; no spare value is cached, so the
    /// draw count per call is fixed.
    double next_normal();

    /// Uniform on {0, ..., bound-1}, unbiased via rejection. bound >= 1.
    std::uint64_t next_below(std::uint64_t bound);

    bool next_bernoulli(double p);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;  // identity used for forking, untouched by draws
    std::mt19937_64 engine_;
};

}  // namespace repeval
