#include "repeval/rng.hpp"

#include <cmath>

#include "repeval/errors.hpp"

namespace repeval {

namespace {

// splitmix64 finalizer; decorrelates structured inputs such as small indices.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag,
                       std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = mix64(seed ^ 0x8f5c2e1a94d37b6full);
    h = mix64(h ^ fnv1a64(tag));
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return h;
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

RngStream::RngStream(std::uint64_t master_seed, std::string_view purpose,
                     std::uint64_t a, std::uint64_t b)
    : RngStream(mix_seed(master_seed, purpose, a, b)) {}

RngStream RngStream::fork(std::string_view purpose, std::uint64_t a,
                          std::uint64_t b) const {
    return RngStream(mix_seed(seed_, purpose, a, b));
}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_normal() {
    // Box-Muller, cosine branch only: exactly two uniforms per call.
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();  // log(0) guard
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
    if (bound == 0) throw ValidationError("next_below requires bound >= 1");
    if (bound == 1) return 0;
    // Rejection sampling: discard the partial block at the top of the range.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % bound;
    }
}

bool RngStream::next_bernoulli(double p) { return next_double() < p; }

}  // namespace repeval
