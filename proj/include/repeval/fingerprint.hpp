#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace repeval {

/// Incremental 64-bit FNV-1a hash used for content fingerprints.
/// Fingerprints identify dataset and algorithm configurations in output
/// files; they are stable across runs and platforms of the same width.
class Fingerprint {
public:
    Fingerprint& add_bytes(const void* data, std::size_t size);
    Fingerprint& add(std::string_view s);
    Fingerprint& add(std::uint64_t v);
    Fingerprint& add(std::int64_t v);
    Fingerprint& add(double v);  // hashed by bit pattern

    /// 16 lowercase hex digits.
    std::string hex() const;

    std::uint64_t value() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

std::string to_hex(std::uint64_t v);

}  // namespace repeval
