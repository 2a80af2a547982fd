#include "repeval/fingerprint.hpp"

#include <cstring>

namespace repeval {

Fingerprint& Fingerprint::add_bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        state_ ^= p[i];
        state_ *= 0x100000001b3ull;
    }
    return *this;
}

Fingerprint& Fingerprint::add(std::string_view s) {
    // Length prefix keeps ("ab","c") distinct from ("a","bc").
    add(static_cast<std::uint64_t>(s.size()));
    return add_bytes(s.data(), s.size());
}

Fingerprint& Fingerprint::add(std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    return add_bytes(bytes, 8);
}

Fingerprint& Fingerprint::add(std::int64_t v) {
    return add(static_cast<std::uint64_t>(v));
}

Fingerprint& Fingerprint::add(double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    return add(bits);
}

std::string Fingerprint::hex() const { return to_hex(state_); }

std::string to_hex(std::uint64_t v) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace repeval
