#include "repeval/gf2.hpp"

#include <algorithm>
#include <cmath>

#include "repeval/errors.hpp"

namespace repeval {

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_per_row_((cols + 63) / 64),
      words_(rows * words_per_row_, 0) {}

bool BitMatrix::get(std::size_t r, std::size_t c) const {
    return (words_[r * words_per_row_ + c / 64] >> (c % 64)) & 1u;
}

void BitMatrix::set(std::size_t r, std::size_t c, bool v) {
    std::uint64_t& w = words_[r * words_per_row_ + c / 64];
    const std::uint64_t mask = std::uint64_t{1} << (c % 64);
    if (v) {
        w |= mask;
    } else {
        w &= ~mask;
    }
}

void BitMatrix::xor_rows(std::size_t dst, std::size_t src) {
    for (std::size_t w = 0; w < words_per_row_; ++w) {
        words_[dst * words_per_row_ + w] ^= words_[src * words_per_row_ + w];
    }
}

void BitMatrix::swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t w = 0; w < words_per_row_; ++w) {
        std::swap(words_[a * words_per_row_ + w], words_[b * words_per_row_ + w]);
    }
}

Gf2Solution gf2_solve(const BitMatrix& x, const std::vector<std::uint8_t>& y) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n) {
        throw ValidationError("right-hand side has " + std::to_string(y.size()) +
                              " entries, matrix has " + std::to_string(n) + " rows");
    }

    // Augmented copy: column d holds y.
    BitMatrix a(n, d + 1);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) a.set(r, c, x.get(r, c));
        a.set(r, d, (y[r] & 1) != 0);
    }

    std::vector<std::size_t> pivot_col;
    pivot_col.reserve(std::min(n, d));
    std::size_t row = 0;
    for (std::size_t col = 0; col < d && row < n; ++col) {
        std::size_t pivot = row;
        while (pivot < n && !a.get(pivot, col)) ++pivot;
        if (pivot == n) continue;
        a.swap_rows(row, pivot);
        for (std::size_t r = 0; r < n; ++r) {
            if (r != row && a.get(r, col)) a.xor_rows(r, row);
        }
        pivot_col.push_back(col);
        ++row;
    }

    // Any leftover row reading 0 = 1 certifies inconsistency.
    for (std::size_t r = row; r < n; ++r) {
        if (a.get(r, d)) {
            throw InconsistentSystemError(
                "linear system over GF(2) is inconsistent: no parity vector fits "
                "all " + std::to_string(n) + " examples");
        }
    }

    Gf2Solution result;
    result.rank = pivot_col.size();
    result.unique = result.rank == d;
    result.solution.assign(d, 0);
    for (std::size_t i = 0; i < pivot_col.size(); ++i) {
        result.solution[pivot_col[i]] = a.get(i, d) ? 1 : 0;
    }
    return result;
}

double linear_independence_prob(std::size_t d, std::size_t n) {
    if (d == 0) return 1.0;
    if (n < d) return 0.0;
    double p = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        // 2^(i-n) via exp2 of a signed difference; i < d <= n here.
        p *= 1.0 - std::exp2(static_cast<double>(i) - static_cast<double>(n));
    }
    return p;
}

double binary_entropy(double alpha) {
    if (!(alpha >= 0.0) || !(alpha <= 1.0)) {
        throw ValidationError("binary entropy needs a probability in [0, 1]");
    }
    if (alpha == 0.0 || alpha == 1.0) return 0.0;
    return -alpha * std::log(alpha) - (1.0 - alpha) * std::log(1.0 - alpha);
}

std::uint8_t gf2_dot(std::span<const std::uint8_t> s, std::span<const float> x) {
    if (s.size() != x.size()) {
        throw ValidationError("parity vector width " + std::to_string(s.size()) +
                              " does not match feature width " +
                              std::to_string(x.size()));
    }
    unsigned acc = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        acc ^= (s[i] & 1) & (x[i] >= 0.5f ? 1u : 0u);
    }
    return static_cast<std::uint8_t>(acc);
}

BitMatrix bit_matrix_from_features(const Dataset& ds) {
    BitMatrix m(ds.n, ds.d);
    for (std::size_t r = 0; r < ds.n; ++r) {
        for (std::size_t c = 0; c < ds.d; ++c) {
            const float f = ds.features[r * ds.d + c];
            if (f != 0.0f && f != 1.0f) {
                throw ValidationError(
                    "feature in record " + std::to_string(r) + ", column " +
                    std::to_string(c) + " is " + std::to_string(f) +
                    "; bit-valued features are required (is normalization on?)");
            }
            m.set(r, c, f == 1.0f);
        }
    }
    return m;
}

}  // namespace repeval
