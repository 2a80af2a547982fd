#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "repeval/dataset.hpp"

namespace repeval {

/// Dense bit matrix with rows packed into 64-bit words.
class BitMatrix {
public:
    BitMatrix(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool get(std::size_t r, std::size_t c) const;
    void set(std::size_t r, std::size_t c, bool v);

    /// dst ^= src, whole rows.
    void xor_rows(std::size_t dst, std::size_t src);
    void swap_rows(std::size_t a, std::size_t b);

private:
    std::size_t rows_;
    std::size_t cols_;
    std::size_t words_per_row_;
    std::vector<std::uint64_t> words_;
};

struct Gf2Solution {
    // Canonical solution with free variables set to 0.
    std::vector<std::uint8_t> solution;
    std::size_t rank = 0;
    bool unique = false;  // rank == number of unknowns
};

/// Solves X s = y over GF(2) by Gaussian elimination.
/// Throws InconsistentSystemError when the system has no solution.
Gf2Solution gf2_solve(const BitMatrix& x, const std::vector<std::uint8_t>& y);

/// Probability that n uniform random GF(2) vectors of dimension d span the
/// whole space: prod_{i=0}^{d-1} (1 - 2^(i-n)). Zero when n < d.
double linear_independence_prob(std::size_t d, std::size_t n);

/// Binary entropy in nats: -a*ln(a) - (1-a)*ln(1-a), with H(0) = H(1) = 0.
double binary_entropy(double alpha);

/// Parity of <s, x> where features are rounded to bits at 0.5.
std::uint8_t gf2_dot(std::span<const std::uint8_t> s, std::span<const float> x);

/// Packs a dataset's feature block into a bit matrix.
/// Every feature must be exactly 0.0 or 1.0.
BitMatrix bit_matrix_from_features(const Dataset& ds);

}  // namespace repeval
