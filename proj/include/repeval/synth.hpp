#pragma once

#include <cstdint>
#include <vector>

#include "repeval/dataset.hpp"
#include "repeval/rng.hpp"

namespace repeval {

enum class ParityRepr {
    raw,          // features are the input bits x
    noisy_label,  // single feature z = y xor e, e ~ Bernoulli(alpha)
};

struct ParitySpec {
    std::size_t d = 16;
    double alpha = 0.1;  // label-noise bias of the noisy representation
    // Parity support; empty means "draw a nonzero secret from the stream".
    std::vector<std::uint8_t> secret;
    ParityRepr repr_kind = ParityRepr::raw;

    void validate() const;
};

/// Noisy-parity task: x uniform on {0,1}^d, y = <x, secret> mod 2.
/// The raw representation stores x; the noisy-label representation stores the
/// single bit z = y xor e with e ~ Bernoulli(alpha), whose Bayes loss is the
/// binary entropy of alpha.
Dataset gen_parity(const ParitySpec& spec, std::size_t n, RngStream stream);

/// Two-class Gaussian task: y uniform on {0,1}, x ~ N(mu_y, I_d) with
/// mu_0 = (-mu, 0, ...), mu_1 = (+mu, 0, ...). The Bayes loss (posterior
/// entropy) depends only on mu and is attached as oracle_loss.
Dataset gen_gaussian_task(std::size_t d, double mu, std::size_t n,
                          RngStream stream);

/// Bayes loss of the Gaussian task in nats, computed by quadrature.
double gaussian_task_oracle_loss(double mu);

/// All labels zero, features zero: a fixture task for algorithms whose
/// output does not depend on the data contents.
Dataset gen_constant_task(std::size_t n, std::size_t d = 1,
                          std::uint32_t num_classes = 2);

}  // namespace repeval
