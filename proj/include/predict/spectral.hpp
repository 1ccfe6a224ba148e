#pragma once

#include <cstddef>
#include <vector>

#include "predict/markov.hpp"

namespace predict {

// Eigen-decomposition of a reversible chain: real eigenvalues sorted
// descending (first is 1) and eigenfunctions orthonormal under the
// pi-weighted inner product, with f_1 constant one. Deterministic ordering
// and sign convention so that repeated runs produce identical tables.
struct SpectralDecomposition {
    std::size_t states = 0;
    std::vector<double> eigenvalues;     // length K, descending
    std::vector<double> eigenfunctions;  // row-major: f(j, x) = [j * K + x]
    std::vector<double> pi;              // stationary distribution copy
    double lambda_star = 0.0;            // max |lambda_j|, j >= 2
    double spectral_gap = 1.0;           // 1 - lambda_star

    double f(std::size_t j, std::size_t x) const { return eigenfunctions[j * states + x]; }
};

// Symmetrizes with D^(1/2) P D^(-1/2) and runs a cyclic Jacobi sweep to
// off-diagonal norm < 1e-12. Throws NotReversible when detailed balance
// fails.
SpectralDecomposition spectral_decompose(const MarkovChain& chain);

// (1/2) (sum_{j>=2} lambda_j^(2L) f_j(x)^2)^(1/2) — bound on the chain's
// TV distance to stationarity from state x after L steps.
double mixing_tv_bound_full(const SpectralDecomposition& spec, std::size_t x, long L);

// (1/2) lambda_*^L (1/pi(x) - 1)^(1/2) — the spectral-gap relaxation;
// always >= the full bound.
double mixing_tv_bound_gap(const SpectralDecomposition& spec, std::size_t x, long L);

}  // namespace predict
