#pragma once

#include <cstddef>
#include <vector>

#include "predict/pmf.hpp"

namespace predict {

// Finite, discrete-time, irreducible and aperiodic Markov chain. The
// constructor validates row-stochasticity (1e-9), verifies irreducibility
// and aperiodicity on the transition graph, and computes the stationary
// distribution (direct solve up to 512 states cross-checked against power
// iteration, power iteration alone above). Immutable afterwards.
class MarkovChain {
public:
    explicit MarkovChain(const std::vector<std::vector<double>>& rows);
    MarkovChain(std::size_t states, std::vector<double> row_major);

    std::size_t states() const { return states_; }
    double p(std::size_t x, std::size_t y) const { return transition_[x * states_ + y]; }
    const std::vector<double>& transition() const { return transition_; }
    const double* row(std::size_t x) const { return transition_.data() + x * states_; }
    const std::vector<double>& stationary() const { return stationary_; }
    DiscretePmf stationary_pmf() const;

    // Detailed balance pi(x)P(x,y) = pi(y)P(y,x) for all pairs.
    bool reversible(double tol = 1e-9) const;

    // Row x of P^L by repeated squaring; L = 0 is the point mass at x.
    DiscretePmf l_step(std::size_t x, long L) const;
    std::vector<double> l_step_row(std::size_t x, long L) const;

    // Full P^L, row-major.
    std::vector<double> matrix_power(long L) const;

private:
    void validate_and_build();

    std::size_t states_ = 0;
    std::vector<double> transition_;
    std::vector<double> stationary_;
};

// Incremental row of P^L for scans over increasing lead times: advancing by
// one step costs a single vector-matrix product.
class TransientScan {
public:
    TransientScan(const MarkovChain& chain, std::size_t x);

    long lead_time() const { return lead_; }
    const std::vector<double>& weights() const { return row_; }

    void step();
    // Requires L >= current lead time.
    void advance_to(long L);

private:
    const MarkovChain* chain_;
    std::vector<double> row_, scratch_;
    long lead_ = 0;
};

}  // namespace predict
