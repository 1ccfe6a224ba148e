#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "predict/markov.hpp"
#include "predict/pmf.hpp"

namespace predict {

enum class HorizonReading {
    // Largest L such that predictability stays >= epsilon for every lead
    // time up to and including L (default; matches the guarantee that
    // forecasts remain informative through the horizon).
    prefix,
    // Literal max{L : D(L) >= epsilon}, ignoring dips before L.
    pointwise,
};

// A Markov chain together with one stationary posterior pmf per state.
// Posteriors are padded onto a common support grid at construction so that
// forecast/marginal mixtures are single vector-matrix products.
class ObservableModel {
public:
    ObservableModel(MarkovChain chain, std::vector<DiscretePmf> posteriors);

    const MarkovChain& chain() const { return chain_; }
    std::size_t states() const { return chain_.states(); }
    const std::vector<DiscretePmf>& posteriors() const { return posteriors_; }
    const DiscretePmf& posterior(std::size_t y) const { return posteriors_[y]; }

    long support_lo() const { return lo_; }
    long support_hi() const { return hi_; }
    std::size_t span() const { return span_; }
    // states() x span() row-major grid of posterior masses.
    const std::vector<double>& posterior_grid() const { return grid_; }

    // Mixture sum_y weights[y] * r_y as a pmf (weights length states()).
    DiscretePmf mixture(const double* weights) const;
    // Same mixture on the raw grid, no trimming or normalization.
    std::vector<double> mixture_raw(const double* weights) const;

    // Pr(Z_{n+L} | X_n = x): posterior mixture weighted by the L-step row.
    DiscretePmf forecast(std::size_t x, long L) const;

    // Stationary mixture sum_y pi(y) r_y (cached).
    const DiscretePmf& marginal() const { return marginal_; }
    const std::vector<double>& marginal_raw() const { return marginal_raw_; }

    // TV distance between forecast and marginal. `predictability` mixes then
    // takes the TV distance; `predictability_theorem` accumulates the signed
    // inner sum first. The two routes agree to 1e-12 and the first is the
    // release path.
    double predictability(std::size_t x, long L) const;
    double predictability_theorem(std::size_t x, long L) const;

    // Given precomputed L-step weights (length states()).
    double predictability_from_weights(const double* weights) const;
    double predictability_theorem_from_weights(const double* weights) const;

    double ce_predictability(std::size_t x, long L) const;

    // Largest L <= l_max with predictability >= epsilon (reading above).
    // nullopt when predictability is already below epsilon at L = 0;
    // HorizonExceedsScan when the horizon is not bracketed by l_max.
    std::optional<long> epsilon_horizon(std::size_t x, double epsilon, long l_max,
                                        HorizonReading reading = HorizonReading::prefix) const;

    // Observation d slots stale: identical to predictability at lead L + d.
    double delayed_predictability(std::size_t x, long L, long d) const;

private:
    MarkovChain chain_;
    std::vector<DiscretePmf> posteriors_;
    long lo_ = 0, hi_ = 0;
    std::size_t span_ = 0;
    std::vector<double> grid_;
    std::vector<double> marginal_raw_;
    DiscretePmf marginal_ = DiscretePmf::point_mass(0);
};

// Surjective coarsening of the state space; map[x] is the coarse state of
// fine state x.
struct AggregationMap {
    std::vector<std::size_t> map;

    std::size_t fine_states() const { return map.size(); }
    std::size_t coarse_states() const;
    // True when every coarse state's preimage is a contiguous range of fine
    // states (the only case the aggregation-monotonicity observations cover).
    bool contiguous() const;
    // Groups of `width` consecutive fine states.
    static AggregationMap blocks(std::size_t fine_states, std::size_t width);
};

// Lumped chain and posteriors: pi-weighted block sums of the transition
// matrix and pi-weighted posterior mixtures per coarse state.
ObservableModel aggregate(const ObservableModel& model, const AggregationMap& map);

}  // namespace predict
