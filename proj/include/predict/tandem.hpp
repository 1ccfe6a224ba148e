#pragma once

#include <vector>

#include "predict/observable.hpp"

namespace predict {

// Ordered chain of independent observable models whose performance values
// add (end-to-end delay). Observed hops contribute their forecast, the rest
// their marginal.
struct TandemSystem {
    std::vector<ObservableModel> hops;
    std::vector<bool> observed;
    // State index per hop; meaningful only where observed[m] is true.
    std::vector<std::size_t> observed_states;

    std::size_t hop_count() const { return hops.size(); }
    void validate() const;
};

// Convolution that drops trailing support whose total mass is below 1e-10
// and renormalizes; keeps M-fold convolutions from accreting dead tail.
DiscretePmf convolve_trimmed(const DiscretePmf& p, const DiscretePmf& q);

// Convolution over hops of forecast (observed) / marginal (unobserved).
DiscretePmf tandem_forecast(const TandemSystem& sys, long L);

// Convolution of the per-hop marginals; independent of the mask.
DiscretePmf tandem_marginal(const TandemSystem& sys);

// TV distance between the two convolutions.
double tandem_predictability(const TandemSystem& sys, long L);

// Subadditive bound: sum of per-hop predictabilities over observed hops
// (unobserved hops contribute zero), clamped to [0,1].
double tandem_predictability_ub(const TandemSystem& sys, long L);

}  // namespace predict
