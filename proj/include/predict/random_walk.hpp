#pragma once

#include "predict/markov.hpp"
#include "predict/observable.hpp"

namespace predict {

// Lazy reflecting random walk over CQI levels 1..K modulating NB-distributed
// throughput in integer Mbps. NB parameters are linear in the (1-indexed)
// CQI level; the defaults are the fitted LTE-trace values.
struct RandomWalkParams {
    long states = 15;
    double stay_prob = 0.6;
    double nb_r_slope = 0.105;
    double nb_r_intercept = 0.104;
    double nb_q_slope = -0.006;
    double nb_q_intercept = 0.135;

    // Mobile connection, p = 0.6.
    static RandomWalkParams vehicular();
    // Near-static connection, p = 0.9.
    static RandomWalkParams static_connection();

    double nb_r(long cqi) const { return nb_r_slope * static_cast<double>(cqi) + nb_r_intercept; }
    double nb_q(long cqi) const { return nb_q_slope * static_cast<double>(cqi) + nb_q_intercept; }
    void validate() const;
};

// P(i,i) = p, P(i,i+-1) = (1-p)/2 in the interior; at the boundaries the
// outward step folds into the self-loop. Doubly stochastic, so the
// stationary distribution is exactly uniform. States are 0-indexed
// internally (CQI level = state + 1).
MarkovChain lazy_walk_chain(const RandomWalkParams& params);

// Posterior per CQI level: NB in the failures convention (throughput may be
// 0 Mbps) with shape nb_r(cqi) and success probability nb_q(cqi).
ObservableModel cqi_observable_model(const RandomWalkParams& params);

}  // namespace predict
