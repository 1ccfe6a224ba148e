#include "predict/random_walk.hpp"

#include <vector>

#include "predict/errors.hpp"

namespace predict {

RandomWalkParams RandomWalkParams::vehicular() { return RandomWalkParams{}; }

RandomWalkParams RandomWalkParams::static_connection() {
    RandomWalkParams p;
    p.stay_prob = 0.9;
    return p;
}

void RandomWalkParams::validate() const {
    if (states < 2) throw InvalidParameter("random walk needs at least 2 states");
    if (!(stay_prob > 0.0) || !(stay_prob < 1.0)) {
        throw InvalidParameter("stay probability must lie in (0,1)");
    }
    for (long cqi = 1; cqi <= states; ++cqi) {
        if (!(nb_r(cqi) > 0.0)) {
            throw InvalidParameter("NB shape <= 0 at CQI " + std::to_string(cqi));
        }
        const double q = nb_q(cqi);
        if (!(q > 0.0) || !(q < 1.0)) {
            throw InvalidParameter("NB success probability outside (0,1) at CQI " +
                                   std::to_string(cqi));
        }
    }
}

MarkovChain lazy_walk_chain(const RandomWalkParams& params) {
    params.validate();
    const std::size_t n = static_cast<std::size_t>(params.states);
    const double hop = (1.0 - params.stay_prob) / 2.0;
    std::vector<double> t(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double self = 1.0;
        if (i > 0) {
            t[i * n + i - 1] = hop;
            self -= hop;
        }
        if (i + 1 < n) {
            t[i * n + i + 1] = hop;
            self -= hop;
        }
        t[i * n + i] = self;
    }
    return MarkovChain(n, std::move(t));
}

ObservableModel cqi_observable_model(const RandomWalkParams& params) {
    params.validate();
    std::vector<DiscretePmf> posteriors;
    posteriors.reserve(static_cast<std::size_t>(params.states));
    for (long cqi = 1; cqi <= params.states; ++cqi) {
        posteriors.push_back(
            negative_binomial_pmf(NbConvention::failures, params.nb_r(cqi), params.nb_q(cqi)));
    }
    return ObservableModel(lazy_walk_chain(params), std::move(posteriors));
}

}  // namespace predict
