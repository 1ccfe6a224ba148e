#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "predict/errors.hpp"
#include "predict/geo_queue.hpp"
#include "predict/montecarlo.hpp"
#include "predict/tandem.hpp"

using namespace predict;

namespace {

ObservableModel two_state_point_model() {
    MarkovChain chain({{0.9, 0.1}, {0.4, 0.6}});
    return ObservableModel(std::move(chain),
                           {DiscretePmf::point_mass(0), DiscretePmf::point_mass(1)});
}

TandemSystem random_tandem(CounterRng& rng, std::size_t hops) {
    TandemSystem sys;
    for (std::size_t m = 0; m < hops; ++m) {
        const std::size_t n = 2 + (std::size_t)(rng.next_double() * 4.0);
        sys.hops.push_back(oracle::random_model(rng, n, 5));
        sys.observed.push_back(rng.next_double() < 0.6);
        sys.observed_states.push_back((std::size_t)(rng.next_double() * (double)n));
    }
    return sys;
}

}  // namespace

TEST_SUITE("tandem") {

TEST_CASE("single observed hop degenerates to the plain model") {
    TandemSystem sys;
    sys.hops.push_back(two_state_point_model());
    sys.observed = {true};
    sys.observed_states = {0};
    for (long L : {0L, 1L, 3L}) {
        CHECK(tv_distance(tandem_forecast(sys, L), sys.hops[0].forecast(0, L)) < 1e-12);
        CHECK(tandem_predictability(sys, L) ==
              doctest::Approx(sys.hops[0].predictability(0, L)).epsilon(1e-10));
        // With one observed hop the subadditive bound IS that hop's value.
        CHECK(tandem_predictability_ub(sys, L) ==
              doctest::Approx(sys.hops[0].predictability(0, L)).epsilon(1e-12));
    }
}

TEST_CASE("unobserved systems carry no information") {
    CounterRng rng(97, 0);
    TandemSystem sys = random_tandem(rng, 3);
    sys.observed = {false, false, false};
    for (long L : {0L, 2L}) {
        CHECK(tv_distance(tandem_forecast(sys, L), tandem_marginal(sys)) < 1e-12);
        CHECK(tandem_predictability(sys, L) < 1e-12);
        CHECK(tandem_predictability_ub(sys, L) == 0.0);
    }
}

TEST_CASE("two point-mass hops against exhaustive joint enumeration") {
    TandemSystem sys;
    sys.hops.push_back(two_state_point_model());
    sys.hops.push_back(two_state_point_model());
    sys.observed = {true, true};
    sys.observed_states = {0, 1};

    const long L = 2;
    // Enumerate the joint distribution of Z1 + Z2 by hand.
    const auto w1 = sys.hops[0].chain().l_step_row(0, L);
    const auto w2 = sys.hops[1].chain().l_step_row(1, L);
    std::vector<double> joint(3, 0.0);
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) joint[a + b] += w1[a] * w2[b];
    }
    const auto fc = tandem_forecast(sys, L);
    for (long z = 0; z <= 2; ++z) CHECK(fc.at(z) == doctest::Approx(joint[(std::size_t)z]).epsilon(1e-12));
}

TEST_CASE("marginal mean additivity and permutation invariance") {
    const GeoQueueParams pa(0.2, 0.5, 4);
    const GeoQueueParams pb(0.3, 0.6, 3);
    TandemSystem sys;
    sys.hops.push_back(geo_observable_model(pa));
    sys.hops.push_back(geo_observable_model(pb));
    sys.observed = {true, true};
    sys.observed_states = {2, 1};

    const auto m = tandem_marginal(sys);
    CHECK(m.mean() == doctest::Approx(sys.hops[0].marginal().mean() +
                                      sys.hops[1].marginal().mean())
                          .epsilon(1e-7));

    TandemSystem swapped;
    swapped.hops.push_back(geo_observable_model(pb));
    swapped.hops.push_back(geo_observable_model(pa));
    swapped.observed = {true, true};
    swapped.observed_states = {1, 2};
    CHECK(tv_distance(m, tandem_marginal(swapped)) < 1e-10);
}

TEST_CASE("marginal matches Monte-Carlo sum sampling on small queues") {
    const GeoQueueParams pa(0.2, 0.5, 3);
    const GeoQueueParams pb(0.25, 0.55, 3);
    TandemSystem sys;
    sys.hops.push_back(geo_observable_model(pa));
    sys.hops.push_back(geo_observable_model(pb));
    sys.observed = {false, false};
    sys.observed_states = {0, 0};

    // Draw (state from pi, z from posterior) per hop and sum.
    const std::uint64_t samples = 200000;
    std::map<long, double> counts;
    for (std::uint64_t i = 0; i < samples; ++i) {
        CounterRng rng(314, i);
        long z_sum = 0;
        for (const auto& hop : sys.hops) {
            const auto& pi = hop.chain().stationary();
            double u = rng.next_double();
            std::size_t y = 0;
            double acc = pi[0];
            while (y + 1 < pi.size() && u > acc) acc += pi[++y];
            const auto& r = hop.posterior(y);
            u = rng.next_double();
            acc = 0.0;
            std::size_t zi = 0;
            for (; zi < r.size(); ++zi) {
                acc += r.mass()[zi];
                if (u <= acc) break;
            }
            z_sum += r.offset() + (long)std::min(zi, r.size() - 1);
        }
        counts[z_sum] += 1.0 / (double)samples;
    }
    const auto analytic = tandem_marginal(sys);
    double tv = 0.0;
    for (long z = 0; z <= analytic.support_end() + 5; ++z) {
        const auto it = counts.find(z);
        tv += std::fabs((it == counts.end() ? 0.0 : it->second) - analytic.at(z));
    }
    CHECK(0.5 * tv < 0.01);
}

TEST_CASE("subadditivity on random systems") {
    CounterRng rng(101, 0);
    for (int trial = 0; trial < 60; ++trial) {
        const TandemSystem sys = random_tandem(rng, 2 + (std::size_t)(trial % 3));
        for (long L : {0L, 1L, 3L, 8L}) {
            CHECK(tandem_predictability(sys, L) <= tandem_predictability_ub(sys, L) + 1e-9);
        }
    }
}

TEST_CASE("convolve_trimmed keeps mass and trims only dead tail") {
    const GeoQueueParams p(0.2, 0.5, 6);
    const auto model = geo_observable_model(p);
    const auto direct = convolve(model.marginal(), model.marginal());
    const auto trimmed = convolve_trimmed(model.marginal(), model.marginal());
    CHECK(tv_distance(direct, trimmed) < 1e-9);
    CHECK(trimmed.size() <= direct.size());
}

TEST_CASE("mask and state validation") {
    TandemSystem sys;
    sys.hops.push_back(two_state_point_model());
    sys.observed = {true, false};
    sys.observed_states = {0};
    CHECK_THROWS_AS(tandem_marginal(sys), InvalidParameter);

    TandemSystem bad_state;
    bad_state.hops.push_back(two_state_point_model());
    bad_state.observed = {true};
    bad_state.observed_states = {7};
    CHECK_THROWS_AS(tandem_forecast(bad_state, 1), InvalidParameter);
}

}  // TEST_SUITE
