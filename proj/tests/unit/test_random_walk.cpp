#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "predict/errors.hpp"
#include "predict/random_walk.hpp"
#include "predict/spectral.hpp"

using namespace predict;

TEST_SUITE("random_walk") {

TEST_CASE("hand-built K=3 lazy walk") {
    RandomWalkParams params;
    params.states = 3;
    params.stay_prob = 0.5;
    const auto chain = lazy_walk_chain(params);
    CHECK(chain.p(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(chain.p(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(chain.p(0, 2) == 0.0);
    CHECK(chain.p(1, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(chain.p(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(chain.p(1, 2) == doctest::Approx(0.25).epsilon(1e-15));
    for (std::size_t y = 0; y < 3; ++y) {
        CHECK(chain.stationary()[y] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    CHECK(chain.reversible());
}

TEST_CASE("doubly stochastic rows and columns force uniform pi") {
    for (double p : {0.6, 0.9}) {
        RandomWalkParams params;
        params.stay_prob = p;
        const auto chain = lazy_walk_chain(params);
        const std::size_t n = chain.states();
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0, col = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                row += chain.p(i, j);
                col += chain.p(j, i);
            }
            CHECK(row == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(col == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(chain.stationary()[i] == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("presets and NB parameter domains") {
    CHECK(RandomWalkParams::vehicular().stay_prob == doctest::Approx(0.6));
    CHECK(RandomWalkParams::static_connection().stay_prob == doctest::Approx(0.9));

    const RandomWalkParams params;
    CHECK(params.nb_r(15) == doctest::Approx(0.105 * 15 + 0.104).epsilon(1e-12));
    CHECK(params.nb_q(15) == doctest::Approx(-0.006 * 15 + 0.135).epsilon(1e-12));
    for (long cqi = 1; cqi <= 15; ++cqi) {
        CHECK(params.nb_r(cqi) > 0.0);
        CHECK(params.nb_q(cqi) > 0.0);
        CHECK(params.nb_q(cqi) < 1.0);
    }

    // A slope that drives q negative within range must be rejected.
    RandomWalkParams bad;
    bad.nb_q_slope = -0.01;
    CHECK_THROWS_AS(cqi_observable_model(bad), InvalidParameter);
    RandomWalkParams bad_p;
    bad_p.stay_prob = 1.0;
    CHECK_THROWS_AS(lazy_walk_chain(bad_p), InvalidParameter);
}

TEST_CASE("throughput posteriors include zero Mbps") {
    const auto model = cqi_observable_model(RandomWalkParams::vehicular());
    CHECK(model.states() == 15);
    for (std::size_t y = 0; y < 15; ++y) {
        CHECK(model.posterior(y).offset() == 0);
        CHECK(model.posterior(y).at(0) > 0.0);
    }
}

TEST_CASE("lazier walk mixes slower") {
    const auto lazy = spectral_decompose(lazy_walk_chain(RandomWalkParams::static_connection()));
    const auto mobile = spectral_decompose(lazy_walk_chain(RandomWalkParams::vehicular()));
    CHECK(lazy.lambda_star > mobile.lambda_star);
}

TEST_CASE("boundary states carry more predictability than mid states") {
    const auto model = cqi_observable_model(RandomWalkParams::vehicular());
    for (long L : {5L, 20L, 60L}) {
        // CQI 1 and 15 are internal states 0 and 14; CQI 3 is state 2.
        CHECK(model.predictability(0, L) > model.predictability(2, L));
        CHECK(model.predictability(14, L) > model.predictability(2, L));
    }
}

TEST_CASE("static connection sustains predictability longer") {
    const auto mobile = cqi_observable_model(RandomWalkParams::vehicular());
    const auto stat = cqi_observable_model(RandomWalkParams::static_connection());
    for (long L : {10L, 40L, 120L}) {
        for (std::size_t x : {0u, 2u, 14u}) {
            CHECK(stat.predictability(x, L) >= mobile.predictability(x, L));
        }
    }
}

TEST_CASE("spectral gap bound is state-independent here") {
    const auto model = cqi_observable_model(RandomWalkParams::vehicular());
    const auto spec = spectral_decompose(model.chain());
    const double b = mixing_tv_bound_gap(spec, 0, 12);
    for (std::size_t x : {3u, 7u, 14u}) {
        CHECK(mixing_tv_bound_gap(spec, x, 12) == doctest::Approx(b).epsilon(1e-12));
    }
}

}  // TEST_SUITE
