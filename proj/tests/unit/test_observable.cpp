#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "predict/errors.hpp"
#include "predict/geo_queue.hpp"
#include "predict/montecarlo.hpp"
#include "predict/observable.hpp"

using namespace predict;

namespace {

// Two-state chain with point-mass posteriors: the running worked example.
ObservableModel two_state_point_model() {
    MarkovChain chain({{0.9, 0.1}, {0.4, 0.6}});
    std::vector<DiscretePmf> posteriors{DiscretePmf::point_mass(0), DiscretePmf::point_mass(1)};
    return ObservableModel(std::move(chain), std::move(posteriors));
}

}  // namespace

TEST_SUITE("observable") {

TEST_CASE("construction validates posterior count") {
    MarkovChain chain({{0.9, 0.1}, {0.4, 0.6}});
    std::vector<DiscretePmf> one{DiscretePmf::point_mass(0)};
    CHECK_THROWS_AS(ObservableModel(std::move(chain), std::move(one)), InvalidParameter);
}

TEST_CASE("forecast at L=0 returns the posterior") {
    const auto model = two_state_point_model();
    const auto f = model.forecast(0, 0);
    CHECK(f.at(0) == doctest::Approx(1.0));
    CHECK(tv_distance(f, model.posterior(0)) < 1e-15);
}

TEST_CASE("forecast of point-mass posteriors reads the transition row") {
    const auto model = two_state_point_model();
    const auto f = model.forecast(0, 1);
    CHECK(f.at(0) == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(f.at(1) == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("forecast converges to the marginal") {
    const auto model = two_state_point_model();
    CHECK(tv_distance(model.forecast(0, 200), model.marginal()) < 1e-6);
    CHECK(model.predictability(1, 200) < 1e-6);
}

TEST_CASE("marginal mixes posteriors by pi") {
    const auto model = two_state_point_model();
    CHECK(model.marginal().at(0) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(model.marginal().at(1) == doctest::Approx(0.2).epsilon(1e-12));

    // Identical posteriors: marginal equals the common posterior.
    MarkovChain chain({{0.9, 0.1}, {0.4, 0.6}});
    DiscretePmf r(2, {0.3, 0.7});
    ObservableModel same(std::move(chain), {r, r});
    CHECK(tv_distance(same.marginal(), r) < 1e-14);
}

TEST_CASE("predictability hand values and identical-posterior degeneracy") {
    const auto model = two_state_point_model();
    CHECK(model.predictability(0, 0) == doctest::Approx(0.2).epsilon(1e-12));

    MarkovChain chain({{0.9, 0.1}, {0.4, 0.6}});
    DiscretePmf r(0, {0.5, 0.5});
    ObservableModel same(std::move(chain), {r, r});
    for (long L : {0L, 1L, 7L}) {
        CHECK(same.predictability(0, L) < 1e-15);
        CHECK(same.predictability(1, L) < 1e-15);
    }
}

TEST_CASE("the two predictability routes agree to 1e-12") {
    CounterRng rng(47, 0);
    for (int trial = 0; trial < 60; ++trial) {
        const auto model = oracle::random_model(rng, 2 + trial % 7);
        for (long L : {0L, 1L, 2L, 5L, 13L}) {
            for (std::size_t x = 0; x < model.states(); ++x) {
                CHECK(model.predictability(x, L) ==
                      doctest::Approx(model.predictability_theorem(x, L)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("predictability decays under the chain-TV envelope") {
    CounterRng rng(53, 0);
    for (int trial = 0; trial < 40; ++trial) {
        const auto model = oracle::random_model(rng, 2 + trial % 6);
        const auto pi = model.chain().stationary_pmf();
        for (long L : {0L, 1L, 4L, 10L}) {
            for (std::size_t x = 0; x < model.states(); ++x) {
                const double chain_tv = tv_distance(model.chain().l_step(x, L), pi);
                CHECK(model.predictability(x, L) <= chain_tv + 1e-12);
            }
        }
    }
}

TEST_CASE("ce_predictability basics") {
    const auto model = two_state_point_model();
    // Forecast at L=0 from state 0 is a point mass; marginal has mass at 1.
    CHECK_THROWS_AS(model.ce_predictability(0, 0), AbsoluteContinuityViolation);

    MarkovChain chain({{0.9, 0.1}, {0.4, 0.6}});
    DiscretePmf r(0, {0.5, 0.5});
    ObservableModel same(std::move(chain), {r, r});
    CHECK(same.ce_predictability(0, 2) == doctest::Approx(0.0).epsilon(1e-14));

    CHECK(model.ce_predictability(0, 300) < 1e-6);
}

TEST_CASE("epsilon_horizon: geometric decay of the two-state example") {
    const auto model = two_state_point_model();
    // D(L) = 0.2 * 0.5^L: 0.2, 0.1, 0.05, 0.025 ...
    const auto h = model.epsilon_horizon(0, 0.05, 64);
    REQUIRE(h.has_value());
    CHECK(*h == 2);

    CHECK(!model.epsilon_horizon(0, 0.5, 64).has_value());
    CHECK_THROWS_AS(model.epsilon_horizon(0, 1e-12, 4), HorizonExceedsScan);

    MarkovChain chain({{0.9, 0.1}, {0.4, 0.6}});
    DiscretePmf r(0, {0.5, 0.5});
    ObservableModel same(std::move(chain), {r, r});
    CHECK(!same.epsilon_horizon(0, 0.01, 32).has_value());
}

TEST_CASE("epsilon_horizon pointwise reading on a non-monotone profile") {
    // Period-ish chain (strong negative eigenvalue): D dips then recovers.
    MarkovChain chain({{0.05, 0.95}, {0.95, 0.05}});
    ObservableModel model(std::move(chain),
                          {DiscretePmf::point_mass(0), DiscretePmf::point_mass(1)});
    // D(L) = 0.5 * 0.9^L |cos-free|: actually |lambda_2|^L / 2 with lambda_2 = -0.9.
    const auto prefix = model.epsilon_horizon(0, 0.3, 64, HorizonReading::prefix);
    const auto pointwise = model.epsilon_horizon(0, 0.3, 64, HorizonReading::pointwise);
    REQUIRE(prefix.has_value());
    REQUIRE(pointwise.has_value());
    CHECK(*prefix <= *pointwise);
    // |..|: D(L) = 0.5*0.9^L here is monotone; readings agree.
    CHECK(*prefix == *pointwise);
}

TEST_CASE("delayed predictability is the shifted lead time exactly") {
    const auto model = two_state_point_model();
    for (long L : {0L, 2L}) {
        for (long d : {0L, 3L, 50L}) {
            CHECK(model.delayed_predictability(0, L, d) == model.predictability(0, L + d));
        }
    }
    CHECK(model.delayed_predictability(0, 0, 400) < 1e-6);
}

TEST_CASE("aggregation identity map leaves the model unchanged") {
    CounterRng rng(59, 0);
    const auto model = oracle::random_model(rng, 5);
    AggregationMap identity;
    identity.map = {0, 1, 2, 3, 4};
    const auto agg = aggregate(model, identity);
    for (std::size_t x = 0; x < 5; ++x) {
        for (std::size_t y = 0; y < 5; ++y) {
            CHECK(agg.chain().p(x, y) == doctest::Approx(model.chain().p(x, y)).epsilon(1e-12));
        }
        CHECK(tv_distance(agg.posterior(x), model.posterior(x)) < 1e-12);
    }
}

TEST_CASE("aggregating everything kills predictability") {
    const auto model = two_state_point_model();
    AggregationMap all;
    all.map = {0, 0};
    const auto agg = aggregate(model, all);
    CHECK(agg.states() == 1);
    for (long L : {0L, 1L, 5L}) CHECK(agg.predictability(0, L) < 1e-15);
}

TEST_CASE("aggregation formulas match the brute-force double sum") {
    // Geo/Geo/1/3 aggregated pairwise {0,1} -> 0, {2,3} -> 1.
    const GeoQueueParams params(0.2, 0.5, 3);
    const auto model = geo_observable_model(params);
    AggregationMap pairs;
    pairs.map = {0, 0, 1, 1};
    const auto agg = aggregate(model, pairs);

    const auto& pi = model.chain().stationary();
    for (std::size_t a = 0; a < 2; ++a) {
        double pi_a = 0.0;
        for (std::size_t x = 0; x < 4; ++x) {
            if (pairs.map[x] == a) pi_a += pi[x];
        }
        CHECK(agg.chain().stationary()[a] == doctest::Approx(pi_a).epsilon(1e-10));
        for (std::size_t b = 0; b < 2; ++b) {
            double num = 0.0;
            for (std::size_t x = 0; x < 4; ++x) {
                for (std::size_t y = 0; y < 4; ++y) {
                    if (pairs.map[x] == a && pairs.map[y] == b) num += model.chain().p(x, y) * pi[x];
                }
            }
            CHECK(agg.chain().p(a, b) == doctest::Approx(num / pi_a).epsilon(1e-12));
        }
        // r_bar_a(z) = sum_{y in a} pi(y) r_y(z) / pi(a)
        for (long z = agg.posterior(a).offset(); z <= agg.posterior(a).support_end(); ++z) {
            double num = 0.0;
            for (std::size_t y = 0; y < 4; ++y) {
                if (pairs.map[y] == a) num += pi[y] * model.posterior(y).at(z);
            }
            CHECK(agg.posterior(a).at(z) == doctest::Approx(num / pi_a).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("marginal is invariant under aggregation") {
    CounterRng rng(61, 0);
    const auto model = oracle::random_model(rng, 6);
    AggregationMap map;
    map.map = {0, 0, 1, 1, 2, 2};
    const auto agg = aggregate(model, map);
    CHECK(tv_distance(agg.marginal(), model.marginal()) < 1e-12);
}

TEST_CASE("non-surjective maps are rejected and contiguity is reported") {
    CounterRng rng(67, 0);
    const auto model = oracle::random_model(rng, 4);
    AggregationMap gap;
    gap.map = {0, 0, 2, 2};  // coarse state 1 empty
    CHECK_THROWS_AS(aggregate(model, gap), NotSurjective);

    AggregationMap contiguous = AggregationMap::blocks(6, 2);
    CHECK(contiguous.contiguous());
    AggregationMap interleaved;
    interleaved.map = {0, 1, 0, 1};
    CHECK(!interleaved.contiguous());
}

}  // TEST_SUITE
