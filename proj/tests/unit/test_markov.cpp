#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "predict/errors.hpp"
#include "predict/kernels.hpp"
#include "predict/markov.hpp"
#include "predict/montecarlo.hpp"

using namespace predict;

TEST_SUITE("markov") {

TEST_CASE("two-state chain stationary by hand") {
    MarkovChain chain({{0.9, 0.1}, {0.4, 0.6}});
    CHECK(chain.stationary()[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(chain.stationary()[1] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("construction rejects bad chains") {
    CHECK_THROWS_AS(MarkovChain({{1.0, 0.0}, {0.0, 1.0}}), Reducible);
    CHECK_THROWS_AS(MarkovChain({{0.0, 1.0}, {1.0, 0.0}}), Periodic);
    CHECK_THROWS_AS(MarkovChain({{0.7, 0.2}, {0.4, 0.6}}), NotStochastic);
    CHECK_THROWS_AS(MarkovChain({{1.1, -0.1}, {0.4, 0.6}}), NotStochastic);
    CHECK_THROWS_AS(MarkovChain({{0.9, 0.1, 0.0}, {0.4, 0.6, 0.0}}), NotStochastic);
    // 3-cycle with no self loops has period 3.
    CHECK_THROWS_AS(MarkovChain({{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}}), Periodic);
}

TEST_CASE("reversibility checks") {
    CHECK(MarkovChain({{0.9, 0.1}, {0.4, 0.6}}).reversible());

    // Any birth-death chain is reversible.
    MarkovChain bd({{0.8, 0.2, 0.0}, {0.3, 0.5, 0.2}, {0.0, 0.3, 0.7}});
    CHECK(bd.reversible());

    // Biased 3-cycle: pi uniform but P(0,1) != P(1,0).
    MarkovChain cyc({{0.2, 0.5, 0.3}, {0.3, 0.2, 0.5}, {0.5, 0.3, 0.2}});
    CHECK(!cyc.reversible());
}

TEST_CASE("l_step examples") {
    MarkovChain chain({{0.9, 0.1}, {0.4, 0.6}});

    const auto l0 = chain.l_step(0, 0);
    CHECK(l0.at(0) == 1.0);
    CHECK(l0.at(1) == 0.0);

    const auto l1 = chain.l_step(0, 1);
    CHECK(l1.at(0) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(l1.at(1) == doctest::Approx(0.1).epsilon(1e-15));

    const auto l2 = chain.l_step(0, 2);
    CHECK(l2.at(0) == doctest::Approx(0.85).epsilon(1e-14));
    CHECK(l2.at(1) == doctest::Approx(0.15).epsilon(1e-14));
}

TEST_CASE("l_step point mass offset for high states") {
    CounterRng rng(5, 0);
    const auto chain = oracle::random_reversible_chain(rng, 6);
    const auto p = chain.l_step(3, 0);
    CHECK(p.offset() == 3);
    CHECK(p.size() == 1);
}

TEST_CASE("repeated squaring equals naive L-fold multiplication") {
    CounterRng rng(23, 0);
    for (std::size_t n : {2u, 5u, 9u}) {
        const auto chain = oracle::random_reversible_chain(rng, n);
        for (long L : {0L, 1L, 3L, 17L, 64L}) {
            const auto fast = chain.matrix_power(L);
            const auto slow = oracle::matrix_power_naive(chain, L);
            for (std::size_t i = 0; i < n * n; ++i) {
                CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("TransientScan tracks l_step rows") {
    CounterRng rng(29, 0);
    const auto chain = oracle::random_reversible_chain(rng, 7);
    TransientScan scan(chain, 2);
    for (long L : {0L, 1L, 2L, 5L, 12L}) {
        scan.advance_to(L);
        const auto row = chain.l_step_row(2, L);
        for (std::size_t y = 0; y < chain.states(); ++y) {
            CHECK(scan.weights()[y] == doctest::Approx(row[y]).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(scan.advance_to(3), InvalidParameter);
}

TEST_CASE("stationary distribution is a fixed point on random chains") {
    CounterRng rng(31, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto chain = oracle::random_reversible_chain(rng, 4 + trial % 8);
        std::vector<double> out(chain.states());
        kernels::vec_mat(out.data(), chain.stationary().data(), chain.transition().data(),
                         chain.states(), chain.states());
        for (std::size_t i = 0; i < chain.states(); ++i) {
            CHECK(out[i] == doctest::Approx(chain.stationary()[i]).epsilon(1e-11));
        }
    }
}

}  // TEST_SUITE
