#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "predict/errors.hpp"
#include "predict/geo_queue.hpp"
#include "predict/montecarlo.hpp"

using namespace predict;

namespace {

ObservableModel two_state_point_model() {
    MarkovChain chain({{0.9, 0.1}, {0.4, 0.6}});
    return ObservableModel(std::move(chain),
                           {DiscretePmf::point_mass(0), DiscretePmf::point_mass(1)});
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("identical configs give bit-identical outputs") {
    const auto model = two_state_point_model();
    SimConfig cfg{12345, 20000, 0, 3};
    const auto a = sample_forecast_empirical(model, 0, 5, cfg);
    const auto b = sample_forecast_empirical(model, 0, 5, cfg);
    REQUIRE(a.pmf.size() == b.pmf.size());
    for (std::size_t i = 0; i < a.pmf.size(); ++i) CHECK(a.pmf.mass()[i] == b.pmf.mass()[i]);

    SimConfig other = cfg;
    other.stream_id = 4;
    const auto c = sample_forecast_empirical(model, 0, 5, other);
    bool all_equal = a.pmf.size() == c.pmf.size();
    if (all_equal) {
        for (std::size_t i = 0; i < a.pmf.size(); ++i) all_equal &= a.pmf.mass()[i] == c.pmf.mass()[i];
    }
    CHECK(!all_equal);

    const GeoQueueParams qp(0.2, 0.5, 3);
    const auto t1 = simulate_geo_queue(qp, 50000, cfg);
    const auto t2 = simulate_geo_queue(qp, 50000, cfg);
    CHECK(t1.state_histogram == t2.state_histogram);
    CHECK(t1.arrivals == t2.arrivals);
}

TEST_CASE("L=0 sampling reproduces the posterior") {
    const auto model = two_state_point_model();
    SimConfig cfg{777, 40000, 0, 0};
    const auto emp = sample_forecast_empirical(model, 1, 0, cfg);
    CHECK(emp.samples == 40000);
    CHECK(tv_distance(emp.pmf, model.posterior(1)) < 3.0 / std::sqrt(40000.0));
}

TEST_CASE("two-state L=1 forecast concentration") {
    const auto model = two_state_point_model();
    SimConfig cfg{42, 1000000, 0, 0};
    const auto emp = sample_forecast_empirical(model, 0, 1, cfg);
    CHECK(tv_distance(emp.pmf, DiscretePmf(0, {0.9, 0.1})) < 0.005);
}

TEST_CASE("empty and near-deterministic queues") {
    SimConfig cfg{9, 1, 0, 0};
    // alpha -> 0: queue never fills (alpha must be > 0, use tiny).
    const auto quiet = simulate_geo_queue(GeoQueueParams(1e-9, 0.5, 4), 20000, cfg);
    CHECK(quiet.state_histogram[0] == quiet.total_slots);
    CHECK(quiet.departures <= quiet.arrivals);

    // mu near 1, light load: every admitted packet leaves after one slot.
    const auto fast = simulate_geo_queue(GeoQueueParams(0.1, 0.999999, 4), 200000, cfg);
    std::uint64_t ones = 0, total = 0;
    for (const auto& hist : fast.sojourn_by_state) {
        for (std::size_t t = 0; t < hist.size(); ++t) {
            total += hist[t];
            if (t == 1) ones += hist[t];
        }
    }
    CHECK(total > 0);
    CHECK((double)ones / (double)total > 0.999);
}

TEST_CASE("queue histogram converges to the stationary law") {
    const GeoQueueParams p(0.2, 0.5, 3);
    SimConfig cfg{2718, 1, 2000, 0};
    const auto traj = simulate_geo_queue(p, 2000000, cfg);
    const auto pi = geo_stationary(p);
    double tv = 0.0;
    for (long y = 0; y <= 3; ++y) {
        tv += std::fabs((double)traj.state_histogram[(std::size_t)y] / (double)traj.total_slots -
                        pi.at(y));
    }
    CHECK(0.5 * tv < 0.01);
}

TEST_CASE("slot transition frequencies reproduce the queue transition matrix") {
    const GeoQueueParams p(0.3, 0.5, 3);
    SimConfig cfg{1618, 1, 1000, 0};
    const auto traj = simulate_geo_queue(p, 2000000, cfg);
    const auto chain = geo_transition_matrix(p);
    for (std::size_t i = 0; i <= 3; ++i) {
        const double rows = (double)traj.state_histogram[i];
        if (rows < 1000) continue;
        for (std::size_t j = 0; j <= 3; ++j) {
            const double expected = chain.p(i, j);
            const double freq = (double)traj.transition_counts[i * 4 + j] / rows;
            const double sigma = std::sqrt(std::max(expected * (1 - expected), 1e-12) / rows);
            CHECK(std::fabs(freq - expected) < 4.0 * sigma + 1e-9);
        }
    }
}

TEST_CASE("conditional sojourn law matches NB(y+1, mu)") {
    const GeoQueueParams p(0.3, 0.5, 4);
    SimConfig cfg{31415, 1, 1000, 0};
    const auto traj = simulate_geo_queue(p, 3000000, cfg);
    for (std::size_t y = 0; y + 1 < traj.sojourn_by_state.size(); ++y) {
        const auto& hist = traj.sojourn_by_state[y];
        double count = 0.0;
        for (auto c : hist) count += (double)c;
        if (count < 50000) continue;
        const auto nb = geo_sojourn_posterior(p, (long)y);
        double tv = 0.0;
        for (long t = 0; t < (long)hist.size() || t <= nb.support_end(); ++t) {
            const double emp = t < (long)hist.size() ? (double)hist[(std::size_t)t] / count : 0.0;
            tv += std::fabs(emp - nb.at(t));
        }
        CHECK(0.5 * tv < 0.02);
    }
}

TEST_CASE("arrivals finding the queue full estimate pi(K)") {
    const GeoQueueParams p(0.2, 0.5, 3);
    SimConfig cfg{999, 1, 2000, 0};
    const auto traj = simulate_geo_queue(p, 4000000, cfg);
    const double rate = (double)traj.arrivals_finding_full / (double)traj.arrivals;
    const double expected = geo_stationary(p).at(3);
    const double sigma = std::sqrt(expected * (1 - expected) / (double)traj.arrivals);
    CHECK(std::fabs(rate - expected) < 3.0 * sigma + 1e-6);
}

TEST_CASE("empirical blocking forecast matches the transient closed form") {
    const GeoQueueParams p(0.2, 0.5, 3);
    SimConfig cfg{58, 200000, 0, 0};
    for (long L : {0L, 1L, 10L}) {
        for (std::size_t x : {0u, 2u, 3u}) {
            const double emp = empirical_blocking_forecast(p, x, L, cfg);
            const double expected = geo_transient(p, (long)x, 3, L);
            const double sigma =
                std::sqrt(std::max(expected * (1 - expected), 1e-12) / (double)cfg.samples);
            CHECK(std::fabs(emp - expected) < 3.0 * sigma + 1e-9);
        }
    }
    // L=0 identities are exact.
    CHECK(empirical_blocking_forecast(p, 3, 0, cfg) == 1.0);
    CHECK(empirical_blocking_forecast(p, 1, 0, cfg) == 0.0);
}

TEST_CASE("per-slot records are capped and consistent") {
    const GeoQueueParams p(0.3, 0.5, 2);
    SimConfig cfg{5, 1, 0, 0};
    const auto traj = simulate_geo_queue(p, 10000, cfg, 128);
    CHECK(traj.slots.size() == 128);
    CHECK(traj.total_slots == 10000);
    for (const auto& slot : traj.slots) CHECK(slot.queue_length <= 2);
}

}  // TEST_SUITE
