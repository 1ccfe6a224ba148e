#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "oracles.hpp"
#include "predict/errors.hpp"
#include "predict/montecarlo.hpp"
#include "predict/scenario.hpp"
#include "predict/serialize.hpp"

using namespace predict;
using nlohmann::json;

TEST_SUITE("scenario") {

TEST_CASE("state spec parsing") {
    CHECK(StateSpec::parse(json(7)).absolute == 7);
    CHECK(!StateSpec::parse(json(7)).is_chi);

    const auto three_chi = StateSpec::parse(json("3chi"));
    CHECK(three_chi.is_chi);
    CHECK(three_chi.chi_multiple == doctest::Approx(3.0));

    const auto mul = StateSpec::parse(json("2.5*chi"));
    CHECK(mul.chi_multiple == doctest::Approx(2.5));
    CHECK(StateSpec::parse(json("chi")).chi_multiple == doctest::Approx(1.0));

    CHECK_THROWS_AS(StateSpec::parse(json("3phi")), ConfigError);
    CHECK_THROWS_AS(StateSpec::parse(json("xchi")), ConfigError);
    CHECK_THROWS_AS(StateSpec::parse(json(1.5)), ConfigError);

    // Resolution rounds and clamps.
    CHECK(three_chi.resolve(2.4, 100) == 7);
    CHECK(three_chi.resolve(50.0, 100) == 100);
    CHECK_THROWS_AS(StateSpec::parse(json(12)).resolve(0.0, 8), ConfigError);
}

TEST_CASE("scenario JSON parsing and config errors") {
    const json good = {
        {"id", "demo"},
        {"model", {{"type", "queue"}, {"rho", 0.85}, {"mu", 0.5}, {"capacity", 8}}},
        {"observed_states", {0, "3chi"}},
        {"lead_times", {{"from", 0}, {"to", 10}, {"step", 2}}},
        {"outputs", {"exact", "ub_chain_tv"}},
    };
    const Scenario sc = scenario_from_json(good);
    CHECK(sc.queue.has_value());
    CHECK(sc.observed_states.size() == 2);
    CHECK(sc.leads.values() == std::vector<long>{0, 2, 4, 6, 8, 10});

    auto broken = good;
    broken["model"]["type"] = "teapot";
    CHECK_THROWS_AS(scenario_from_json(broken), ConfigError);

    broken = good;
    broken["outputs"] = {"nonsense"};
    CHECK_THROWS_AS(scenario_from_json(broken), ConfigError);

    broken = good;
    broken["model"] = {{"type", "queue"}, {"mu", 0.5}, {"capacity", 8}};
    CHECK_THROWS_AS(scenario_from_json(broken), ConfigError);  // neither alpha nor rho

    broken = good;
    broken.erase("lead_times");
    CHECK_THROWS_AS(scenario_from_json(broken), ConfigError);

    broken = good;
    broken["observed_states"] = {42};
    CHECK_THROWS_AS(run_scenario(scenario_from_json(broken)), ConfigError);

    // approx needs an unaggregated queue.
    broken = good;
    broken["outputs"] = {"approx"};
    broken["aggregation"] = std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3, 4};
    CHECK_THROWS_AS(run_scenario(scenario_from_json(broken)), ConfigError);
}

TEST_CASE("queue scenario columns and values") {
    json j = {
        {"id", "q"},
        {"model", {{"type", "queue"}, {"alpha", 0.2}, {"mu", 0.5}, {"capacity", 3}}},
        {"observed_states", {0, 3}},
        {"lead_times", {{"from", 0}, {"to", 4}, {"step", 1}}},
        {"outputs", {"exact", "blocking", "ub_chain_tv"}},
    };
    const ResultTable table = run_scenario(scenario_from_json(j));
    CHECK(table.columns ==
          std::vector<std::string>{"series", "state", "L", "exact", "ub_chain_tv", "blocking"});
    CHECK(table.rows.size() == 10);

    // Cross-check a blocking cell against the closed form.
    const GeoQueueParams p(0.2, 0.5, 3);
    bool found = false;
    for (const auto& row : table.rows) {
        if (std::get<long>(row[1]) == 0 && std::get<long>(row[2]) == 0) {
            CHECK(std::get<double>(row[5]) ==
                  doctest::Approx(geo_blocking_predictability(p, 0, 0)).epsilon(1e-12));
            found = true;
        }
    }
    CHECK(found);
    CHECK(table.metadata.contains("models"));
    CHECK(table.metadata["models"][0]["chi"].get<double>() ==
          doctest::Approx(p.chi()).epsilon(1e-12));
}

TEST_CASE("random-walk scenario reports 1-indexed CQI states") {
    json j = {
        {"id", "rw"},
        {"model", {{"type", "randomwalk"}, {"preset", "vehicular"}}},
        {"observed_states", {1, 15}},
        {"lead_times", {{"from", 0}, {"to", 2}, {"step", 1}}},
    };
    const ResultTable table = run_scenario(scenario_from_json(j));
    CHECK(std::get<long>(table.rows.front()[1]) == 1);
    CHECK(std::get<long>(table.rows.back()[1]) == 15);

    j["observed_states"] = {0};  // CQI levels start at 1
    CHECK_THROWS_AS(run_scenario(scenario_from_json(j)), ConfigError);
}

TEST_CASE("tandem scenario with chi shorthand") {
    json j = {
        {"id", "t"},
        {"model",
         {{"type", "tandem"},
          {"hops",
           {{{"alpha", 0.2}, {"mu", 0.5}, {"capacity", 4}},
            {{"alpha", 0.2}, {"mu", 0.6}, {"capacity", 4}}}},
          {"observed", {true, false}},
          {"observed_states", {"3chi", 0}}}},
        {"lead_times", {{"from", 0}, {"to", 6}, {"step", 3}}},
        {"outputs", {"exact", "ub_tandem"}},
    };
    const ResultTable table = run_scenario(scenario_from_json(j));
    CHECK(table.rows.size() == 3);
    for (const auto& row : table.rows) {
        const double exact = std::get<double>(row[3]);
        const double ub = std::get<double>(row[4]);
        CHECK(exact <= ub + 1e-9);
    }
    // CE is undefined for tandem models.
    j["outputs"] = {"exact", "ce"};
    CHECK_THROWS_AS(run_scenario(scenario_from_json(j)), ConfigError);
}

TEST_CASE("delay shifts the whole grid") {
    json base = {
        {"id", "d"},
        {"model", {{"type", "queue"}, {"alpha", 0.2}, {"mu", 0.5}, {"capacity", 4}}},
        {"observed_states", {2}},
        {"lead_times", {{"from", 0}, {"to", 4}, {"step", 1}}},
        {"outputs", {"exact"}},
    };
    const ResultTable plain = run_scenario(scenario_from_json(base));
    base["delay"] = 3;
    const ResultTable delayed = run_scenario(scenario_from_json(base));
    // delayed row at L equals the plain value at L+3.
    for (std::size_t i = 0; i + 3 < plain.rows.size(); ++i) {
        CHECK(std::get<double>(delayed.rows[i][3]) ==
              doctest::Approx(std::get<double>(plain.rows[i + 3][3])).epsilon(1e-15));
    }
}

TEST_CASE("montecarlo column is deterministic and close to exact") {
    json j = {
        {"id", "mc"},
        {"model", {{"type", "queue"}, {"alpha", 0.2}, {"mu", 0.5}, {"capacity", 3}}},
        {"observed_states", {3}},
        {"lead_times", {{"from", 1}, {"to", 3}, {"step", 1}}},
        {"outputs", {"exact", "montecarlo"}},
        {"sim", {{"seed", 5}, {"samples", 60000}}},
    };
    const ResultTable a = run_scenario(scenario_from_json(j));
    const ResultTable b = run_scenario(scenario_from_json(j));
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const double exact = std::get<double>(a.rows[i][3]);
        const double mc = std::get<double>(a.rows[i][4]);
        CHECK(mc == std::get<double>(b.rows[i][4]));  // determinism
        CHECK(std::fabs(mc - exact) < 0.02);
    }
    CHECK(a.metadata["rng"] == CounterRng::kAlgorithm);
}

TEST_CASE("epsilon horizons land in the metadata") {
    // The two-state point-mass example: D(L) = 0.2 * 0.5^L, horizon 2 at 0.05.
    json j = {
        {"id", "eps"},
        {"model",
         {{"type", "custom"},
          {"chain", {{"transition", {{0.9, 0.1}, {0.4, 0.6}}}}},
          {"posteriors",
           {{{"offset", 0}, {"mass", {1.0}}}, {{"offset", 1}, {"mass", {1.0}}}}}}},
        {"observed_states", {0}},
        {"lead_times", {{"from", 0}, {"to", 64}, {"step", 1}}},
        {"epsilons", {0.05}},
    };
    const ResultTable table = run_scenario(scenario_from_json(j));
    CHECK(table.metadata["epsilon_horizons"]["0.05"]["x=0"] == "2");
}

TEST_CASE("custom model scenarios run the generic pipeline") {
    json model = {{"type", "custom"},
                  {"chain", {{"transition", {{0.9, 0.1}, {0.4, 0.6}}}}},
                  {"posteriors",
                   {{{"offset", 0}, {"mass", {1.0}}}, {{"offset", 1}, {"mass", {1.0}}}}}};
    json j = {{"id", "custom"},
              {"model", model},
              {"observed_states", {0}},
              {"lead_times", {{"from", 0}, {"to", 1}, {"step", 1}}},
              {"outputs", {"exact", "ub_chain_tv"}}};
    const ResultTable table = run_scenario(scenario_from_json(j));
    CHECK(std::get<double>(table.rows[0][3]) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::get<double>(table.rows[1][3]) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("CSV output is stable and carries the checksum header") {
    json j = {
        {"id", "csv"},
        {"model", {{"type", "queue"}, {"alpha", 0.2}, {"mu", 0.5}, {"capacity", 3}}},
        {"observed_states", {1}},
        {"lead_times", {{"from", 0}, {"to", 5}, {"step", 1}}},
    };
    std::ostringstream a, b;
    write_csv(run_scenario(scenario_from_json(j)), a);
    write_csv(run_scenario(scenario_from_json(j)), b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("# {", 0) == 0);
    CHECK(a.str().find("checksum") != std::string::npos);
    CHECK(a.str().find("fnv1a:") != std::string::npos);
}

TEST_CASE("preset table is complete") {
    CHECK(preset_names().size() == 13);
    CHECK_THROWS_AS(run_preset("fig_unknown"), ConfigError);
}

TEST_CASE("horizon map flags unstable and impossible cells") {
    HorizonSpec spec;
    spec.epsilon = 0.1;
    spec.capacity = 10;
    spec.l_max = 500;
    spec.mu_grid = {0.4};
    spec.rho_grid = {0.8, 1.2, 3.0};  // the last gives alpha > 1
    const ResultTable table = horizon_map(spec, 1);
    REQUIRE(table.rows.size() == 3);
    CHECK(std::get<std::string>(table.rows[0][3]).empty());
    CHECK(std::get<std::string>(table.rows[1][3]) == "unstable");
    CHECK(std::get<std::string>(table.rows[2][3]) == "invalid");
}

TEST_CASE("model JSON round trip") {
    CounterRng rng(2025, 0);
    const ObservableModel model = oracle::random_model(rng, 4);
    const ObservableModel back = model_from_json(to_json(model));
    CHECK(back.states() == model.states());
    for (std::size_t x = 0; x < 4; ++x) {
        for (std::size_t y = 0; y < 4; ++y) {
            CHECK(back.chain().p(x, y) == doctest::Approx(model.chain().p(x, y)).epsilon(1e-14));
        }
        CHECK(tv_distance(back.posterior(x), model.posterior(x)) < 1e-14);
    }
    CHECK_THROWS_AS(pmf_from_json(json{{"mass", {0.5, 0.5}}}), ConfigError);
    CHECK_THROWS_AS(chain_from_json(json::object()), ConfigError);
}

}  // TEST_SUITE
