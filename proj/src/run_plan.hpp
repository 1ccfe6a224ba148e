#pragma once

// Internal execution plan behind run_scenario / run_preset. Presets build
// these directly (several model instances in one table); JSON scenarios are
// translated by plan_from_scenario.

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "predict/geo_queue.hpp"
#include "predict/observable.hpp"
#include "predict/random_walk.hpp"
#include "predict/scenario.hpp"

namespace predict::detail {

struct CurveSeries {
    std::string label;
    // Single-model series:
    std::shared_ptr<const ObservableModel> model;
    std::optional<GeoQueueParams> queue;  // set iff the model is the raw queue
    long state = 0;          // internal state index
    long display_state = 0;  // value reported in the state column
    long delay = 0;
    // Tandem series:
    std::shared_ptr<const std::vector<ObservableModel>> hops;
    std::vector<bool> mask;
    std::vector<std::size_t> hop_states;

    bool is_tandem() const { return hops != nullptr; }
};

struct DistSeries {
    std::string label;
    DiscretePmf pmf = DiscretePmf::point_mass(0);
};

struct RunPlan {
    std::string id;
    ScenarioKind kind = ScenarioKind::curves;
    std::vector<long> leads;
    std::set<std::string> outputs;
    std::vector<CurveSeries> curves;
    std::vector<DistSeries> distributions;
    SimSpec sim;
    std::vector<double> epsilons;
    nlohmann::json model_meta = nlohmann::json::array();
};

ResultTable run_plan(const RunPlan& plan, int threads);

nlohmann::json queue_meta(const std::string& label, const GeoQueueParams& p,
                          const ObservableModel& model);
nlohmann::json walk_meta(const std::string& label, const RandomWalkParams& p,
                         const ObservableModel& model);

}  // namespace predict::detail
