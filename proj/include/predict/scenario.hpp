#pragma once

#include <json.hpp>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "predict/geo_queue.hpp"
#include "predict/montecarlo.hpp"
#include "predict/observable.hpp"
#include "predict/random_walk.hpp"
#include "predict/tandem.hpp"

namespace predict {

// Observed-state shorthand: an absolute state index or "k*chi" (k times the
// expected stationary queue length, rounded and clamped).
struct StateSpec {
    bool is_chi = false;
    double chi_multiple = 0.0;
    long absolute = 0;

    static StateSpec parse(const nlohmann::json& j);
    long resolve(double chi, long max_state) const;
    std::string describe() const;
};

struct QueueSpec {
    std::optional<double> alpha;
    std::optional<double> rho;
    double mu = 0.0;
    long capacity = 0;

    GeoQueueParams params() const;
    static QueueSpec parse(const nlohmann::json& j);
};

struct RandomWalkSpec {
    std::optional<std::string> preset;  // "vehicular" | "static"
    std::optional<double> stay_prob;
    long states = 15;

    RandomWalkParams params() const;
    static RandomWalkSpec parse(const nlohmann::json& j);
};

struct TandemSpec {
    std::vector<QueueSpec> hops;
    std::vector<bool> observed;
    std::vector<StateSpec> observed_states;

    static TandemSpec parse(const nlohmann::json& j);
};

struct LeadGrid {
    long from = 0;
    long to = 0;
    long step = 1;
    std::vector<long> explicit_values;

    std::vector<long> values() const;
    static LeadGrid parse(const nlohmann::json& j);
};

struct SimSpec {
    std::uint64_t seed = 1;
    std::uint64_t samples = 100000;
    std::uint64_t burn_in = 0;
};

struct HorizonSpec {
    double epsilon = 0.1;
    std::vector<double> rho_grid;
    std::vector<double> mu_grid;
    long capacity = 50;
    long l_max = 5000;
};

enum class ScenarioKind { curves, distributions, horizon_map };

// One experiment: a model, the observation spec, the lead-time grid and the
// requested output columns. Parsed from JSON (`run`) or built by presets.
struct Scenario {
    std::string id;
    ScenarioKind kind = ScenarioKind::curves;

    std::optional<QueueSpec> queue;
    std::optional<RandomWalkSpec> random_walk;
    std::optional<TandemSpec> tandem;
    std::optional<nlohmann::json> custom_model;

    std::vector<StateSpec> observed_states;
    LeadGrid leads;
    std::vector<double> epsilons;
    std::set<std::string> outputs{"exact"};
    std::optional<std::vector<std::size_t>> aggregation;
    long delay = 0;
    std::optional<SimSpec> sim;
    // Forecast series for distribution scenarios: (state, lead) pairs.
    std::vector<std::pair<StateSpec, long>> forecasts;
    std::optional<HorizonSpec> horizon;
};

Scenario scenario_from_json(const nlohmann::json& j);

// Table cell: empty (value undefined for that row), numeric, or text.
using Cell = std::variant<std::monostate, double, long, std::string>;

struct ResultTable {
    nlohmann::json metadata;  // single-line JSON header comment
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// Fixed 12-significant-digit formatting; identical runs produce identical
// bytes. The metadata carries an FNV-1a checksum over the raw bit patterns
// of every numeric cell.
std::string format_cell(const Cell& cell);
std::uint64_t table_checksum(const ResultTable& table);
void write_csv(const ResultTable& table, std::ostream& out);

// Executes the scenario. Per-row the two predictability routes are compared
// (1e-12) and queue series are spot-checked against the closed-form
// transient (1e-8); a disagreement throws NumericalValidationError.
ResultTable run_scenario(const Scenario& scenario, int threads = 1);

// Embedded read-only scenario families mirroring the experiment configs.
const std::vector<std::string>& preset_names();
// Runs a preset by name (some presets span several model instances).
ResultTable run_preset(const std::string& name, int threads = 1);

// Worst-case-over-x epsilon-predictable horizon per (rho, mu) grid point.
ResultTable horizon_map(const HorizonSpec& spec, int threads = 1);

}  // namespace predict
