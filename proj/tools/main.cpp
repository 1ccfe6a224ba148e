// Command-line front end: scenario runner, presets, chain analysis and
// ad-hoc predictability queries. Exit codes: 0 ok, 2 configuration error,
// 3 internal numerical-validation failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "predict/errors.hpp"
#include "predict/geo_queue.hpp"
#include "predict/montecarlo.hpp"
#include "predict/random_walk.hpp"
#include "predict/scenario.hpp"
#include "predict/serialize.hpp"
#include "predict/spectral.hpp"

namespace {

using nlohmann::json;
using namespace predict;

void emit(const ResultTable& table, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        write_csv(table, std::cout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + out_path + "'");
    write_csv(table, out);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse '" + path + "': " + std::string(e.what()));
    }
    return j;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> parts;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Predictability analysis of Markov-modulated performance processes"};
    app.require_subcommand(1);

    int threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--threads", threads, "worker threads for scenario rows")->capture_default_str();
    std::string out_path;
    auto add_out = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_path, "output CSV path (default stdout)");
    };
    long l_max = 300;

    // run <scenario.json>
    std::string scenario_path;
    auto* run_cmd = app.add_subcommand("run", "run a scenario file");
    run_cmd->add_option("scenario", scenario_path, "scenario JSON file")->required();
    add_out(run_cmd);

    // preset <name> | --list
    std::string preset_name;
    bool list_presets = false;
    auto* preset_cmd = app.add_subcommand("preset", "run an embedded preset");
    preset_cmd->add_option("name", preset_name, "preset name");
    preset_cmd->add_flag("--list", list_presets, "list preset names");
    add_out(preset_cmd);

    // chain analyze --in chain.json
    auto* chain_cmd = app.add_subcommand("chain", "Markov-chain utilities");
    std::string chain_path;
    auto* chain_analyze = chain_cmd->add_subcommand("analyze", "stationary + spectral report");
    chain_analyze->add_option("--in", chain_path, "chain JSON ({\"transition\": [[..]]})")
        ->required();
    add_out(chain_analyze);

    // queue predict
    auto* queue_cmd = app.add_subcommand("queue", "Geo/Geo/1/K queue analysis");
    auto* queue_predict = queue_cmd->add_subcommand("predict", "predictability curves");
    double q_alpha = 0, q_rho = 0, q_mu = 0;
    long q_capacity = 0, q_step = 1, q_delay = 0;
    std::string q_states = "3chi";
    std::vector<std::string> q_outputs{"exact"};
    queue_predict->add_option("--alpha", q_alpha, "arrival probability per slot");
    queue_predict->add_option("--rho", q_rho, "utilization (alpha = rho*mu)");
    queue_predict->add_option("--mu", q_mu, "service probability per slot")->required();
    queue_predict->add_option("--capacity", q_capacity, "buffer size K")->required();
    queue_predict->add_option("--states", q_states, "observed states, e.g. '0,8,3chi'")
        ->capture_default_str();
    queue_predict->add_option("--lmax", l_max, "largest lead time")->capture_default_str();
    queue_predict->add_option("--step", q_step, "lead-time step")->capture_default_str();
    queue_predict
        ->add_option("--outputs", q_outputs,
                     "columns: exact approx ub_spectral_full ub_spectral_gap ub_chain_tv ce "
                     "blocking montecarlo")
        ->capture_default_str();
    queue_predict->add_option("--delay", q_delay, "observation delay d")->capture_default_str();
    std::uint64_t q_seed = 1, q_samples = 100000, q_burn = 0;
    queue_predict->add_option("--seed", q_seed, "RNG seed for the montecarlo column")
        ->capture_default_str();
    queue_predict->add_option("--samples", q_samples, "samples per montecarlo cell")
        ->capture_default_str();
    queue_predict->add_option("--burn-in", q_burn, "montecarlo burn-in")->capture_default_str();
    add_out(queue_predict);

    // tandem predict
    auto* tandem_cmd = app.add_subcommand("tandem", "tandem queue analysis");
    auto* tandem_predict = tandem_cmd->add_subcommand("predict", "end-to-end predictability");
    double t_alpha = 0;
    std::string t_mu, t_capacity, t_observed, t_states;
    long t_step = 5;
    tandem_predict->add_option("--alpha", t_alpha, "shared arrival probability")->required();
    tandem_predict->add_option("--mu", t_mu, "per-hop service probabilities, e.g. '0.4,0.38,0.4'")
        ->required();
    tandem_predict->add_option("--capacity", t_capacity, "per-hop buffer sizes, e.g. '100,100,100'")
        ->required();
    tandem_predict->add_option("--observed", t_observed, "mask, e.g. '1,0,1'")->required();
    tandem_predict
        ->add_option("--states", t_states, "per-hop observed states, e.g. '10chi,0,10chi'")
        ->required();
    tandem_predict->add_option("--lmax", l_max, "largest lead time")->capture_default_str();
    tandem_predict->add_option("--step", t_step, "lead-time step")->capture_default_str();
    add_out(tandem_predict);

    // randomwalk predict
    auto* rw_cmd = app.add_subcommand("randomwalk", "CQI random-walk analysis");
    auto* rw_predict = rw_cmd->add_subcommand("predict", "throughput predictability");
    std::string rw_preset = "vehicular", rw_states = "1,3,15";
    double rw_stay = 0;
    long rw_step = 2;
    std::vector<std::string> rw_outputs{"exact", "ub_spectral_full", "ub_spectral_gap"};
    rw_predict->add_option("--preset", rw_preset, "vehicular (p=0.6) or static (p=0.9)")
        ->capture_default_str();
    rw_predict->add_option("--stay-prob", rw_stay, "override stay probability");
    rw_predict->add_option("--states", rw_states, "observed CQI levels")->capture_default_str();
    rw_predict->add_option("--lmax", l_max, "largest lead time")->capture_default_str();
    rw_predict->add_option("--step", rw_step, "lead-time step")->capture_default_str();
    rw_predict->add_option("--outputs", rw_outputs, "columns")->capture_default_str();
    add_out(rw_predict);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "slot-level Geo/Geo/1/K simulation");
    double s_alpha = 0, s_mu = 0;
    long s_capacity = 0;
    std::uint64_t s_slots = 1000000, s_burn = 0, seed = 1;
    std::size_t s_record = 0;
    sim_cmd->add_option("--alpha", s_alpha, "arrival probability")->required();
    sim_cmd->add_option("--mu", s_mu, "service probability")->required();
    sim_cmd->add_option("--capacity", s_capacity, "buffer size K")->required();
    sim_cmd->add_option("--slots", s_slots, "simulated slots")->capture_default_str();
    sim_cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
    sim_cmd->add_option("--burn-in", s_burn, "slots discarded before measuring")
        ->capture_default_str();
    sim_cmd->add_option("--record", s_record, "per-slot rows to export")->capture_default_str();
    add_out(sim_cmd);

    // horizon
    auto* horizon_cmd = app.add_subcommand("horizon", "epsilon-predictable horizon map");
    double h_epsilon = 0.1;
    std::string h_rhos = "0.5,0.6,0.7,0.8,0.9,0.95", h_mus = "0.3,0.4,0.5,0.6,0.7";
    long h_capacity = 50, h_lmax = 5000;
    horizon_cmd->add_option("--epsilon", h_epsilon, "threshold")->capture_default_str();
    horizon_cmd->add_option("--rho-grid", h_rhos, "utilization grid")->capture_default_str();
    horizon_cmd->add_option("--mu-grid", h_mus, "service-rate grid")->capture_default_str();
    horizon_cmd->add_option("--capacity", h_capacity, "buffer size K")->capture_default_str();
    horizon_cmd->add_option("--lmax", h_lmax, "scan limit")->capture_default_str();
    add_out(horizon_cmd);

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        const Scenario sc = scenario_from_json(load_json(scenario_path));
        emit(run_scenario(sc, threads), out_path);
        return 0;
    }
    if (preset_cmd->parsed()) {
        if (list_presets) {
            for (const auto& name : preset_names()) std::cout << name << "\n";
            return 0;
        }
        if (preset_name.empty()) throw ConfigError("preset needs a name or --list");
        emit(run_preset(preset_name, threads), out_path);
        return 0;
    }
    if (chain_analyze->parsed()) {
        const MarkovChain chain = chain_from_json(load_json(chain_path));
        ResultTable table;
        table.metadata["id"] = "chain_analyze";
        table.metadata["states"] = chain.states();
        table.metadata["reversible"] = chain.reversible();
        table.columns = {"j", "eigenvalue", "stationary"};
        if (chain.reversible()) {
            const SpectralDecomposition spec = spectral_decompose(chain);
            table.metadata["lambda_star"] = spec.lambda_star;
            table.metadata["spectral_gap"] = spec.spectral_gap;
            for (std::size_t j = 0; j < spec.states; ++j) {
                table.rows.push_back({Cell{static_cast<long>(j + 1)}, Cell{spec.eigenvalues[j]},
                                      Cell{chain.stationary()[j]}});
            }
        } else {
            for (std::size_t j = 0; j < chain.states(); ++j) {
                table.rows.push_back(
                    {Cell{static_cast<long>(j + 1)}, Cell{}, Cell{chain.stationary()[j]}});
            }
        }
        emit(table, out_path);
        return 0;
    }
    if (queue_predict->parsed()) {
        Scenario sc;
        sc.id = "queue";
        QueueSpec q;
        if (q_alpha > 0) q.alpha = q_alpha;
        if (q_rho > 0) q.rho = q_rho;
        q.mu = q_mu;
        q.capacity = q_capacity;
        q.params();
        sc.queue = q;
        for (const auto& s : split_list(q_states)) {
            sc.observed_states.push_back(StateSpec::parse(json(s)));
        }
        if (sc.observed_states.empty()) throw ConfigError("--states is empty");
        sc.leads.to = l_max;
        sc.leads.step = q_step;
        sc.outputs = std::set<std::string>(q_outputs.begin(), q_outputs.end());
        sc.delay = q_delay;
        sc.sim = SimSpec{q_seed, q_samples, q_burn};
        emit(run_scenario(sc, threads), out_path);
        return 0;
    }
    if (tandem_predict->parsed()) {
        Scenario sc;
        sc.id = "tandem";
        TandemSpec spec;
        const auto mus = split_list(t_mu);
        const auto caps = split_list(t_capacity);
        const auto mask = split_list(t_observed);
        const auto states = split_list(t_states);
        if (mus.size() != caps.size() || mus.size() != mask.size() || mus.size() != states.size()) {
            throw ConfigError("--mu, --capacity, --observed and --states need matching lengths");
        }
        for (std::size_t m = 0; m < mus.size(); ++m) {
            QueueSpec q;
            q.alpha = t_alpha;
            q.mu = std::stod(mus[m]);
            q.capacity = std::stol(caps[m]);
            q.params();
            spec.hops.push_back(q);
            spec.observed.push_back(mask[m] == "1" || mask[m] == "true");
            spec.observed_states.push_back(StateSpec::parse(json(states[m])));
        }
        sc.tandem = spec;
        sc.leads.to = l_max;
        sc.leads.step = t_step;
        sc.outputs = {"exact", "ub_tandem"};
        emit(run_scenario(sc, threads), out_path);
        return 0;
    }
    if (rw_predict->parsed()) {
        Scenario sc;
        sc.id = "randomwalk";
        RandomWalkSpec spec;
        if (rw_stay > 0) {
            spec.stay_prob = rw_stay;
        } else {
            spec.preset = rw_preset;
        }
        spec.params();
        sc.random_walk = spec;
        for (const auto& s : split_list(rw_states)) {
            sc.observed_states.push_back(StateSpec::parse(json(std::stol(s))));
        }
        sc.leads.to = l_max;
        sc.leads.step = rw_step;
        sc.outputs = std::set<std::string>(rw_outputs.begin(), rw_outputs.end());
        emit(run_scenario(sc, threads), out_path);
        return 0;
    }
    if (sim_cmd->parsed()) {
        const GeoQueueParams p(s_alpha, s_mu, s_capacity);
        SimConfig cfg{seed, 1, s_burn, 0};
        const QueueTrajectory traj = simulate_geo_queue(p, s_slots, cfg, s_record);
        ResultTable table;
        table.metadata["id"] = "simulate";
        table.metadata["alpha"] = p.alpha;
        table.metadata["mu"] = p.mu;
        table.metadata["capacity"] = p.capacity;
        table.metadata["slots"] = traj.total_slots;
        table.metadata["burn_in"] = s_burn;
        table.metadata["seed"] = seed;
        table.metadata["rng"] = CounterRng::kAlgorithm;
        table.metadata["arrivals"] = traj.arrivals;
        table.metadata["arrivals_finding_full"] = traj.arrivals_finding_full;
        table.metadata["dropped"] = traj.dropped;
        table.metadata["departures"] = traj.departures;
        if (s_record > 0) {
            // Per-slot trajectory; the aggregate counters stay in the header.
            table.columns = {"slot", "queue_length", "arrival", "blocked", "departure"};
            for (std::size_t i = 0; i < traj.slots.size(); ++i) {
                const auto& slot = traj.slots[i];
                table.rows.push_back({Cell{static_cast<long>(i)},
                                      Cell{static_cast<long>(slot.queue_length)},
                                      Cell{static_cast<long>(slot.arrival ? 1 : 0)},
                                      Cell{static_cast<long>(slot.blocked ? 1 : 0)},
                                      Cell{static_cast<long>(slot.departure ? 1 : 0)}});
            }
        } else {
            table.columns = {"state", "occupancy", "frequency"};
            for (std::size_t y = 0; y < traj.state_histogram.size(); ++y) {
                table.rows.push_back(
                    {Cell{static_cast<long>(y)}, Cell{static_cast<long>(traj.state_histogram[y])},
                     Cell{static_cast<double>(traj.state_histogram[y]) /
                          static_cast<double>(traj.total_slots)}});
            }
        }
        emit(table, out_path);
        return 0;
    }
    if (horizon_cmd->parsed()) {
        HorizonSpec spec;
        spec.epsilon = h_epsilon;
        for (const auto& r : split_list(h_rhos)) spec.rho_grid.push_back(std::stod(r));
        for (const auto& m : split_list(h_mus)) spec.mu_grid.push_back(std::stod(m));
        spec.capacity = h_capacity;
        spec.l_max = h_lmax;
        emit(horizon_map(spec, threads), out_path);
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalValidationError& e) {
        std::cerr << "numerical validation failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
