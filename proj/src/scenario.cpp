#include "predict/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "predict/bounds.hpp"
#include "predict/errors.hpp"
#include "predict/kernels.hpp"
#include "predict/serialize.hpp"
#include "predict/spectral.hpp"
#include "run_plan.hpp"

namespace predict {

using detail::CurveSeries;
using detail::RunPlan;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Parsing

StateSpec StateSpec::parse(const json& j) {
    StateSpec s;
    if (j.is_number_integer()) {
        s.absolute = j.get<long>();
        return s;
    }
    if (j.is_string()) {
        std::string text = j.get<std::string>();
        const auto chi_pos = text.find("chi");
        if (chi_pos == std::string::npos || chi_pos + 3 != text.size()) {
            throw ConfigError("state spec '" + text + "' is neither an integer nor 'k*chi'");
        }
        std::string head = text.substr(0, chi_pos);
        if (!head.empty() && head.back() == '*') head.pop_back();
        s.is_chi = true;
        if (head.empty()) {
            s.chi_multiple = 1.0;
            return s;
        }
        try {
            std::size_t used = 0;
            s.chi_multiple = std::stod(head, &used);
            if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse chi multiple in state spec '" + text + "'");
        }
        return s;
    }
    throw ConfigError("state spec must be an integer or a 'k*chi' string");
}

long StateSpec::resolve(double chi, long max_state) const {
    long v = is_chi ? std::lround(chi_multiple * chi) : absolute;
    if (!is_chi && (v < 0 || v > max_state)) {
        throw ConfigError("observed state " + std::to_string(v) + " outside [0, " +
                          std::to_string(max_state) + "]");
    }
    return std::clamp(v, 0L, max_state);
}

std::string StateSpec::describe() const {
    if (!is_chi) return std::to_string(absolute);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%gchi", chi_multiple);
    return buf;
}

GeoQueueParams QueueSpec::params() const {
    if (alpha.has_value() == rho.has_value()) {
        throw ConfigError("queue spec needs exactly one of alpha or rho");
    }
    if (alpha) return GeoQueueParams(*alpha, mu, capacity);
    return GeoQueueParams::from_rho(*rho, mu, capacity);
}

QueueSpec QueueSpec::parse(const json& j) {
    QueueSpec q;
    if (j.contains("alpha")) q.alpha = j.at("alpha").get<double>();
    if (j.contains("rho")) q.rho = j.at("rho").get<double>();
    if (!j.contains("mu") || !j.contains("capacity")) {
        throw ConfigError("queue spec needs mu and capacity");
    }
    q.mu = j.at("mu").get<double>();
    q.capacity = j.at("capacity").get<long>();
    try {
        q.params();
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("queue spec: ") + e.what());
    }
    return q;
}

RandomWalkParams RandomWalkSpec::params() const {
    RandomWalkParams p;
    if (preset) {
        if (*preset == "vehicular") {
            p = RandomWalkParams::vehicular();
        } else if (*preset == "static") {
            p = RandomWalkParams::static_connection();
        } else {
            throw ConfigError("unknown random-walk preset '" + *preset + "'");
        }
    }
    if (stay_prob) p.stay_prob = *stay_prob;
    p.states = states;
    p.validate();
    return p;
}

RandomWalkSpec RandomWalkSpec::parse(const json& j) {
    RandomWalkSpec s;
    if (j.contains("preset")) s.preset = j.at("preset").get<std::string>();
    if (j.contains("stay_prob")) s.stay_prob = j.at("stay_prob").get<double>();
    if (j.contains("states")) s.states = j.at("states").get<long>();
    if (!s.preset && !s.stay_prob) throw ConfigError("random-walk spec needs preset or stay_prob");
    try {
        s.params();
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("random-walk spec: ") + e.what());
    }
    return s;
}

TandemSpec TandemSpec::parse(const json& j) {
    TandemSpec t;
    if (!j.contains("hops") || !j.at("hops").is_array() || j.at("hops").empty()) {
        throw ConfigError("tandem spec needs a non-empty hops array");
    }
    for (const auto& h : j.at("hops")) t.hops.push_back(QueueSpec::parse(h));
    if (j.contains("observed")) {
        t.observed = j.at("observed").get<std::vector<bool>>();
    } else {
        t.observed.assign(t.hops.size(), true);
    }
    if (t.observed.size() != t.hops.size()) {
        throw ConfigError("tandem observed mask length must match hop count");
    }
    if (j.contains("observed_states")) {
        for (const auto& s : j.at("observed_states")) {
            t.observed_states.push_back(StateSpec::parse(s));
        }
    }
    if (t.observed_states.size() != t.hops.size()) {
        throw ConfigError("tandem needs one observed_states entry per hop");
    }
    return t;
}

std::vector<long> LeadGrid::values() const {
    if (!explicit_values.empty()) {
        std::vector<long> v = explicit_values;
        if (!std::is_sorted(v.begin(), v.end()) || v.front() < 0) {
            throw ConfigError("lead times must be ascending and non-negative");
        }
        return v;
    }
    if (to < from || from < 0 || step < 1) throw ConfigError("invalid lead-time grid");
    std::vector<long> v;
    for (long l = from; l <= to; l += step) v.push_back(l);
    return v;
}

LeadGrid LeadGrid::parse(const json& j) {
    LeadGrid g;
    if (j.is_array()) {
        g.explicit_values = j.get<std::vector<long>>();
    } else if (j.is_object()) {
        g.from = j.value("from", 0L);
        g.to = j.at("to").get<long>();
        g.step = j.value("step", 1L);
    } else {
        throw ConfigError("lead_times must be an array or {from,to,step}");
    }
    g.values();  // validate
    return g;
}

namespace {

const std::set<std::string> kKnownOutputs{
    "exact",       "approx",   "ub_spectral_full", "ub_spectral_gap", "ub_chain_tv",
    "r_statistic", "ce",       "blocking",         "montecarlo",      "ub_tandem"};

ScenarioKind kind_from_string(const std::string& s) {
    if (s == "curves") return ScenarioKind::curves;
    if (s == "distributions") return ScenarioKind::distributions;
    if (s == "horizon_map") return ScenarioKind::horizon_map;
    throw ConfigError("unknown scenario kind '" + s + "'");
}

HorizonSpec horizon_from_json(const json& j) {
    HorizonSpec h;
    h.epsilon = j.value("epsilon", 0.1);
    if (!j.contains("rho_grid") || !j.contains("mu_grid")) {
        throw ConfigError("horizon spec needs rho_grid and mu_grid");
    }
    h.rho_grid = j.at("rho_grid").get<std::vector<double>>();
    h.mu_grid = j.at("mu_grid").get<std::vector<double>>();
    h.capacity = j.value("capacity", 50L);
    h.l_max = j.value("l_max", 5000L);
    if (h.rho_grid.empty() || h.mu_grid.empty()) {
        throw ConfigError("horizon grids must be non-empty");
    }
    if (!(h.epsilon > 0.0) || !(h.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0,1)");
    return h;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
    Scenario s;
    s.id = j.value("id", std::string("scenario"));
    s.kind = kind_from_string(j.value("kind", std::string("curves")));

    if (s.kind == ScenarioKind::horizon_map) {
        if (!j.contains("horizon")) throw ConfigError("horizon_map scenario needs a horizon block");
        s.horizon = horizon_from_json(j.at("horizon"));
        return s;
    }

    if (!j.contains("model")) throw ConfigError("scenario needs a model");
    const json& m = j.at("model");
    const std::string type = m.value("type", std::string());
    if (type == "queue") {
        s.queue = QueueSpec::parse(m);
    } else if (type == "randomwalk") {
        s.random_walk = RandomWalkSpec::parse(m);
    } else if (type == "tandem") {
        s.tandem = TandemSpec::parse(m);
    } else if (type == "custom") {
        s.custom_model = m;
    } else {
        throw ConfigError("model type must be queue, randomwalk, tandem or custom");
    }

    if (j.contains("observed_states")) {
        for (const auto& st : j.at("observed_states")) {
            s.observed_states.push_back(StateSpec::parse(st));
        }
    }
    if (s.kind == ScenarioKind::curves && !s.tandem && s.observed_states.empty()) {
        throw ConfigError("curves scenario needs observed_states");
    }
    if (s.kind == ScenarioKind::curves) {
        if (!j.contains("lead_times")) throw ConfigError("curves scenario needs lead_times");
        s.leads = LeadGrid::parse(j.at("lead_times"));
    }
    if (j.contains("epsilons")) s.epsilons = j.at("epsilons").get<std::vector<double>>();
    if (j.contains("outputs")) {
        s.outputs.clear();
        for (const auto& o : j.at("outputs")) {
            const std::string name = o.get<std::string>();
            if (!kKnownOutputs.count(name)) throw ConfigError("unknown output '" + name + "'");
            s.outputs.insert(name);
        }
        if (s.outputs.empty()) throw ConfigError("outputs list is empty");
    }
    if (j.contains("aggregation")) {
        s.aggregation = j.at("aggregation").get<std::vector<std::size_t>>();
    }
    s.delay = j.value("delay", 0L);
    if (s.delay < 0) throw ConfigError("delay must be >= 0");
    if (j.contains("sim")) {
        SimSpec sim;
        sim.seed = j.at("sim").value("seed", std::uint64_t{1});
        sim.samples = j.at("sim").value("samples", std::uint64_t{100000});
        sim.burn_in = j.at("sim").value("burn_in", std::uint64_t{0});
        s.sim = sim;
    }
    if (j.contains("forecasts")) {
        for (const auto& f : j.at("forecasts")) {
            s.forecasts.emplace_back(StateSpec::parse(f.at("state")), f.at("lead").get<long>());
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Formatting

std::string format_cell(const Cell& cell) {
    if (std::holds_alternative<std::monostate>(cell)) return "";
    if (std::holds_alternative<long>(cell)) return std::to_string(std::get<long>(cell));
    if (std::holds_alternative<std::string>(cell)) return std::get<std::string>(cell);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", std::get<double>(cell));
    return buf;
}

std::uint64_t table_checksum(const ResultTable& table) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_bytes = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& row : table.rows) {
        for (const auto& cell : row) {
            if (const double* d = std::get_if<double>(&cell)) {
                mix_bytes(d, sizeof(*d));
            } else if (const long* l = std::get_if<long>(&cell)) {
                mix_bytes(l, sizeof(*l));
            } else if (const std::string* s = std::get_if<std::string>(&cell)) {
                mix_bytes(s->data(), s->size());
            } else {
                const unsigned char zero = 0;
                mix_bytes(&zero, 1);
            }
        }
    }
    return h;
}

void write_csv(const ResultTable& table, std::ostream& out) {
    json meta = table.metadata;
    char checksum[32];
    std::snprintf(checksum, sizeof(checksum), "fnv1a:%016llx",
                  static_cast<unsigned long long>(table_checksum(table)));
    meta["checksum"] = checksum;
    out << "# " << meta.dump() << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << table.columns[c] << (c + 1 < table.columns.size() ? "," : "");
    }
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << format_cell(row[c]) << (c + 1 < row.size() ? "," : "");
        }
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Plan execution

namespace {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

const std::vector<std::string> kColumnOrder{
    "exact", "approx",   "ub_spectral_full", "ub_spectral_gap", "ub_chain_tv",
    "r_statistic", "ce", "blocking",         "mc_exact",        "ub_tandem"};

bool column_wanted(const std::set<std::string>& outputs, const std::string& col) {
    if (col == "mc_exact") return outputs.count("montecarlo") != 0;
    if (col == "r_statistic") {
        // Reported alongside the spectral bounds it scales.
        return outputs.count("r_statistic") || outputs.count("ub_spectral_full") ||
               outputs.count("ub_spectral_gap");
    }
    return outputs.count(col) != 0;
}

struct ModelAnalysis {
    std::shared_ptr<const SpectralDecomposition> spec;
    double r_stat = 0.0;
    double ub_factor = 0.0;  // sqrt(2) sqrt(R - 1)
};

struct PlanContext {
    std::unordered_map<const ObservableModel*, ModelAnalysis> analysis;
    std::unordered_map<const std::vector<ObservableModel>*, DiscretePmf> tandem_marginals;
};

constexpr double kDualRouteTolerance = 1e-12;
constexpr double kClosedFormTolerance = 1e-8;

void validate_dual_route(const ObservableModel& model, const double* weights, double exact,
                         const std::string& label, long L) {
    const double theorem = model.predictability_theorem_from_weights(weights);
    if (std::fabs(theorem - exact) > kDualRouteTolerance) {
        throw NumericalValidationError("dual predictability routes disagree at series '" + label +
                                       "', L=" + std::to_string(L));
    }
}

void validate_closed_form(const GeoQueueParams& queue, const double* weights, long x, long L,
                          const std::string& label) {
    for (long y : {0L, x, queue.capacity}) {
        const double closed = geo_transient(queue, x, y, L);
        const double matrix = weights[static_cast<std::size_t>(y)];
        if (std::fabs(closed - matrix) > kClosedFormTolerance) {
            throw NumericalValidationError(
                "closed-form transient disagrees with matrix power at series '" + label +
                "', L=" + std::to_string(L) + ", y=" + std::to_string(y));
        }
    }
}

std::vector<std::vector<Cell>> eval_single_series(const CurveSeries& s, const RunPlan& plan,
                                                  const PlanContext& ctx,
                                                  std::size_t series_index) {
    const ObservableModel& model = *s.model;
    const ModelAnalysis* analysis = nullptr;
    if (auto it = ctx.analysis.find(&model); it != ctx.analysis.end()) analysis = &it->second;

    const std::size_t check_every = std::max<std::size_t>(1, plan.leads.size() / 5);
    TransientScan scan(model.chain(), static_cast<std::size_t>(s.state));

    std::vector<std::vector<Cell>> rows;
    rows.reserve(plan.leads.size());
    for (std::size_t li = 0; li < plan.leads.size(); ++li) {
        const long L = plan.leads[li];
        const long lead = L + s.delay;
        scan.advance_to(lead);
        const double* w = scan.weights().data();

        const double exact = model.predictability_from_weights(w);
        validate_dual_route(model, w, exact, s.label, lead);
        if (s.queue && li % check_every == 0) validate_closed_form(*s.queue, w, s.state, lead, s.label);

        std::vector<Cell> row{Cell{s.label}, Cell{s.display_state}, Cell{L}};
        for (const std::string& col : kColumnOrder) {
            if (!column_wanted(plan.outputs, col)) continue;
            if (col == "exact") {
                row.emplace_back(exact);
            } else if (col == "approx") {
                // The large-K approximation applies to the raw queue only.
                if (s.queue) {
                    row.emplace_back(geo_predictability_approx(*s.queue, s.state, lead));
                } else {
                    row.emplace_back();
                }
            } else if (col == "ub_spectral_full") {
                row.emplace_back(
                    mixing_tv_bound_full(*analysis->spec, static_cast<std::size_t>(s.state), lead) *
                    analysis->ub_factor);
            } else if (col == "ub_spectral_gap") {
                row.emplace_back(
                    mixing_tv_bound_gap(*analysis->spec, static_cast<std::size_t>(s.state), lead) *
                    analysis->ub_factor);
            } else if (col == "ub_chain_tv") {
                row.emplace_back(predictability_ub_chain_tv_from_weights(model, w));
            } else if (col == "r_statistic") {
                if (analysis) {
                    row.emplace_back(analysis->r_stat);
                } else {
                    row.emplace_back(r_statistic(model));
                }
            } else if (col == "ce") {
                try {
                    if (s.queue) {
                        row.emplace_back(geo_ce_predictability_from_weights(*s.queue, model, w));
                    } else {
                        row.emplace_back(cross_entropy_divergence(model.marginal(), model.mixture(w)));
                    }
                } catch (const AbsoluteContinuityViolation&) {
                    row.emplace_back();  // undefined at this lead time
                }
            } else if (col == "blocking") {
                if (!s.queue) {
                    row.emplace_back();
                    continue;
                }
                const double blocking = geo_blocking_predictability(*s.queue, s.state, lead);
                const double via_matrix = std::fabs(
                    w[static_cast<std::size_t>(s.queue->capacity)] -
                    model.chain().stationary()[static_cast<std::size_t>(s.queue->capacity)]);
                if (std::fabs(blocking - via_matrix) > kClosedFormTolerance) {
                    throw NumericalValidationError(
                        "blocking closed form disagrees with matrix power at L=" +
                        std::to_string(lead));
                }
                row.emplace_back(blocking);
            } else if (col == "mc_exact") {
                SimConfig cfg{plan.sim.seed, plan.sim.samples, plan.sim.burn_in,
                              series_index * 4096 + li};
                const auto emp =
                    sample_forecast_empirical(model, static_cast<std::size_t>(s.state), lead, cfg);
                row.emplace_back(tv_distance(emp.pmf, model.marginal()));
            } else if (col == "ub_tandem") {
                row.emplace_back();  // single-model series carry no tandem bound
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::vector<Cell>> eval_tandem_series(const CurveSeries& s, const RunPlan& plan,
                                                  const PlanContext& ctx) {
    const auto& hops = *s.hops;
    const DiscretePmf& marginal = ctx.tandem_marginals.at(s.hops.get());

    std::vector<std::unique_ptr<TransientScan>> scans(hops.size());
    for (std::size_t m = 0; m < hops.size(); ++m) {
        if (s.mask[m]) scans[m] = std::make_unique<TransientScan>(hops[m].chain(), s.hop_states[m]);
    }

    std::vector<std::vector<Cell>> rows;
    rows.reserve(plan.leads.size());
    for (const long L : plan.leads) {
        const long lead = L + s.delay;
        std::optional<DiscretePmf> forecast;
        double ub = 0.0;
        for (std::size_t m = 0; m < hops.size(); ++m) {
            const DiscretePmf* part = &hops[m].marginal();
            std::optional<DiscretePmf> own;
            if (s.mask[m]) {
                scans[m]->advance_to(lead);
                const double* w = scans[m]->weights().data();
                own = hops[m].mixture(w);
                part = &*own;
                const double hop_exact = hops[m].predictability_from_weights(w);
                validate_dual_route(hops[m], w, hop_exact, s.label, lead);
                ub += hop_exact;
            }
            forecast = forecast ? convolve_trimmed(*forecast, *part) : *part;
        }
        const double exact = tv_distance(*forecast, marginal);

        std::vector<Cell> row{Cell{s.label}, Cell{}, Cell{L}};
        for (const std::string& col : kColumnOrder) {
            if (!column_wanted(plan.outputs, col)) continue;
            if (col == "exact") {
                row.emplace_back(exact);
            } else if (col == "ub_tandem") {
                row.emplace_back(std::min(1.0, ub));
            } else {
                row.emplace_back();
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

namespace detail {

json queue_meta(const std::string& label, const GeoQueueParams& p, const ObservableModel& model) {
    json m;
    m["label"] = label;
    m["type"] = "queue";
    m["alpha"] = p.alpha;
    m["mu"] = p.mu;
    m["capacity"] = p.capacity;
    m["rho"] = p.rho();
    m["beta"] = p.beta();
    m["chi"] = p.chi();
    long max_trunc = 0;
    for (const auto& r : model.posteriors()) {
        if (r.truncation_point) max_trunc = std::max(max_trunc, *r.truncation_point);
    }
    m["truncation_point"] = max_trunc;
    return m;
}

json walk_meta(const std::string& label, const RandomWalkParams& p, const ObservableModel& model) {
    json m;
    m["label"] = label;
    m["type"] = "randomwalk";
    m["stay_prob"] = p.stay_prob;
    m["states"] = p.states;
    m["nb_r"] = {p.nb_r_slope, p.nb_r_intercept};
    m["nb_q"] = {p.nb_q_slope, p.nb_q_intercept};
    long max_trunc = 0;
    for (const auto& r : model.posteriors()) {
        if (r.truncation_point) max_trunc = std::max(max_trunc, *r.truncation_point);
    }
    m["truncation_point"] = max_trunc;
    return m;
}

ResultTable run_plan(const RunPlan& plan, int threads) {
    ResultTable table;
    table.metadata["id"] = plan.id;
    table.metadata["kernel_lane"] = kernels::ops().name;
    table.metadata["models"] = plan.model_meta;

    if (plan.kind == ScenarioKind::distributions) {
        table.metadata["kind"] = "distributions";
        table.columns = {"series", "z", "probability"};
        for (const auto& series : plan.distributions) {
            for (std::size_t i = 0; i < series.pmf.size(); ++i) {
                table.rows.push_back({Cell{series.label},
                                      Cell{series.pmf.offset() + static_cast<long>(i)},
                                      Cell{series.pmf.mass()[i]}});
            }
        }
        return table;
    }

    table.metadata["kind"] = "curves";
    table.metadata["lead_times"] = plan.leads;
    table.metadata["delay"] = plan.curves.empty() ? 0 : plan.curves.front().delay;
    {
        json outs = json::array();
        for (const auto& o : plan.outputs) outs.push_back(o);
        table.metadata["outputs"] = outs;
    }
    if (plan.outputs.count("montecarlo")) {
        table.metadata["rng"] = CounterRng::kAlgorithm;
        table.metadata["samples"] = plan.sim.samples;
        table.metadata["seed"] = plan.sim.seed;
    }

    table.columns = {"series", "state", "L"};
    for (const std::string& col : kColumnOrder) {
        if (column_wanted(plan.outputs, col)) table.columns.push_back(col);
    }

    // Shared per-model analysis, built sequentially before the parallel map.
    PlanContext ctx;
    const bool needs_spectral =
        plan.outputs.count("ub_spectral_full") || plan.outputs.count("ub_spectral_gap");
    const bool needs_r = needs_spectral || plan.outputs.count("r_statistic");
    for (const auto& s : plan.curves) {
        if (s.is_tandem()) {
            if (!ctx.tandem_marginals.count(s.hops.get())) {
                TandemSystem sys{*s.hops, s.mask, s.hop_states};
                ctx.tandem_marginals.emplace(s.hops.get(), tandem_marginal(sys));
            }
        } else if (needs_r && !ctx.analysis.count(s.model.get())) {
            ModelAnalysis a;
            // R alone does not need reversibility; the spectral bounds do.
            if (needs_spectral) {
                a.spec =
                    std::make_shared<SpectralDecomposition>(spectral_decompose(s.model->chain()));
            }
            a.r_stat = r_statistic(*s.model);
            a.ub_factor = std::sqrt(2.0) * std::sqrt(std::max(0.0, a.r_stat - 1.0));
            ctx.analysis.emplace(s.model.get(), std::move(a));
        }
    }

    std::vector<std::vector<std::vector<Cell>>> per_series(plan.curves.size());
    parallel_for(plan.curves.size(), threads, [&](std::size_t i) {
        const auto& s = plan.curves[i];
        per_series[i] =
            s.is_tandem() ? eval_tandem_series(s, plan, ctx) : eval_single_series(s, plan, ctx, i);
    });
    for (auto& rows : per_series) {
        for (auto& row : rows) table.rows.push_back(std::move(row));
    }

    // Optional epsilon horizons, reported in the metadata.
    if (!plan.epsilons.empty()) {
        json horizons = json::object();
        const long l_max = plan.leads.empty() ? 1 : std::max(1L, plan.leads.back());
        for (const double eps : plan.epsilons) {
            json per_eps = json::object();
            for (const auto& s : plan.curves) {
                if (s.is_tandem()) continue;
                std::string value;
                try {
                    const auto h =
                        s.model->epsilon_horizon(static_cast<std::size_t>(s.state), eps, l_max);
                    value = h ? std::to_string(*h) : "none";
                } catch (const HorizonExceedsScan&) {
                    value = ">lmax";
                }
                per_eps[s.label] = value;
            }
            char key[32];
            std::snprintf(key, sizeof(key), "%g", eps);
            horizons[key] = per_eps;
        }
        table.metadata["epsilon_horizons"] = horizons;
    }
    return table;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario -> plan

namespace {

RunPlan plan_from_scenario(const Scenario& sc) {
    RunPlan plan;
    plan.id = sc.id;
    plan.kind = sc.kind;
    plan.outputs = sc.outputs;
    plan.epsilons = sc.epsilons;
    if (sc.sim) plan.sim = *sc.sim;
    if (sc.kind == ScenarioKind::curves) plan.leads = sc.leads.values();

    for (const auto& out : sc.outputs) {
        if (!kKnownOutputs.count(out)) throw ConfigError("unknown output '" + out + "'");
    }

    if (sc.tandem) {
        if (sc.kind != ScenarioKind::curves) throw ConfigError("tandem models only support curves");
        for (const auto& out : sc.outputs) {
            if (out != "exact" && out != "ub_tandem") {
                throw ConfigError("output '" + out + "' is not available for tandem models");
            }
        }
        auto hops = std::make_shared<std::vector<ObservableModel>>();
        std::vector<std::size_t> states;
        std::string mask_desc;
        json hop_meta = json::array();
        for (std::size_t m = 0; m < sc.tandem->hops.size(); ++m) {
            const GeoQueueParams p = sc.tandem->hops[m].params();
            hops->push_back(geo_observable_model(p));
            const long x = sc.tandem->observed_states[m].resolve(p.chi(), p.capacity);
            states.push_back(static_cast<std::size_t>(x));
            mask_desc += sc.tandem->observed[m] ? '1' : '0';
            json hm = detail::queue_meta("hop" + std::to_string(m + 1), p, hops->back());
            hm["observed"] = static_cast<bool>(sc.tandem->observed[m]);
            hm["observed_state"] = x;
            hop_meta.push_back(std::move(hm));
        }
        CurveSeries s;
        s.label = "obs=" + mask_desc;
        s.hops = hops;
        s.mask.assign(sc.tandem->observed.begin(), sc.tandem->observed.end());
        s.hop_states = std::move(states);
        s.delay = sc.delay;
        plan.curves.push_back(std::move(s));
        plan.model_meta = hop_meta;
        return plan;
    }

    // Single-model scenarios.
    std::shared_ptr<const ObservableModel> model;
    std::optional<GeoQueueParams> queue;
    double chi = 0.0;
    long display_min = 0;  // random-walk states are 1-indexed in all I/O
    long display_max = 0;

    if (sc.queue) {
        const GeoQueueParams p = sc.queue->params();
        queue = p;
        model = std::make_shared<ObservableModel>(geo_observable_model(p));
        chi = p.chi();
        display_max = p.capacity;
        plan.model_meta.push_back(detail::queue_meta("model", p, *model));
    } else if (sc.random_walk) {
        const RandomWalkParams p = sc.random_walk->params();
        model = std::make_shared<ObservableModel>(cqi_observable_model(p));
        display_min = 1;
        display_max = p.states;
        plan.model_meta.push_back(detail::walk_meta("model", p, *model));
    } else if (sc.custom_model) {
        model = std::make_shared<ObservableModel>(model_from_json(*sc.custom_model));
        display_max = static_cast<long>(model->states()) - 1;
        json m;
        m["label"] = "model";
        m["type"] = "custom";
        m["states"] = model->states();
        plan.model_meta.push_back(std::move(m));
    } else {
        throw ConfigError("scenario needs a model");
    }

    auto resolve_internal = [&](const StateSpec& spec) {
        const long display = spec.resolve(chi, display_max);
        const long internal = display - display_min;
        if (internal < 0 || internal >= static_cast<long>(model->states())) {
            throw ConfigError("observed state " + std::to_string(display) + " out of range");
        }
        return std::pair<long, long>{internal, display};
    };

    if (sc.outputs.count("approx") || sc.outputs.count("blocking")) {
        if (!queue || sc.aggregation) {
            throw ConfigError("approx/blocking need an unaggregated queue model");
        }
    }
    if (sc.outputs.count("ub_tandem")) throw ConfigError("ub_tandem needs a tandem model");

    if (sc.kind == ScenarioKind::distributions) {
        for (const auto& spec : sc.observed_states) {
            const auto [internal, display] = resolve_internal(spec);
            plan.distributions.push_back({"posterior x=" + std::to_string(display),
                                          model->posterior(static_cast<std::size_t>(internal))});
        }
        plan.distributions.push_back({"marginal", model->marginal()});
        for (const auto& [spec, lead] : sc.forecasts) {
            const auto [internal, display] = resolve_internal(spec);
            plan.distributions.push_back(
                {"forecast x=" + std::to_string(display) + " L=" + std::to_string(lead),
                 model->forecast(static_cast<std::size_t>(internal), lead)});
        }
        return plan;
    }

    if (sc.aggregation) {
        AggregationMap map{*sc.aggregation};
        if (map.map.size() != model->states()) {
            throw ConfigError("aggregation map length must equal the state count");
        }
        auto coarse = std::make_shared<ObservableModel>(aggregate(*model, map));
        plan.model_meta.back()["aggregation_contiguous"] = map.contiguous();
        plan.model_meta.back()["aggregated_states"] = coarse->states();
        for (const auto& spec : sc.observed_states) {
            const auto [fine_internal, display] = resolve_internal(spec);
            const long coarse_state = static_cast<long>(map.map[static_cast<std::size_t>(fine_internal)]);
            CurveSeries s;
            s.label = "x=" + std::to_string(display) + " agg";
            s.model = coarse;
            s.state = coarse_state;
            s.display_state = coarse_state;
            s.delay = sc.delay;
            plan.curves.push_back(std::move(s));
        }
        return plan;
    }

    for (const auto& spec : sc.observed_states) {
        const auto [internal, display] = resolve_internal(spec);
        CurveSeries s;
        s.label = "x=" + std::to_string(display);
        s.model = model;
        s.queue = queue;
        s.state = internal;
        s.display_state = display;
        s.delay = sc.delay;
        plan.curves.push_back(std::move(s));
    }
    return plan;
}

}  // namespace

ResultTable run_scenario(const Scenario& scenario, int threads) {
    if (scenario.kind == ScenarioKind::horizon_map) {
        if (!scenario.horizon) throw ConfigError("horizon_map scenario needs a horizon block");
        ResultTable table = horizon_map(*scenario.horizon, threads);
        table.metadata["id"] = scenario.id;
        return table;
    }
    return detail::run_plan(plan_from_scenario(scenario), threads);
}

// ---------------------------------------------------------------------------
// Horizon map

ResultTable horizon_map(const HorizonSpec& spec, int threads) {
    ResultTable table;
    table.metadata["id"] = "horizon_map";
    table.metadata["kind"] = "horizon_map";
    table.metadata["epsilon"] = spec.epsilon;
    table.metadata["capacity"] = spec.capacity;
    table.metadata["l_max"] = spec.l_max;
    table.metadata["kernel_lane"] = kernels::ops().name;
    table.columns = {"rho", "mu", "horizon", "note"};

    struct CellResult {
        std::optional<long> horizon;
        std::string note;
    };
    const std::size_t n_cells = spec.mu_grid.size() * spec.rho_grid.size();
    std::vector<CellResult> results(n_cells);

    parallel_for(n_cells, threads, [&](std::size_t idx) {
        const double mu = spec.mu_grid[idx / spec.rho_grid.size()];
        const double rho = spec.rho_grid[idx % spec.rho_grid.size()];
        CellResult& res = results[idx];
        const double alpha = rho * mu;
        if (!(alpha > 0.0) || !(alpha < 1.0) || !(mu > 0.0) || !(mu < 1.0)) {
            res.note = "invalid";
            return;
        }
        const GeoQueueParams p(alpha, mu, spec.capacity);
        if (p.beta() >= 1.0) {
            res.note = "unstable";
            return;
        }
        const ObservableModel model = geo_observable_model(p);
        const std::size_t n = model.states();

        // States with non-negligible stationary mass take part in the worst
        // case.
        std::vector<std::size_t> included;
        for (std::size_t x = 0; x < n; ++x) {
            if (model.chain().stationary()[x] > 1e-9) included.push_back(x);
        }

        // Worst case over x of the prefix horizon: the scan stops at the
        // first lead time where any included state falls below epsilon.
        std::vector<double> power(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) power[i * n + i] = 1.0;
        std::vector<double> scratch(n * n);
        for (long L = 0; L <= spec.l_max; ++L) {
            for (const std::size_t x : included) {
                const double d = model.predictability_from_weights(power.data() + x * n);
                if (d < spec.epsilon - 1e-12) {
                    if (L == 0) {
                        res.note = "none";
                    } else {
                        res.horizon = L - 1;
                    }
                    return;
                }
            }
            if (L < spec.l_max) {
                kernels::mat_mul(scratch.data(), power.data(), model.chain().transition().data(), n);
                power.swap(scratch);
            }
        }
        res.note = "exceeds_lmax";
    });

    for (std::size_t idx = 0; idx < n_cells; ++idx) {
        const double mu = spec.mu_grid[idx / spec.rho_grid.size()];
        const double rho = spec.rho_grid[idx % spec.rho_grid.size()];
        const CellResult& res = results[idx];
        std::vector<Cell> row{Cell{rho}, Cell{mu}};
        if (res.horizon) {
            row.emplace_back(*res.horizon);
        } else {
            row.emplace_back();
        }
        row.emplace_back(res.note);
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace predict
