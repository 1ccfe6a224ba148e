#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "predict/errors.hpp"
#include "predict/scenario.hpp"
#include "run_plan.hpp"

// Embedded experiment families: one preset per figure-style configuration,
// driven by name from the CLI and the acceptance suite.

namespace predict {

namespace {

using detail::CurveSeries;
using detail::RunPlan;
using nlohmann::json;

std::vector<long> grid(long from, long to, long step) {
    std::vector<long> v;
    for (long l = from; l <= to; l += step) v.push_back(l);
    return v;
}

long resolve_chi_state(double multiple, const GeoQueueParams& p) {
    return std::clamp(std::lround(multiple * p.chi()), 0L, p.capacity);
}

CurveSeries queue_series(const std::shared_ptr<const ObservableModel>& model,
                         const GeoQueueParams& p, long x, std::string label) {
    CurveSeries s;
    s.label = std::move(label);
    s.model = model;
    s.queue = p;
    s.state = x;
    s.display_state = x;
    return s;
}

RunPlan fig_condmarg() {
    RunPlan plan;
    plan.id = "fig_condmarg";
    plan.kind = ScenarioKind::distributions;
    const RandomWalkParams params = RandomWalkParams::vehicular();
    const auto model = std::make_shared<ObservableModel>(cqi_observable_model(params));
    plan.model_meta.push_back(detail::walk_meta("vehicular", params, *model));
    for (long cqi : {1L, 8L, 15L}) {
        plan.distributions.push_back({"posterior cqi=" + std::to_string(cqi),
                                      model->posterior(static_cast<std::size_t>(cqi - 1))});
    }
    plan.distributions.push_back({"marginal", model->marginal()});
    plan.distributions.push_back({"forecast cqi=15 L=60", model->forecast(14, 60)});
    return plan;
}

RunPlan fig_rwub() {
    RunPlan plan;
    plan.id = "fig_rwub";
    plan.leads = grid(0, 300, 2);
    plan.outputs = {"exact", "ub_spectral_full", "ub_spectral_gap"};
    for (const auto& [name, params] :
         {std::pair{"p=0.6", RandomWalkParams::vehicular()},
          std::pair{"p=0.9", RandomWalkParams::static_connection()}}) {
        const auto model = std::make_shared<ObservableModel>(cqi_observable_model(params));
        plan.model_meta.push_back(detail::walk_meta(name, params, *model));
        for (long cqi : {1L, 3L, 15L}) {
            CurveSeries s;
            s.label = std::string(name) + " cqi=" + std::to_string(cqi);
            s.model = model;
            s.state = cqi - 1;
            s.display_state = cqi;
            plan.curves.push_back(std::move(s));
        }
    }
    return plan;
}

RunPlan fig_mm1conds() {
    RunPlan plan;
    plan.id = "fig_mm1conds";
    plan.kind = ScenarioKind::distributions;
    const GeoQueueParams p = GeoQueueParams::from_rho(0.85, 0.5, 128);
    const auto model = std::make_shared<ObservableModel>(geo_observable_model(p));
    plan.model_meta.push_back(detail::queue_meta("queue", p, *model));
    for (long x : {8L, 16L, 32L, 64L}) {
        plan.distributions.push_back(
            {"posterior x=" + std::to_string(x), model->posterior(static_cast<std::size_t>(x))});
    }
    plan.distributions.push_back({"marginal", model->marginal()});
    return plan;
}

RunPlan approx_eval_plan(const std::string& id, std::set<std::string> outputs) {
    RunPlan plan;
    plan.id = id;
    // Far states (x = 64) only enter their decay beyond L ~ 700.
    plan.leads = grid(0, 1200, 10);
    plan.outputs = std::move(outputs);
    const GeoQueueParams p = GeoQueueParams::from_rho(0.85, 0.5, 128);
    const auto model = std::make_shared<ObservableModel>(geo_observable_model(p));
    plan.model_meta.push_back(detail::queue_meta("queue", p, *model));
    for (long x : {8L, 16L, 32L, 64L}) {
        plan.curves.push_back(queue_series(model, p, x, "x=" + std::to_string(x)));
    }
    return plan;
}

RunPlan fig_mm1approxeval() { return approx_eval_plan("fig_mm1approxeval", {"exact", "approx"}); }

RunPlan fig_mm1ubeval() { return approx_eval_plan("fig_mm1ubeval", {"exact", "ub_spectral_full"}); }

RunPlan fig_mm1agg() {
    RunPlan plan;
    plan.id = "fig_mm1agg";
    plan.leads = grid(0, 600, 5);
    plan.outputs = {"exact", "approx"};
    const GeoQueueParams p = GeoQueueParams::from_rho(0.85, 0.5, 128);
    const auto fine = std::make_shared<ObservableModel>(geo_observable_model(p));
    const long x_fine = 32;
    for (std::size_t width : {1u, 2u, 4u, 8u}) {
        if (width == 1) {
            // The approximation applies to the raw queue only.
            plan.curves.push_back(queue_series(fine, p, x_fine, "agg=1 x=32"));
            json m = detail::queue_meta("agg=1", p, *fine);
            plan.model_meta.push_back(std::move(m));
            continue;
        }
        const AggregationMap map = AggregationMap::blocks(fine->states(), width);
        const auto coarse = std::make_shared<ObservableModel>(aggregate(*fine, map));
        CurveSeries s;
        s.label = "agg=" + std::to_string(width) + " x=" + std::to_string(x_fine / (long)width);
        s.model = coarse;
        s.state = x_fine / static_cast<long>(width);
        s.display_state = s.state;
        plan.curves.push_back(std::move(s));
        json m = detail::queue_meta("agg=" + std::to_string(width), p, *fine);
        m["aggregation_width"] = width;
        m["aggregation_contiguous"] = map.contiguous();
        m["aggregated_states"] = coarse->states();
        plan.model_meta.push_back(std::move(m));
    }
    return plan;
}

RunPlan fig_mm1pred() {
    RunPlan plan;
    plan.id = "fig_mm1pred";
    plan.leads = grid(0, 300, 2);
    plan.outputs = {"exact", "approx", "ce"};
    const GeoQueueParams p(0.32, 0.4, 100);
    const auto model = std::make_shared<ObservableModel>(geo_observable_model(p));
    plan.model_meta.push_back(detail::queue_meta("queue", p, *model));
    for (double k : {3.0, 9.0, 15.0}) {
        const long x = resolve_chi_state(k, p);
        plan.curves.push_back(
            queue_series(model, p, x, "x=" + std::to_string((long)k) + "chi=" + std::to_string(x)));
    }
    return plan;
}

RunPlan fig_mm1kcomp() {
    RunPlan plan;
    plan.id = "fig_mm1kcomp";
    plan.leads = grid(0, 300, 5);
    plan.outputs = {"exact"};
    // chi (and with it the buffer's influence) saturates beyond K ~ 32 at
    // rho = 0.85; the spread lives at small K.
    for (long k : {4L, 8L, 16L, 32L, 64L}) {
        const GeoQueueParams p = GeoQueueParams::from_rho(0.85, 0.5, k);
        const auto model = std::make_shared<ObservableModel>(geo_observable_model(p));
        const long x = resolve_chi_state(3.0, p);
        plan.model_meta.push_back(detail::queue_meta("K=" + std::to_string(k), p, *model));
        plan.curves.push_back(
            queue_series(model, p, x, "K=" + std::to_string(k) + " x=" + std::to_string(x)));
    }
    return plan;
}

RunPlan fig_mm1loss() {
    RunPlan plan;
    plan.id = "fig_mm1loss";
    plan.leads = grid(0, 100, 1);
    plan.outputs = {"blocking"};
    for (long k : {8L, 16L, 32L}) {
        const GeoQueueParams p = GeoQueueParams::from_rho(0.85, 0.5, k);
        const auto model = std::make_shared<ObservableModel>(geo_observable_model(p));
        plan.model_meta.push_back(detail::queue_meta("K=" + std::to_string(k), p, *model));
        for (long x : {0L, k}) {
            plan.curves.push_back(queue_series(
                model, p, x, "K=" + std::to_string(k) + " x=" + std::to_string(x)));
        }
    }
    return plan;
}

RunPlan tandem_plan(const std::string& id, const std::vector<GeoQueueParams>& hop_params,
                    double chi_multiple, const std::vector<std::vector<bool>>& masks,
                    std::set<std::string> outputs) {
    RunPlan plan;
    plan.id = id;
    plan.leads = grid(0, 300, 5);
    plan.outputs = std::move(outputs);
    auto hops = std::make_shared<std::vector<ObservableModel>>();
    std::vector<std::size_t> states;
    for (std::size_t m = 0; m < hop_params.size(); ++m) {
        hops->push_back(geo_observable_model(hop_params[m]));
        states.push_back(static_cast<std::size_t>(resolve_chi_state(chi_multiple, hop_params[m])));
        json hm = detail::queue_meta("hop" + std::to_string(m + 1), hop_params[m], hops->back());
        hm["observed_state"] = states.back();
        plan.model_meta.push_back(std::move(hm));
    }
    for (const auto& mask : masks) {
        CurveSeries s;
        std::string desc;
        for (bool b : mask) desc += b ? '1' : '0';
        s.label = "obs=" + desc;
        s.hops = hops;
        s.mask = mask;
        s.hop_states = states;
        plan.curves.push_back(std::move(s));
    }
    return plan;
}

RunPlan fig_mm1multi0() {
    RunPlan plan;
    plan.id = "fig_mm1multi0";
    plan.leads = grid(0, 300, 5);
    plan.outputs = {"exact"};
    const GeoQueueParams p(0.32, 0.4, 100);
    const ObservableModel hop = geo_observable_model(p);
    const std::size_t x = static_cast<std::size_t>(resolve_chi_state(15.0, p));
    for (std::size_t m_count : {1u, 2u, 3u, 5u}) {
        auto hops = std::make_shared<std::vector<ObservableModel>>();
        for (std::size_t m = 0; m < m_count; ++m) hops->push_back(hop);
        CurveSeries s;
        s.label = "M=" + std::to_string(m_count);
        s.hops = hops;
        s.mask.assign(m_count, true);
        s.hop_states.assign(m_count, x);
        plan.curves.push_back(std::move(s));
    }
    json hm = detail::queue_meta("hop", p, hop);
    hm["observed_state"] = x;
    plan.model_meta.push_back(std::move(hm));
    return plan;
}

RunPlan fig_mm1multi1() {
    const GeoQueueParams p(0.32, 0.4, 100);
    return tandem_plan("fig_mm1multi1", {p, p, p, p, p}, 15.0,
                       {{true, true, true, true, true},
                        {true, true, true, false, false},
                        {true, false, false, false, false}},
                       {"exact", "ub_tandem"});
}

RunPlan fig_mm1multi2() {
    const GeoQueueParams first(0.34, 0.4, 100);
    const GeoQueueParams bottleneck(0.34, 0.38, 100);
    const GeoQueueParams last(0.34, 0.4, 100);
    return tandem_plan("fig_mm1multi2", {first, bottleneck, last}, 10.0,
                       {{true, true, true},
                        {true, false, false},
                        {false, false, true},
                        {false, true, false}},
                       {"exact", "ub_tandem"});
}

HorizonSpec fig_mm1predtime_spec() {
    HorizonSpec h;
    h.epsilon = 0.1;
    h.capacity = 50;
    h.l_max = 5000;
    h.mu_grid = {0.3, 0.4, 0.5, 0.6, 0.7};
    h.rho_grid = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
    return h;
}

using PlanBuilder = std::function<RunPlan()>;

const std::map<std::string, PlanBuilder>& plan_builders() {
    static const std::map<std::string, PlanBuilder> builders{
        {"fig_condmarg", fig_condmarg},
        {"fig_rwub", fig_rwub},
        {"fig_mm1conds", fig_mm1conds},
        {"fig_mm1approxeval", fig_mm1approxeval},
        {"fig_mm1ubeval", fig_mm1ubeval},
        {"fig_mm1agg", fig_mm1agg},
        {"fig_mm1pred", fig_mm1pred},
        {"fig_mm1kcomp", fig_mm1kcomp},
        {"fig_mm1loss", fig_mm1loss},
        {"fig_mm1multi0", fig_mm1multi0},
        {"fig_mm1multi1", fig_mm1multi1},
        {"fig_mm1multi2", fig_mm1multi2},
    };
    return builders;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{
        "fig_condmarg",  "fig_rwub",    "fig_mm1conds",   "fig_mm1approxeval",
        "fig_mm1ubeval", "fig_mm1agg",  "fig_mm1pred",    "fig_mm1kcomp",
        "fig_mm1loss",   "fig_mm1predtime", "fig_mm1multi0", "fig_mm1multi1",
        "fig_mm1multi2"};
    return names;
}

ResultTable run_preset(const std::string& name, int threads) {
    if (name == "fig_mm1predtime") {
        ResultTable table = horizon_map(fig_mm1predtime_spec(), threads);
        table.metadata["id"] = "fig_mm1predtime";
        return table;
    }
    const auto& builders = plan_builders();
    const auto it = builders.find(name);
    if (it == builders.end()) {
        std::string known;
        for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
    }
    return detail::run_plan(it->second(), threads);
}

}  // namespace predict
