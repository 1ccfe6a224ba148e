#include "predict/serialize.hpp"

#include "predict/errors.hpp"

namespace predict {

using nlohmann::json;

json to_json(const DiscretePmf& pmf) {
    return json{{"offset", pmf.offset()}, {"mass", pmf.mass()}};
}

DiscretePmf pmf_from_json(const json& j) {
    if (!j.is_object() || !j.contains("offset") || !j.contains("mass")) {
        throw ConfigError("pmf JSON must carry offset and mass");
    }
    return DiscretePmf(j.at("offset").get<long>(), j.at("mass").get<std::vector<double>>());
}

json to_json(const MarkovChain& chain) {
    const std::size_t n = chain.states();
    json rows = json::array();
    for (std::size_t x = 0; x < n; ++x) {
        rows.push_back(std::vector<double>(chain.row(x), chain.row(x) + n));
    }
    return json{{"transition", rows}};
}

MarkovChain chain_from_json(const json& j) {
    if (!j.is_object() || !j.contains("transition")) {
        throw ConfigError("chain JSON must carry a transition matrix");
    }
    return MarkovChain(j.at("transition").get<std::vector<std::vector<double>>>());
}

json to_json(const ObservableModel& model) {
    json posteriors = json::array();
    for (const auto& r : model.posteriors()) posteriors.push_back(to_json(r));
    return json{{"chain", to_json(model.chain())}, {"posteriors", posteriors}};
}

ObservableModel model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("chain") || !j.contains("posteriors")) {
        throw ConfigError("model JSON must carry chain and posteriors");
    }
    std::vector<DiscretePmf> posteriors;
    for (const auto& r : j.at("posteriors")) posteriors.push_back(pmf_from_json(r));
    return ObservableModel(chain_from_json(j.at("chain")), std::move(posteriors));
}

}  // namespace predict
