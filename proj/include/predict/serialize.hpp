#pragma once

#include <json.hpp>

#include "predict/markov.hpp"
#include "predict/observable.hpp"
#include "predict/pmf.hpp"

namespace predict {

// {"offset": int, "mass": [real, ...]}
nlohmann::json to_json(const DiscretePmf& pmf);
DiscretePmf pmf_from_json(const nlohmann::json& j);

// {"transition": [[...], ...]}
nlohmann::json to_json(const MarkovChain& chain);
MarkovChain chain_from_json(const nlohmann::json& j);

// {"chain": {...}, "posteriors": [{...}, ...]}
nlohmann::json to_json(const ObservableModel& model);
ObservableModel model_from_json(const nlohmann::json& j);

}  // namespace predict
