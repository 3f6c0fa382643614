#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "roe/harness.hpp"

namespace roe {

nlohmann::ordered_json record_to_json(const ObservableRecord& r);

// Full report for one distribution; mode is "exact" when trials == 0.
nlohmann::ordered_json distribution_to_json(const std::string& scenario,
                                            const std::string& regime,
                                            const OutcomeDistribution& d);

nlohmann::ordered_json verdict_to_json(const ComparisonVerdict& v);

nlohmann::ordered_json events_to_json(const std::vector<StochasticEvent>& events);

// Two columns: the canonical record key and its probability.
std::string distribution_to_csv(const OutcomeDistribution& d);

}  // namespace roe
