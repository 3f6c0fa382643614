#include "roe/json_io.hpp"

#include <charconv>

namespace roe {

nlohmann::ordered_json record_to_json(const ObservableRecord& r) {
  nlohmann::ordered_json j;
  j["acquisitions"] = nlohmann::ordered_json::array();
  for (const auto& [obs, steps] : r.acquisitions) {
    nlohmann::ordered_json seq = nlohmann::ordered_json::array();
    for (const auto& st : steps)
      seq.push_back({{"state", st.state}, {"particle", st.particle}, {"detector", st.detector}});
    j["acquisitions"].push_back({{"observer", obs}, {"sequence", std::move(seq)}});
  }
  j["final"] = nlohmann::ordered_json::array();
  for (const auto& f : r.finals) {
    nlohmann::ordered_json cs = nlohmann::ordered_json::array();
    for (const auto& [obs, st] : f.conscious)
      cs.push_back({{"observer", obs}, {"state", st}});
    j["final"].push_back(
        {{"particle", f.particle}, {"detector", f.detector}, {"conscious", std::move(cs)}});
  }
  return j;
}

nlohmann::ordered_json distribution_to_json(const std::string& scenario,
                                            const std::string& regime,
                                            const OutcomeDistribution& d) {
  nlohmann::ordered_json j;
  j["scenario"] = scenario;
  j["regime"] = regime;
  j["mode"] = d.trials > 0 ? "mc" : "exact";
  j["records"] = nlohmann::ordered_json::array();
  for (const auto& [key, p] : d.probabilities) {
    nlohmann::ordered_json entry;
    const auto it = d.records.find(key);
    entry["record"] = it != d.records.end() ? record_to_json(it->second)
                                            : nlohmann::ordered_json(key);
    entry["probability"] = p;
    if (d.trials > 0) {
      const auto cit = d.counts.find(key);
      entry["count"] = cit != d.counts.end() ? cit->second : 0;
    }
    j["records"].push_back(std::move(entry));
  }
  if (d.trials > 0) j["trials"] = d.trials;
  if (d.trials == 0) j["discretization_bound"] = d.discretization_bound;
  j["max_conservation_error"] = d.max_conservation_error;
  return j;
}

nlohmann::ordered_json verdict_to_json(const ComparisonVerdict& v) {
  nlohmann::ordered_json j;
  j["mode"] = v.mode == CompareMode::Exact ? "exact" : "mc";
  j["total_variation"] = v.total_variation;
  if (v.chi_square_p) j["chi_square_p"] = *v.chi_square_p;
  j["equal"] = v.equal;
  return j;
}

nlohmann::ordered_json events_to_json(const std::vector<StochasticEvent>& events) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& e : events)
    j.push_back({{"time", e.time},
                 {"chosen", e.chosen},
                 {"applied_rules", e.applied_rules},
                 {"reduced", e.reduced}});
  return j;
}

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string csv_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string distribution_to_csv(const OutcomeDistribution& d) {
  std::string out = "record,probability\n";
  for (const auto& [key, p] : d.probabilities) {
    out += csv_quote(key);
    out += ',';
    out += csv_number(p);
    out += '\n';
  }
  return out;
}

}  // namespace roe
