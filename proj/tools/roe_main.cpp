#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>

#include "CLI11.hpp"
#include "roe/dsl.hpp"
#include "roe/harness.hpp"
#include "roe/json_io.hpp"
#include "roe/qnd.hpp"

namespace {

struct CliExit {
  int code;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw roe::SimError("UNKNOWN_SCENARIO", "no builtin scenario or readable file '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

bool is_builtin(const std::string& name) {
  const auto& names = roe::catalog_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::string scenario_text(const std::string& arg) {
  return is_builtin(arg) ? roe::builtin_text(arg) : read_file(arg);
}

const char* severity_name(roe::Diagnostic::Severity s) {
  switch (s) {
    case roe::Diagnostic::Severity::Error: return "error";
    case roe::Diagnostic::Severity::Violation: return "violation";
    case roe::Diagnostic::Severity::Info: return "info";
  }
  return "?";
}

void print_diagnostic(std::ostream& os, const roe::Diagnostic& d) {
  os << severity_name(d.severity) << " " << d.code;
  if (d.line > 0) os << " " << d.line << ":" << d.column;
  os << " " << d.message << "\n";
}

roe::Scenario load_scenario(const std::string& arg) {
  const roe::ParseResult res = roe::parse_scenario(scenario_text(arg));
  if (!res.ok()) {
    for (const auto& d : res.diagnostics) print_diagnostic(std::cerr, d);
    throw CliExit{2};
  }
  return *res.scenario;
}

roe::RuleSet make_rules(const std::string& regime, bool no_rule4, bool ignore_coherence) {
  roe::RuleSet rs =
      regime == "objective" ? roe::objective_rules() : roe::observer_rules();
  if (no_rule4) rs.rule4_enabled = false;
  if (ignore_coherence) rs.rule1a_require_incoherence = false;
  return rs;
}

void emit(const nlohmann::ordered_json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("cannot write '" + out_path + "'");
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic reduction workbench: run, enumerate and compare the "
               "observer and objective rule sets on measurement scenarios"};
  app.require_subcommand(1);

  // run
  std::string run_scenario, run_regime = "observer", run_out, run_csv;
  std::uint64_t run_trials_n = 10000, run_seed = 42;
  bool run_events = false, run_timing = false, run_no_rule4 = false, run_ignore_coh = false;
  auto* run = app.add_subcommand("run", "Sample stochastic histories of a scenario");
  run->add_option("scenario", run_scenario, "builtin name or path to a .rsc file")->required();
  run->add_option("--regime", run_regime, "rule set to apply")
      ->check(CLI::IsMember({"observer", "objective"}));
  run->add_option("--trials", run_trials_n, "number of independent histories");
  run->add_option("--seed", run_seed, "base seed; trial i uses a per-trial mix");
  run->add_option("--out", run_out, "write the JSON report here instead of stdout");
  run->add_option("--csv", run_csv, "also write record,probability rows to this file");
  run->add_flag("--events", run_events, "include the event log of the first trial");
  run->add_flag("--include-timing", run_timing,
                "include first-trial acquisition times (never part of the records)");
  run->add_flag("--no-rule4", run_no_rule4, "disable the anomalous-capture filter");
  run->add_flag("--rule1a-ignore-coherence", run_ignore_coh,
                "objective reduction ignores the local-incoherence requirement");
  run->callback([&] {
    const roe::Scenario sc = load_scenario(run_scenario);
    const roe::RuleSet rs = make_rules(run_regime, run_no_rule4, run_ignore_coh);
    const roe::OutcomeDistribution dist = roe::run_trials(sc, rs, run_trials_n, run_seed);
    nlohmann::ordered_json j = roe::distribution_to_json(sc.name, run_regime, dist);
    if (run_events || run_timing) {
      const roe::TrialResult tr = roe::run_single(sc, rs, roe::mix_seed(run_seed, 0));
      if (run_events) j["events"] = roe::events_to_json(tr.events);
      if (run_timing) {
        nlohmann::ordered_json t;
        for (const auto& [obs, times] : tr.acquisition_times) t[obs] = times;
        j["timing"] = std::move(t);
      }
    }
    if (!run_csv.empty()) write_text(roe::distribution_to_csv(dist), run_csv);
    emit(j, run_out);
  });

  // enumerate
  std::string enum_scenario, enum_regime = "observer", enum_out, enum_csv;
  int enum_slices = 32;
  bool enum_no_rule4 = false, enum_ignore_coh = false;
  auto* enu = app.add_subcommand("enumerate", "Exact outcome distribution of a scenario");
  enu->add_option("scenario", enum_scenario, "builtin name or path to a .rsc file")->required();
  enu->add_option("--regime", enum_regime, "rule set to apply")
      ->check(CLI::IsMember({"observer", "objective"}));
  enu->add_option("--slices", enum_slices, "time slices per interaction window")
      ->check(CLI::Range(1, 100000));
  enu->add_option("--out", enum_out, "write the JSON report here instead of stdout");
  enu->add_option("--csv", enum_csv, "also write record,probability rows to this file");
  enu->add_flag("--no-rule4", enum_no_rule4, "disable the anomalous-capture filter");
  enu->add_flag("--rule1a-ignore-coherence", enum_ignore_coh,
                "objective reduction ignores the local-incoherence requirement");
  enu->callback([&] {
    const roe::Scenario sc = load_scenario(enum_scenario);
    const roe::RuleSet rs = make_rules(enum_regime, enum_no_rule4, enum_ignore_coh);
    const roe::OutcomeDistribution dist = roe::enumerate_outcomes(sc, rs, enum_slices);
    if (!enum_csv.empty()) write_text(roe::distribution_to_csv(dist), enum_csv);
    emit(roe::distribution_to_json(sc.name, enum_regime, dist), enum_out);
  });

  // compare
  std::string cmp_scenario, cmp_mode = "exact", cmp_out;
  int cmp_slices = 32;
  std::uint64_t cmp_trials = 10000, cmp_seed = 42;
  double cmp_tol = roe::kTvdTolerance, cmp_alpha = roe::kChiSquareAlpha;
  bool cmp_no_rule4 = false, cmp_ignore_coh = false;
  auto* cmp = app.add_subcommand(
      "compare", "Verify the observer and objective rule sets agree on a scenario");
  cmp->add_option("scenario", cmp_scenario, "builtin name or path to a .rsc file")->required();
  cmp->add_option("--mode", cmp_mode, "exact enumeration or Monte Carlo")
      ->check(CLI::IsMember({"exact", "mc"}));
  cmp->add_option("--slices", cmp_slices, "time slices per window (exact mode)")
      ->check(CLI::Range(1, 100000));
  cmp->add_option("--trials", cmp_trials, "trials per side (mc mode)");
  cmp->add_option("--seed", cmp_seed, "base seed (mc mode)");
  cmp->add_option("--tvd-tolerance", cmp_tol, "equality threshold on total variation (exact)");
  cmp->add_option("--alpha", cmp_alpha, "chi-square significance level (mc)");
  cmp->add_flag("--no-rule4", cmp_no_rule4,
                "disable the anomalous-capture filter on the objective side");
  cmp->add_flag("--rule1a-ignore-coherence", cmp_ignore_coh,
                "objective side ignores the local-incoherence requirement");
  cmp->callback([&] {
    const roe::Scenario sc = load_scenario(cmp_scenario);
    const roe::RuleSet obs = roe::observer_rules();
    const roe::RuleSet obj = make_rules("objective", cmp_no_rule4, cmp_ignore_coh);
    roe::ComparisonVerdict v;
    if (cmp_mode == "exact") {
      const auto a = roe::enumerate_outcomes(sc, obs, cmp_slices);
      const auto b = roe::enumerate_outcomes(sc, obj, cmp_slices);
      v = roe::compare(a, b, roe::CompareMode::Exact, cmp_tol, cmp_alpha);
    } else {
      const auto a = roe::run_trials(sc, obs, cmp_trials, cmp_seed);
      const auto b = roe::run_trials(sc, obj, cmp_trials, cmp_seed + 1);
      v = roe::compare(a, b, roe::CompareMode::MonteCarlo, cmp_tol, cmp_alpha);
    }
    nlohmann::ordered_json j;
    j["scenario"] = sc.name;
    j["objective_rule4_enabled"] = obj.rule4_enabled;
    j["objective_rule1a_require_incoherence"] = obj.rule1a_require_incoherence;
    const nlohmann::ordered_json vj = roe::verdict_to_json(v);
    for (const auto& [k, val] : vj.items()) j[k] = val;
    emit(j, cmp_out);
    throw CliExit{v.equal ? 0 : 1};
  });

  // nondemolition
  std::string nd_regime = "objective", nd_out;
  std::uint64_t nd_seed = 0;
  bool nd_ignore_coh = false;
  auto* nd = app.add_subcommand("nondemolition",
                                "Amplitude-level spin-pair nondemolition protocol");
  nd->add_option("--regime", nd_regime, "rule set to apply")
      ->check(CLI::IsMember({"observer", "objective"}));
  nd->add_option("--seed", nd_seed, "seed for any forced random branch choice");
  nd->add_option("--out", nd_out, "write the JSON report here instead of stdout");
  nd->add_flag("--rule1a-ignore-coherence", nd_ignore_coh,
               "objective reduction ignores the local-incoherence requirement");
  nd->callback([&] {
    const roe::RuleSet rs = make_rules(nd_regime, false, nd_ignore_coh);
    const roe::NondemolitionRun nr = roe::run_nondemolition(rs, nd_seed);
    const roe::OutcomeDistribution dist = roe::nondemolition_distribution(rs);
    nlohmann::ordered_json j;
    j["regime"] = nd_regime;
    j["record"] = roe::record_to_json(nr.record);
    j["final_singlet_weight"] = nr.final_singlet_weight;
    j["max_norm_error"] = nr.max_norm_error;
    j["eligibility"] = nlohmann::ordered_json::array();
    for (const auto& e : nr.table)
      j["eligibility"].push_back({{"event", roe::event_name(e.event)},
                                  {"branch_basis", e.branch_basis},
                                  {"branch_overlap", e.branch_overlap},
                                  {"eligible", e.eligible}});
    j["distribution"] = roe::distribution_to_json("nondemolition", nd_regime, dist);
    emit(j, nd_out);
  });

  // list
  auto* lst = app.add_subcommand("list", "List the builtin scenarios");
  lst->callback([] {
    for (const auto& name : roe::catalog_names()) std::cout << name << "\n";
  });

  // validate
  std::string val_scenario;
  auto* val = app.add_subcommand("validate", "Parse and lint a scenario");
  val->add_option("scenario", val_scenario, "builtin name or path to a .rsc file")->required();
  val->callback([&] {
    const roe::ParseResult res = roe::parse_scenario(scenario_text(val_scenario));
    if (!res.ok()) {
      for (const auto& d : res.diagnostics) print_diagnostic(std::cout, d);
      throw CliExit{2};
    }
    const std::vector<roe::Diagnostic> diags = roe::validate(*res.scenario);
    bool violation = false;
    for (const auto& d : diags) {
      print_diagnostic(std::cout, d);
      violation |= d.severity == roe::Diagnostic::Severity::Violation;
    }
    throw CliExit{violation ? 1 : 0};
  });

  // show
  std::string show_scenario;
  auto* shw = app.add_subcommand("show", "Print a scenario's text");
  shw->add_option("scenario", show_scenario, "builtin name or path to a .rsc file")->required();
  shw->callback([&] { std::cout << scenario_text(show_scenario); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const CliExit& e) {
    return e.code;
  } catch (const roe::SimError& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
