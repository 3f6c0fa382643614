// Acceptance gate: one line per criterion, exit code = number of failures.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "roe/dsl.hpp"
#include "roe/harness.hpp"
#include "roe/qnd.hpp"
#include "roe/rules.hpp"
#include "roe/stats.hpp"

using namespace roe;

namespace {

struct Criterion {
  bool pass = false;
  std::string text;
};

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

std::uint64_t fuzz_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

int main() {
  std::vector<Criterion> out(10);
  const std::vector<std::string>& names = catalog_names();
  const RuleSet regimes[2] = {observer_rules(), objective_rules()};

  // ---- exact enumeration over the whole catalog, both regimes
  std::map<std::string, OutcomeDistribution> exact[2];
  double worst_tvd = 0.0;
  double worst_conservation = 0.0;
  bool all_equal = true;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& name : names) {
    const Scenario sc = builtin(name);
    for (int r = 0; r < 2; ++r) {
      exact[r][name] = enumerate_outcomes(sc, regimes[r], 32);
      worst_conservation =
          std::max(worst_conservation, exact[r][name].max_conservation_error);
    }
    const ComparisonVerdict v =
        compare(exact[0][name], exact[1][name], CompareMode::Exact);
    worst_tvd = std::max(worst_tvd, v.total_variation);
    all_equal = all_equal && v.equal;
  }
  const double enum_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out[1].pass = all_equal && worst_tvd <= 1e-9 && enum_seconds < 60.0;
  out[1].text = "observer and objective regimes produce identical record laws on all " +
                std::to_string(names.size()) + " scenarios" +
                fmt(" (worst TVD %.2e, %.1f s)", worst_tvd, enum_seconds);

  // ---- lone detector
  {
    const OutcomeDistribution& d = exact[1]["eq1-detector"];
    const bool one = d.records.size() == 1;
    const ObservableRecord& rec = d.records.begin()->second;
    const double p = d.probabilities.begin()->second;
    out[2].pass = one && std::abs(p - 1.0) <= 1e-12 && rec.finals.size() == 1 &&
                  rec.finals[0].detector == "D1" && rec.acquisitions.empty();
    out[2].text = "a bare detector objectively settles on the fired branch" +
                  fmt(" (p = 1 %+.1e)", p - 1.0);
  }

  // ---- entangled observer
  {
    const OutcomeDistribution& d = exact[0]["eq3-entangled-observer"];
    const bool one = d.records.size() == 1;
    const ObservableRecord& rec = d.records.begin()->second;
    const double p = d.probabilities.begin()->second;
    out[3].pass =
        one && std::abs(p - 1.0) <= 1e-12 && rec.finals.size() == 1 &&
        rec.finals[0].conscious ==
            std::vector<std::pair<std::string, std::string>>{{"k", "B1"}};
    out[3].text = "an entangled observer always wakes conscious of the fired branch" +
                  fmt(" (p = 1 %+.1e)", p - 1.0);
  }

  // ---- anomalous capture
  {
    bool clean = true;
    for (int r = 0; r < 2; ++r)
      for (const auto& [key, rec] : exact[r]["outside-terminal-observer"].records)
        clean = clean && key.find("psip") == std::string::npos;
    RuleSet mutant = objective_rules();
    mutant.rule4_enabled = false;
    const OutcomeDistribution broken =
        enumerate_outcomes(builtin("outside-terminal-observer"), mutant, 32);
    const ComparisonVerdict v =
        compare(exact[0]["outside-terminal-observer"], broken, CompareMode::Exact);
    out[4].pass = clean && !v.equal && v.total_variation > 0.1;
    out[4].text = "the anomalous-capture filter is load-bearing: removing it shifts "
                  "the law" +
                  fmt(" (mutant TVD %.4f)", v.total_variation);
  }

  // ---- nondemolition protocol
  double qnd_norm_error = 0.0;
  {
    const DetectorPrep prep{};
    const SpinPairState post_a = interact_A(prepare(initial_state(prep), prep));
    const double bound = detector1_trace_distance_bound(post_a);
    const double fidelity =
        singlet_register_fidelity(interact_B(post_a), prep);

    const NondemolitionRun obs = run_nondemolition(observer_rules());
    const NondemolitionRun obj = run_nondemolition(objective_rules());
    qnd_norm_error = std::max(obs.max_norm_error, obj.max_norm_error);

    bool table_ok = obj.table.size() == 4;
    if (table_ok) {
      const bool want[4] = {true, false, false, true};
      for (int i = 0; i < 4; ++i) table_ok = table_ok && obj.table[i].eligible == want[i];
      table_ok = table_ok && obj.table[0].branch_basis == "environment" &&
                 obj.table[1].branch_basis == "spin" &&
                 obj.table[2].branch_basis == "spin" &&
                 obj.table[3].branch_basis == "environment";
    }
    const bool runs_match =
        obs.record == obj.record &&
        std::abs(obs.final_singlet_weight - 1.0) <= 1e-12 &&
        std::abs(obj.final_singlet_weight - 1.0) <= 1e-12;
    out[5].pass = std::abs(fidelity - 1.0) <= 1e-12 && bound <= 1e-12 && table_ok &&
                  runs_match;
    out[5].text = "the spin pair survives both passes untouched and unreadable "
                  "in transit" +
                  fmt(" (fidelity 1 %+.1e, marginal distance %.1e)", fidelity - 1.0,
                      bound);
  }

  // ---- stochastic clock statistics
  {
    Superposition s;
    Component c1;
    c1.id = "c1";
    c1.weight = 1.0;
    Component c2;
    c2.id = "c2";
    c2.weight = 0.0;
    s.components = {c1, c2};
    const FlowGraph g{{{"c1", "c2", {ProfileKind::Const, 0.0, 40.0, 1.0}, "x"}}};
    std::vector<double> times;
    times.reserve(100000);
    for (std::uint64_t i = 0; i < 100000; ++i) {
      const auto ev = sample_hit(s, g, 0.0, 40.0, mix_seed(2024, i));
      if (ev) times.push_back(ev->time);
    }
    const double ks = ks_distance_exp1(times);
    out[6].pass = times.size() == 100000 && ks < 0.01;
    out[6].text = "first-hit times follow the exponential clock" +
                  fmt(" (KS distance %.4f at n = 1e5)", ks);
  }

  // ---- Monte Carlo agrees with enumeration
  double worst_mc_tvd = 0.0;
  {
    std::uint64_t salt = 1000;
    for (const auto& name : names)
      for (int r = 0; r < 2; ++r) {
        const OutcomeDistribution mc =
            run_trials(builtin(name), regimes[r], 100000, salt++);
        worst_conservation = std::max(worst_conservation, mc.max_conservation_error);
        worst_mc_tvd = std::max(
            worst_mc_tvd, total_variation(mc.probabilities, exact[r][name].probabilities));
      }
    out[8].pass = worst_mc_tvd < 5e-3;
    out[8].text = "sampled frequencies reproduce the exact law on every scenario" +
                  fmt(" (worst TVD %.2e at 1e5 trials)", worst_mc_tvd);
  }

  // ---- conservation (after both exact and sampled runs are in)
  out[7].pass = worst_conservation <= 1e-9 && qnd_norm_error <= 1e-12;
  out[7].text = "weight and amplitude norms are conserved between reductions" +
                fmt(" (worst drift %.1e, amplitude %.1e)", worst_conservation,
                    qnd_norm_error);

  // ---- scenario language robustness
  {
    std::uint64_t state = 0xacce97edULL;
    bool sturdy = true;
    for (int i = 0; i < 100000 && sturdy; ++i) {
      const int len = static_cast<int>(fuzz_next(state) % 100);
      std::string text;
      for (int j = 0; j < len; ++j)
        text.push_back(static_cast<char>(fuzz_next(state) % 256));
      const ParseResult res = parse_scenario(text);
      sturdy = res.ok() || !res.diagnostics.empty();
    }
    bool round_trip = true;
    for (const auto& name : names) {
      const Scenario sc = builtin(name);
      const ParseResult back = parse_scenario(format_scenario(sc));
      round_trip = round_trip && back.ok() && *back.scenario == sc;
    }
    out[9].pass = sturdy && round_trip;
    out[9].text = "the scenario language survives 1e5 fuzzed inputs and "
                  "round-trips the whole catalog";
  }

  int failures = 0;
  for (int i = 1; i <= 9; ++i) {
    std::printf("%s criterion %d: %s\n", out[i].pass ? "PASS" : "FAIL", i,
                out[i].text.c_str());
    if (!out[i].pass) ++failures;
  }
  return failures;
}
