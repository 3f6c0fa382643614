#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "roe/dsl.hpp"

using namespace roe;

namespace {

const char* kMinimal = R"(scenario mini
component c1 weight 1.0 particle psi detector D0 env lab
component c2 weight 0.0 detector D1 env fired
interact capture particle_detector window 0 1
flow capture c1 -> c2 ramp 300
)";

bool has_code(const std::vector<Diagnostic>& ds, const std::string& code) {
  return std::any_of(ds.begin(), ds.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

const Diagnostic& first_with(const std::vector<Diagnostic>& ds, const std::string& code) {
  for (const auto& d : ds)
    if (d.code == code) return d;
  throw std::runtime_error("diagnostic not found: " + code);
}

std::uint64_t splitmix(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

TEST_CASE("parses a minimal scenario") {
  const ParseResult res = parse_scenario(kMinimal);
  REQUIRE(res.ok());
  const Scenario& sc = *res.scenario;
  CHECK(sc.name == "mini");
  REQUIRE(sc.components.size() == 2);
  CHECK(sc.components[0].id == "c1");
  CHECK(sc.components[0].weight == 1.0);
  CHECK(sc.components[0].particle == "psi");
  CHECK(sc.components[1].particle == "-");
  CHECK(sc.components[1].env == "fired");
  REQUIRE(sc.interactions.size() == 1);
  CHECK(sc.interactions[0].kind == InteractionKind::ParticleDetector);
  CHECK(sc.interactions[0].t_start == 0.0);
  CHECK(sc.interactions[0].t_end == 1.0);
  REQUIRE(sc.flows.size() == 1);
  CHECK(sc.flows[0].peak == 300.0);

  SUBCASE("derived views") {
    CHECK(sc.end_time() == 1.0);
    CHECK(sc.initial_state().time == 0.0);
    CHECK(sc.initial_state().components.size() == 2);
    const FlowGraph g = sc.flow_graph();
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].profile.t0 == 0.0);
    CHECK(g.edges[0].profile.t1 == 1.0);
    CHECK(g.edges[0].profile.peak == 300.0);
    CHECK(g.edges[0].interaction == "capture");
  }
  SUBCASE("env defaults to the component id") {
    const ParseResult r2 = parse_scenario(
        "scenario t\ncomponent c1 weight 1.0\n");
    REQUIRE(r2.ok());
    CHECK(r2.scenario->components[0].env == "c1");
  }
}

TEST_CASE("parser reports positioned diagnostics instead of throwing") {
  SUBCASE("empty input misses the scenario declaration") {
    const ParseResult res = parse_scenario("");
    CHECK_FALSE(res.ok());
    CHECK(has_code(res.diagnostics, "SYNTAX_ERROR"));
  }
  SUBCASE("unknown interaction reference") {
    const ParseResult res = parse_scenario(
        "scenario t\ncomponent c1 weight 1.0\nflow look c1 -> c1x ramp 10\n");
    CHECK_FALSE(res.ok());
    const Diagnostic& d = first_with(res.diagnostics, "UNKNOWN_REFERENCE");
    CHECK(d.line == 3);
    CHECK(d.column == 6);
  }
  SUBCASE("undeclared flow endpoint") {
    const ParseResult res = parse_scenario(
        "scenario t\ncomponent c1 weight 1.0\n"
        "interact look particle_detector window 0 1\nflow look c1 -> ghost ramp 10\n");
    CHECK_FALSE(res.ok());
    CHECK(has_code(res.diagnostics, "UNKNOWN_REFERENCE"));
  }
  SUBCASE("negative rate") {
    const ParseResult res = parse_scenario(
        "scenario t\ncomponent c1 weight 1.0\ncomponent c2 weight 0.0\n"
        "interact look particle_detector window 0 1\nflow look c1 -> c2 ramp -5\n");
    CHECK_FALSE(res.ok());
    const Diagnostic& d = first_with(res.diagnostics, "NEGATIVE_RATE");
    CHECK(d.line == 5);
  }
  SUBCASE("weights must sum to one") {
    const ParseResult res = parse_scenario("scenario t\ncomponent c1 weight 0.5\n");
    CHECK_FALSE(res.ok());
    CHECK(has_code(res.diagnostics, "BAD_NORMALIZATION"));
  }
  SUBCASE("syntax variants") {
    for (const char* bad : {
             "scenario\n",                                        // missing name
             "scenario t\nwidget c1\n",                           // unknown keyword
             "scenario t\ncomponent c1 weight x\n",               // non-numeric
             "scenario t\ncomponent c1 weight 1.0 brain k wat\n", // bad brain kind
             "scenario t\nscenario t2\n",                         // duplicate header
             "scenario t\ncomponent c1 weight 1.0\n"
             "interact a particle_detector window 1 1\n",         // empty window
             "scenario t\ncomponent c1 weight 1.0\n"
             "interact a physiological window 0 1\n",             // missing observer
         }) {
      const ParseResult res = parse_scenario(bad);
      CHECK_FALSE(res.ok());
      CHECK_FALSE(res.diagnostics.empty());
    }
  }
  SUBCASE("parse_scenario_or_throw carries the code") {
    try {
      parse_scenario_or_throw("scenario t\ncomponent c1 weight 0.5\n");
      FAIL("expected throw");
    } catch (const SimError& e) {
      CHECK(e.code() == "BAD_NORMALIZATION");
    }
  }
}

TEST_CASE("canonical formatting round-trips every shipped scenario") {
  for (const auto& name : catalog_names()) {
    CAPTURE(name);
    const ParseResult p1 = parse_scenario(builtin_text(name));
    REQUIRE(p1.ok());
    const std::string canon = format_scenario(*p1.scenario);
    const ParseResult p2 = parse_scenario(canon);
    REQUIRE(p2.ok());
    CHECK(*p2.scenario == *p1.scenario);
    CHECK(format_scenario(*p2.scenario) == canon);
  }
}

TEST_CASE("structural lint") {
  SUBCASE("clean scenario") {
    const std::vector<Diagnostic> ds = validate(builtin("eq3-entangled-observer"));
    CHECK_FALSE(has_code(ds, "CONSCIOUS_CREATION"));
    CHECK(has_code(ds, "RULE4_CLEAN"));
  }
  SUBCASE("anomalous capture edge is reported") {
    const std::vector<Diagnostic> ds = validate(builtin("outside-terminal-observer"));
    CHECK(has_code(ds, "RULE4_REMOVED"));
    CHECK_FALSE(has_code(ds, "RULE4_CLEAN"));
  }
  SUBCASE("minting consciousness without a choice is a violation") {
    const ParseResult res = parse_scenario(
        "scenario t\nobserver k\n"
        "component c1 weight 1.0 brain k x\n"
        "component c2 weight 0.0 brain k conscious B9\n"
        "interact look physiological observer k window 0 1\n"
        "flow look c1 -> c2 ramp 10\n");
    REQUIRE(res.ok());
    const std::vector<Diagnostic> ds = validate(*res.scenario);
    const Diagnostic& d = first_with(ds, "CONSCIOUS_CREATION");
    CHECK(d.severity == Diagnostic::Severity::Violation);
  }
  SUBCASE("carrying an acquired state forward is allowed") {
    const std::vector<Diagnostic> ds = validate(builtin("intermediate-outside-observer"));
    CHECK_FALSE(has_code(ds, "CONSCIOUS_CREATION"));
  }
}

TEST_CASE("scenario library") {
  const auto& names = catalog_names();
  CHECK(names.size() == 14);
  CHECK(names.front() == "eq1-detector");
  CHECK(std::find(names.begin(), names.end(), "nondemolition") != names.end());

  for (const auto& name : names) {
    CAPTURE(name);
    const Scenario sc = builtin(name);
    CHECK(sc.name == name);
    CHECK_FALSE(sc.components.empty());
  }

  SUBCASE("structure pins") {
    const Scenario eq1 = builtin("eq1-detector");
    CHECK(eq1.components.size() == 2);
    CHECK(eq1.interactions.size() == 1);
    CHECK(eq1.observers.empty());
    const Scenario cat2 = builtin("cat-v2-outside");
    CHECK(cat2.interaction("devwake")->kind == InteractionKind::DetectorDetector);
    const Scenario drift = builtin("drift-consciousness");
    CHECK(drift.flows.size() == 3);
  }
  SUBCASE("unknown name") {
    try {
      builtin("does-not-exist");
      FAIL("expected throw");
    } catch (const SimError& e) {
      CHECK(e.code() == "UNKNOWN_SCENARIO");
    }
  }
}

TEST_CASE("parser survives random and mutated input") {
  std::uint64_t rng = 0xfeedbeefULL;

  SUBCASE("random byte strings") {
    for (int i = 0; i < 100000; ++i) {
      const int len = static_cast<int>(splitmix(rng) % 120);
      std::string text;
      text.reserve(len);
      for (int j = 0; j < len; ++j)
        text.push_back(static_cast<char>(splitmix(rng) % 256));
      const ParseResult res = parse_scenario(text);
      CHECK((res.ok() || !res.diagnostics.empty()));
    }
  }
  SUBCASE("mutations of a valid scenario") {
    const std::string base = builtin_text("eq5-terminal-observer");
    for (int i = 0; i < 20000; ++i) {
      std::string text = base;
      const int edits = 1 + static_cast<int>(splitmix(rng) % 4);
      for (int e = 0; e < edits; ++e) {
        const std::size_t pos = splitmix(rng) % text.size();
        switch (splitmix(rng) % 3) {
          case 0: text[pos] = static_cast<char>(splitmix(rng) % 256); break;
          case 1: text.erase(pos, 1); break;
          default: text.insert(pos, 1, static_cast<char>(splitmix(rng) % 128)); break;
        }
      }
      const ParseResult res = parse_scenario(text);
      CHECK((res.ok() || !res.diagnostics.empty()));
      if (res.ok()) {
        // whatever still parses must round-trip
        const ParseResult again = parse_scenario(format_scenario(*res.scenario));
        CHECK(again.ok());
      }
    }
  }
}
