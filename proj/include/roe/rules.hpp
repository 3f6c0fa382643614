#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "roe/state.hpp"

namespace roe {

enum class Regime { Observer, Objective };

// Which reduction rules govern a run. The two mutant switches weaken the
// ruleset on purpose; the harness uses them to prove it can detect regimes
// that are NOT observationally equivalent.
struct RuleSet {
  Regime regime = Regime::Observer;
  bool rule4_enabled = true;
  // Objective regime only: when false, a stochastic hit reduces every other
  // component even if it is coherent with the chosen one.
  bool rule1a_require_incoherence = true;
};

inline RuleSet observer_rules() { return {Regime::Observer, true, true}; }
inline RuleSet objective_rules() { return {Regime::Objective, true, true}; }

// A stochastic trigger firing. `applied_rules` holds the serialized rule ids
// ("1", "1a", "3", "3mod") that actually did something at this event;
// `reduced` is true only when some other component was zeroed.
struct StochasticEvent {
  double time = 0.0;
  std::string chosen;
  std::vector<std::string> applied_rules;
  bool reduced = false;
};

// Instantaneous hit rate for a component: the sum of the positive rates of
// its inbound edges whose source is still alive. A dead branch drives no
// current, so it cannot trigger hits; this is why the superposition is an
// argument. Returns 0 for a missing or dead component.
double hazard(const Superposition& s, const FlowGraph& g, const std::string& component,
              double t);

// Draws the first hit in [t_a, t_b] from the inhomogeneous point process
// whose per-component intensity is hazard(...). Deterministic in rng_seed.
// Expects the graph to be rule-4 filtered already. Empty when no hit occurs.
std::optional<StochasticEvent> sample_hit(const Superposition& s, const FlowGraph& g,
                                          double t_a, double t_b, std::uint64_t rng_seed);

// Same draw restricted to an explicit candidate set, consuming randomness
// from a caller-owned generator so several draws can share one stream.
std::optional<StochasticEvent> sample_hit_among(const Superposition& s, const FlowGraph& g,
                                                const std::vector<std::string>& candidates,
                                                double t_a, double t_b, std::mt19937_64& rng);

// Rule 1a gate: two components are locally incoherent iff their environment
// classes differ.
bool locally_incoherent(const Component& a, const Component& b);

// Rule 3 (observer regime): the chosen component's ready brain states become
// conscious and everything else is reduced to zero. Throws NO_READY_BRAIN if
// the chosen component has no ready label.
Superposition apply_rule3(const Superposition& s, const StochasticEvent& e);

// Rule 3mod (objective regime): conversion only, no weight changes.
Superposition apply_rule3mod(const Superposition& s, const StochasticEvent& e);

// Rule 1a (objective regime): zeroes every other weighted component that is
// locally incoherent with the chosen one, then renormalizes the survivors.
// If nothing qualifies (all coherent), the state is returned unchanged.
Superposition apply_rule1a(const Superposition& s, const StochasticEvent& e);

// Rule 2: derives the component a physiological interaction creates for an
// observer. The new component starts at weight 0 with a READY label (never
// conscious). Empty env means inherit the parent's environment class.
Component rule2_create(const Component& parent, const std::string& observer,
                       const std::string& ready_state, const std::string& new_id,
                       const std::string& env = "");

// Rule 4: removes every edge that would carry an observer from one ready
// brain state to a DIFFERENT ready brain state of the same observer (an
// anomalous capture). Carrying the same ready state along is allowed, and a
// source whose label has since become conscious may feed a new ready state,
// so the filter is meant to be re-applied whenever labels change.
FlowGraph rule4_filter(const FlowGraph& g, const Superposition& s);

// Uniform double in [0, 1) built from the high 53 bits of a 64-bit draw;
// used everywhere randomness is needed so results are platform-stable.
double uniform_from_bits(std::uint64_t bits);

// SplitMix64 mix step, used to derive independent per-trial seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace roe
