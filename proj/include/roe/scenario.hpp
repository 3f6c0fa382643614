#pragma once

#include <string>
#include <vector>

#include "roe/state.hpp"

namespace roe {

enum class InteractionKind { ParticleDetector, Physiological, DetectorDetector };

struct InteractionSpec {
  std::string name;
  InteractionKind kind = InteractionKind::ParticleDetector;
  std::string observer;  // physiological interactions only
  double t_start = 0.0;
  double t_end = 1.0;

  friend bool operator==(const InteractionSpec&, const InteractionSpec&) = default;
};

struct FlowSpec {
  std::string interaction;
  std::string source;
  std::string target;
  ProfileKind profile = ProfileKind::Ramp;
  double peak = 0.0;

  friend bool operator==(const FlowSpec&, const FlowSpec&) = default;
};

// A parsed scenario: the initial superposition, the interaction timeline and
// the current flows each interaction drives. Immutable once parsed.
struct Scenario {
  std::string name;
  std::vector<std::string> observers;
  std::vector<Component> components;
  std::vector<InteractionSpec> interactions;
  std::vector<FlowSpec> flows;

  Superposition initial_state() const;
  FlowGraph flow_graph() const;
  double end_time() const;
  const InteractionSpec* interaction(const std::string& name) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

}  // namespace roe
