#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace roe {

// Conservation tolerance between reductions.
inline constexpr double kWeightTolerance = 1e-9;
// Accepted drift on inputs that are required to be normalized.
inline constexpr double kNormInputTolerance = 1e-6;

// Every operation that rejects its input throws SimError. `code` is a stable
// machine-readable identifier (e.g. "NEGATIVE_DT"); what() adds detail.
class SimError : public std::runtime_error {
 public:
  SimError(std::string code, const std::string& message);
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

enum class BrainKind { Absent, UnknownX, Ready, Conscious };

// One observer's brain-state tag on a component. UnknownX carries no state
// name. A kind only ever moves forward: UnknownX/Absent -> Ready -> Conscious.
struct BrainLabel {
  std::string observer;
  BrainKind kind = BrainKind::UnknownX;
  std::string state;  // e.g. "B0"; empty for UnknownX

  friend bool operator==(const BrainLabel&, const BrainLabel&) = default;
};

// One term of a superposition. `weight` is a squared amplitude; the labels
// are opaque tags. `env` is the environment class used by the local
// incoherence test: two components are incoherent iff their env differs.
// A component with weight 0 may be alive: it is a declared flow target that
// has not received current yet. alive=false means a reduction zeroed it.
struct Component {
  std::string id;
  double weight = 0.0;
  std::string particle = "-";
  std::string detector = "-";
  std::vector<BrainLabel> brains;
  std::string env;
  bool alive = true;

  const BrainLabel* brain_for(const std::string& observer) const;
  BrainLabel* brain_for(const std::string& observer);
  bool has_ready() const;

  friend bool operator==(const Component&, const Component&) = default;
};

struct Superposition {
  std::vector<Component> components;
  double time = 0.0;

  const Component* find(const std::string& id) const;
  Component* find(const std::string& id);

  friend bool operator==(const Superposition&, const Superposition&) = default;
};

enum class ProfileKind { Const, Ramp };

// Time profile of one flow edge, in units of fraction of the source weight
// drained per unit time. Zero outside [t0, t1]. Ramp rises linearly from 0
// at t0 to `peak` at t1; Const holds `peak` across the whole window.
struct RateProfile {
  ProfileKind kind = ProfileKind::Ramp;
  double t0 = 0.0;
  double t1 = 1.0;
  double peak = 0.0;

  double value(double t) const;
  // Integral of value(t) over [a, b], clamped to the window.
  double integral(double a, double b) const;

  friend bool operator==(const RateProfile&, const RateProfile&) = default;
};

struct FlowEdge {
  std::string source;
  std::string target;
  RateProfile profile;
  std::string interaction;  // owning interaction name, kept for diagnostics

  friend bool operator==(const FlowEdge&, const FlowEdge&) = default;
};

struct FlowGraph {
  std::vector<FlowEdge> edges;

  friend bool operator==(const FlowGraph&, const FlowGraph&) = default;
};

// Sum of weights over alive components.
double total_weight(const Superposition& s);

// One forward-Euler step: each edge moves rate(t)*dt*source_weight from its
// source to its target, with per-source capping so no weight goes negative;
// the clock advances by dt. Throws NEGATIVE_DT and UNNORMALIZED_INPUT.
Superposition evolve_step(const Superposition& s, const FlowGraph& g, double dt);

// Integrates the flow from s.time to t_end assuming no reduction occurs in
// between. Exact when all outgoing profiles of each source are mutually
// proportional over the interval (true for every shipped scenario); falls
// back to fine exponential substeps otherwise. Weight that arrives at a dead
// component revives it: current keeps flowing after a reduction.
Superposition evolve_exact(const Superposition& s, const FlowGraph& g, double t_end);

// The reduction primitive: every component other than `keep` that carries
// weight is zeroed and marked dead, and `keep` is rescaled to weight 1.
// Weightless components stay alive (declared targets may still receive
// current later). Throws DEAD_COMPONENT if `keep` is missing or dead.
Superposition zero_others(const Superposition& s, const std::string& keep);

}  // namespace roe
