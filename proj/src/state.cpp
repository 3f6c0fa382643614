#include "roe/state.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace roe {

SimError::SimError(std::string code, const std::string& message)
    : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

const BrainLabel* Component::brain_for(const std::string& observer) const {
  for (const auto& b : brains)
    if (b.observer == observer) return &b;
  return nullptr;
}

BrainLabel* Component::brain_for(const std::string& observer) {
  for (auto& b : brains)
    if (b.observer == observer) return &b;
  return nullptr;
}

bool Component::has_ready() const {
  return std::any_of(brains.begin(), brains.end(),
                     [](const BrainLabel& b) { return b.kind == BrainKind::Ready; });
}

const Component* Superposition::find(const std::string& id) const {
  for (const auto& c : components)
    if (c.id == id) return &c;
  return nullptr;
}

Component* Superposition::find(const std::string& id) {
  for (auto& c : components)
    if (c.id == id) return &c;
  return nullptr;
}

double RateProfile::value(double t) const {
  if (t < t0 || t >= t1) return 0.0;
  if (kind == ProfileKind::Const) return peak;
  return peak * (t - t0) / (t1 - t0);
}

double RateProfile::integral(double a, double b) const {
  const double lo = std::max(a, t0);
  const double hi = std::min(b, t1);
  if (hi <= lo) return 0.0;
  if (kind == ProfileKind::Const) return peak * (hi - lo);
  const double span = t1 - t0;
  const double u = lo - t0;
  const double v = hi - t0;
  return peak * (v * v - u * u) / (2.0 * span);
}

double total_weight(const Superposition& s) {
  double sum = 0.0;
  for (const auto& c : s.components)
    if (c.alive) sum += c.weight;
  return sum;
}

namespace {

void check_normalized(const Superposition& s) {
  const double w = total_weight(s);
  if (std::abs(w - 1.0) > kNormInputTolerance)
    throw SimError("UNNORMALIZED_INPUT",
                   "total weight " + std::to_string(w) + " outside 1 +- 1e-6");
}

void deposit(Component& c, double gain) {
  if (gain <= 0.0) return;
  c.weight += gain;
  c.alive = true;
}

}  // namespace

Superposition evolve_step(const Superposition& s, const FlowGraph& g, double dt) {
  if (!(dt > 0.0)) throw SimError("NEGATIVE_DT", "dt must be positive");
  check_normalized(s);

  Superposition out = s;
  const double t = s.time;

  // Transfers are computed from the pre-step weights (Jacobi update), then
  // capped per source so a source never goes negative within one step.
  std::map<std::string, double> outflow;
  std::vector<double> amounts(g.edges.size(), 0.0);
  for (size_t i = 0; i < g.edges.size(); ++i) {
    const FlowEdge& e = g.edges[i];
    const Component* src = s.find(e.source);
    if (!src || !src->alive || src->weight <= 0.0) continue;
    const double rate = std::max(e.profile.value(t), 0.0);
    if (rate <= 0.0) continue;
    amounts[i] = rate * dt * src->weight;
    outflow[e.source] += amounts[i];
  }
  for (size_t i = 0; i < g.edges.size(); ++i) {
    if (amounts[i] <= 0.0) continue;
    const FlowEdge& e = g.edges[i];
    Component* dst = out.find(e.target);
    if (!dst) continue;
    const Component* src = s.find(e.source);
    const double total = outflow[e.source];
    double amount = amounts[i];
    if (total > src->weight) amount *= src->weight / total;
    out.find(e.source)->weight -= amount;
    deposit(*dst, amount);
  }
  for (auto& c : out.components)
    if (c.weight < 0.0) c.weight = 0.0;
  out.time = s.time + dt;
  return out;
}

namespace {

struct SourceGroup {
  std::vector<size_t> edge_indices;
};

// True when the listed profiles keep a fixed ratio throughout [a, b], so the
// drained weight can be split by integral share exactly.
bool proportional_over(const FlowGraph& g, const std::vector<size_t>& idx, double a,
                       double b) {
  size_t active = 0;
  size_t first = idx.size();
  for (size_t i : idx) {
    if (g.edges[i].profile.integral(a, b) <= 0.0) continue;
    if (active == 0) first = i;
    ++active;
    const RateProfile& p = g.edges[i].profile;
    const RateProfile& q = g.edges[first].profile;
    if (p.kind != q.kind || p.t0 != q.t0 || p.t1 != q.t1) return false;
  }
  return true;
}

void advance_interval(Superposition& s, const FlowGraph& g, double a, double b) {
  if (b <= a) return;

  std::map<std::string, SourceGroup> by_source;
  for (size_t i = 0; i < g.edges.size(); ++i)
    by_source[g.edges[i].source].edge_indices.push_back(i);

  struct Delta {
    std::string id;
    double amount;
  };
  std::vector<Delta> gains;
  std::vector<Delta> losses;

  for (auto& [source_id, group] : by_source) {
    const Component* src = s.find(source_id);
    if (!src || !src->alive || src->weight <= 0.0) continue;

    int substeps = proportional_over(g, group.edge_indices, a, b) ? 1 : 1024;
    const double w0 = src->weight;
    double w = w0;
    for (int k = 0; k < substeps; ++k) {
      const double u = a + (b - a) * k / substeps;
      const double v = a + (b - a) * (k + 1) / substeps;
      double total_rate = 0.0;
      std::vector<double> part(group.edge_indices.size(), 0.0);
      for (size_t j = 0; j < group.edge_indices.size(); ++j) {
        part[j] = g.edges[group.edge_indices[j]].profile.integral(u, v);
        total_rate += part[j];
      }
      if (total_rate <= 0.0) continue;
      const double drained = w * -std::expm1(-total_rate);
      for (size_t j = 0; j < group.edge_indices.size(); ++j) {
        if (part[j] <= 0.0) continue;
        gains.push_back({g.edges[group.edge_indices[j]].target,
                         drained * part[j] / total_rate});
      }
      w -= drained;
    }
    losses.push_back({source_id, w0 - w});
  }

  for (const auto& d : losses) s.find(d.id)->weight -= d.amount;
  for (const auto& d : gains) {
    Component* c = s.find(d.id);
    if (c) deposit(*c, d.amount);
  }
}

}  // namespace

Superposition evolve_exact(const Superposition& s, const FlowGraph& g, double t_end) {
  Superposition out = s;
  if (t_end <= s.time) {
    out.time = std::max(s.time, t_end);
    return out;
  }

  // Split at profile window boundaries so each interval sees smooth rates.
  std::vector<double> cuts{s.time, t_end};
  for (const auto& e : g.edges) {
    if (e.profile.t0 > s.time && e.profile.t0 < t_end) cuts.push_back(e.profile.t0);
    if (e.profile.t1 > s.time && e.profile.t1 < t_end) cuts.push_back(e.profile.t1);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    advance_interval(out, g, cuts[i], cuts[i + 1]);
  out.time = t_end;
  return out;
}

Superposition zero_others(const Superposition& s, const std::string& keep) {
  const Component* kept = s.find(keep);
  if (!kept || !kept->alive)
    throw SimError("DEAD_COMPONENT", "component '" + keep + "' is not alive");

  Superposition out = s;
  for (auto& c : out.components) {
    if (c.id == keep) {
      c.weight = 1.0;
      continue;
    }
    if (c.weight > 0.0) {
      c.weight = 0.0;
      c.alive = false;
    }
  }
  return out;
}

}  // namespace roe
