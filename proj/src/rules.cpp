#include "roe/rules.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace roe {

double hazard(const Superposition& s, const FlowGraph& g, const std::string& component,
              double t) {
  const Component* c = s.find(component);
  if (!c || !c->alive) return 0.0;
  double rate = 0.0;
  for (const auto& e : g.edges) {
    if (e.target != component) continue;
    const Component* src = s.find(e.source);
    if (!src || !src->alive) continue;
    rate += std::max(e.profile.value(t), 0.0);
  }
  return rate;
}

double uniform_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

struct IntensitySlice {
  double u, v;      // time bounds
  double lu, lv;    // total intensity at u and v (linear in between)
};

std::vector<std::string> hit_candidates(const Superposition& s, const FlowGraph& g) {
  std::vector<std::string> ids;
  for (const auto& c : s.components) {
    if (!c.alive) continue;
    for (const auto& e : g.edges) {
      if (e.target != c.id) continue;
      const Component* src = s.find(e.source);
      if (src && src->alive) {
        ids.push_back(c.id);
        break;
      }
    }
  }
  return ids;
}

}  // namespace

std::optional<StochasticEvent> sample_hit_among(const Superposition& s, const FlowGraph& g,
                                                const std::vector<std::string>& candidates,
                                                double t_a, double t_b, std::mt19937_64& rng) {
  if (t_b <= t_a || candidates.empty()) return std::nullopt;

  std::vector<double> cuts{t_a, t_b};
  for (const auto& e : g.edges) {
    if (e.profile.t0 > t_a && e.profile.t0 < t_b) cuts.push_back(e.profile.t0);
    if (e.profile.t1 > t_a && e.profile.t1 < t_b) cuts.push_back(e.profile.t1);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<IntensitySlice> slices;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    IntensitySlice sl{cuts[i], cuts[i + 1], 0.0, 0.0};
    for (const auto& id : candidates) {
      sl.lu += hazard(s, g, id, sl.u);
      // The intensity is linear within a slice, so evaluating just below the
      // right boundary gives its limit there (profiles are zero at t1).
      sl.lv += hazard(s, g, id, sl.v - (sl.v - sl.u) * 1e-12);
    }
    slices.push_back(sl);
  }

  const double target = -std::log1p(-uniform_from_bits(rng()));
  double accumulated = 0.0;
  for (const auto& sl : slices) {
    const double area = 0.5 * (sl.lu + sl.lv) * (sl.v - sl.u);
    if (accumulated + area < target) {
      accumulated += area;
      continue;
    }
    // Solve for the hit time inside this slice: lambda(t) = lu + m*(t-u).
    const double need = target - accumulated;
    const double m = (sl.lv - sl.lu) / (sl.v - sl.u);
    const double disc = sl.lu * sl.lu + 2.0 * m * need;
    const double denom = sl.lu + std::sqrt(std::max(disc, 0.0));
    double dt;
    if (denom <= 0.0)
      dt = sl.v - sl.u;
    else
      dt = 2.0 * need / denom;
    const double t_hit = std::min(sl.u + dt, sl.v);

    double total = 0.0;
    std::vector<double> lam(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
      lam[i] = hazard(s, g, candidates[i], t_hit);
      total += lam[i];
    }
    if (total <= 0.0) {
      // Measure-zero corner (hit time landed exactly on a dead spot); treat
      // as no hit rather than inventing a choice.
      return std::nullopt;
    }
    double pick = uniform_from_bits(rng()) * total;
    size_t last_positive = candidates.size();
    for (size_t i = 0; i < candidates.size(); ++i) {
      if (lam[i] <= 0.0) continue;
      last_positive = i;
      pick -= lam[i];
      if (pick <= 0.0) break;
    }
    StochasticEvent ev;
    ev.time = t_hit;
    ev.chosen = candidates[last_positive];
    return ev;
  }
  return std::nullopt;
}

std::optional<StochasticEvent> sample_hit(const Superposition& s, const FlowGraph& g,
                                          double t_a, double t_b,
                                          std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  return sample_hit_among(s, g, hit_candidates(s, g), t_a, t_b, rng);
}

bool locally_incoherent(const Component& a, const Component& b) {
  return a.env != b.env;
}

namespace {

const Component& chosen_component(const Superposition& s, const StochasticEvent& e) {
  const Component* c = s.find(e.chosen);
  if (!c || !c->alive)
    throw SimError("DEAD_COMPONENT", "chosen component '" + e.chosen + "' is not alive");
  return *c;
}

void make_conscious(Component& c) {
  for (auto& b : c.brains)
    if (b.kind == BrainKind::Ready) b.kind = BrainKind::Conscious;
}

}  // namespace

Superposition apply_rule3(const Superposition& s, const StochasticEvent& e) {
  const Component& c = chosen_component(s, e);
  if (!c.has_ready())
    throw SimError("NO_READY_BRAIN",
                   "component '" + c.id + "' carries no ready brain state");
  Superposition out = zero_others(s, c.id);
  make_conscious(*out.find(c.id));
  return out;
}

Superposition apply_rule3mod(const Superposition& s, const StochasticEvent& e) {
  const Component& c = chosen_component(s, e);
  if (!c.has_ready())
    throw SimError("NO_READY_BRAIN",
                   "component '" + c.id + "' carries no ready brain state");
  Superposition out = s;
  make_conscious(*out.find(c.id));
  return out;
}

Superposition apply_rule1a(const Superposition& s, const StochasticEvent& e) {
  const Component& c = chosen_component(s, e);
  Superposition out = s;
  bool any_zeroed = false;
  for (auto& o : out.components) {
    if (o.id == c.id || !o.alive || o.weight <= 0.0) continue;
    if (!locally_incoherent(c, o)) continue;
    o.weight = 0.0;
    o.alive = false;
    any_zeroed = true;
  }
  if (!any_zeroed) return s;

  double survived = total_weight(out);
  if (survived <= 0.0) {
    // The chosen component itself carried no weight yet; reduction makes it
    // the whole state.
    out.find(c.id)->weight = 1.0;
    return out;
  }
  for (auto& o : out.components)
    if (o.alive) o.weight /= survived;
  return out;
}

Component rule2_create(const Component& parent, const std::string& observer,
                       const std::string& ready_state, const std::string& new_id,
                       const std::string& env) {
  Component c = parent;
  c.id = new_id;
  c.weight = 0.0;
  c.alive = true;
  c.env = env.empty() ? parent.env : env;
  BrainLabel* label = c.brain_for(observer);
  if (!label) {
    c.brains.push_back({observer, BrainKind::Ready, ready_state});
  } else {
    label->kind = BrainKind::Ready;
    label->state = ready_state;
  }
  return c;
}

FlowGraph rule4_filter(const FlowGraph& g, const Superposition& s) {
  FlowGraph out;
  for (const auto& e : g.edges) {
    const Component* src = s.find(e.source);
    const Component* dst = s.find(e.target);
    bool anomalous = false;
    if (src && dst) {
      for (const auto& b : src->brains) {
        if (b.kind != BrainKind::Ready) continue;
        const BrainLabel* d = dst->brain_for(b.observer);
        if (d && d->kind == BrainKind::Ready && d->state != b.state) {
          anomalous = true;
          break;
        }
      }
    }
    if (!anomalous) out.edges.push_back(e);
  }
  return out;
}

}  // namespace roe
