#include "roe/harness.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <tuple>

#include "roe/stats.hpp"

namespace roe {

namespace {

// Record fields are scenario identifiers and may contain anything the
// tokenizer accepts, so escape the separators key() uses.
void append_escaped(std::string& out, const std::string& s) {
  for (char ch : s) {
    if (ch == '\\' || ch == '|' || ch == ';' || ch == ':' || ch == '@' || ch == '/' ||
        ch == '[' || ch == ']' || ch == '{' || ch == '}')
      out.push_back('\\');
    out.push_back(ch);
  }
}

}  // namespace

std::string ObservableRecord::key() const {
  std::string k = "acq{";
  for (const auto& [obs, steps] : acquisitions) {
    append_escaped(k, obs);
    k += ":[";
    for (const auto& st : steps) {
      append_escaped(k, st.state);
      k += '@';
      append_escaped(k, st.particle);
      k += '/';
      append_escaped(k, st.detector);
      k += ';';
    }
    k += "];";
  }
  k += "}fin{";
  for (const auto& f : finals) {
    append_escaped(k, f.particle);
    k += '/';
    append_escaped(k, f.detector);
    k += '[';
    for (const auto& [obs, st] : f.conscious) {
      append_escaped(k, obs);
      k += ':';
      append_escaped(k, st);
      k += ';';
    }
    k += "];";
  }
  k += '}';
  return k;
}

namespace {

bool final_less(const FinalBranch& a, const FinalBranch& b) {
  return std::tie(a.particle, a.detector, a.conscious) <
         std::tie(b.particle, b.detector, b.conscious);
}

ObservableRecord finalize_record(const std::map<std::string, std::vector<AcquisitionStep>>& acq,
                                 const Superposition& s) {
  ObservableRecord r;
  r.acquisitions = acq;
  for (const auto& c : s.components) {
    if (!c.alive || c.weight < kObservableWeightFloor) continue;
    FinalBranch f;
    f.particle = c.particle;
    f.detector = c.detector;
    for (const auto& b : c.brains)
      if (b.kind == BrainKind::Conscious) f.conscious.emplace_back(b.observer, b.state);
    std::sort(f.conscious.begin(), f.conscious.end());
    r.finals.push_back(std::move(f));
  }
  // Components that agree on every observable label describe one world.
  std::sort(r.finals.begin(), r.finals.end(), final_less);
  r.finals.erase(std::unique(r.finals.begin(), r.finals.end()), r.finals.end());
  return r;
}

// Whether a trigger on `c` would change anything an observer could ever
// notice. Triggers failing this are dropped; by Poisson thinning the
// remaining process is exactly the law of the observable events.
bool hit_changes_anything(const Superposition& s, const RuleSet& rules, const Component& c) {
  if (c.has_ready()) return true;
  if (rules.regime == Regime::Observer) return false;
  for (const auto& o : s.components) {
    if (o.id == c.id || !o.alive || o.weight <= 0.0) continue;
    if (!rules.rule1a_require_incoherence || locally_incoherent(c, o)) return true;
  }
  return false;
}

struct HitApplication {
  Superposition state;
  std::vector<std::pair<std::string, AcquisitionStep>> acquired;  // observer -> step
  StochasticEvent event;
};

HitApplication apply_hit(const Superposition& s, const RuleSet& rules,
                         const std::string& chosen, double time) {
  HitApplication h;
  h.event.time = time;
  h.event.chosen = chosen;
  h.event.applied_rules = {"1"};

  const Component* c = s.find(chosen);
  if (!c || !c->alive)
    throw SimError("DEAD_COMPONENT", "hit on missing or dead component '" + chosen + "'");

  const bool ready = c->has_ready();
  if (ready) {
    for (const auto& b : c->brains)
      if (b.kind == BrainKind::Ready)
        h.acquired.push_back({b.observer, {b.state, c->particle, c->detector}});
    std::sort(h.acquired.begin(), h.acquired.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  h.state = s;
  if (rules.regime == Regime::Observer) {
    if (ready) {
      h.state = apply_rule3(s, h.event);
      h.event.applied_rules.push_back("3");
      h.event.reduced = true;
    }
  } else {
    bool any_to_zero = false;
    for (const auto& o : s.components) {
      if (o.id == chosen || !o.alive || o.weight <= 0.0) continue;
      if (!rules.rule1a_require_incoherence || locally_incoherent(*c, o)) {
        any_to_zero = true;
        break;
      }
    }
    if (any_to_zero) {
      h.state = rules.rule1a_require_incoherence ? apply_rule1a(s, h.event)
                                                 : zero_others(s, chosen);
      h.event.applied_rules.push_back("1a");
      h.event.reduced = true;
    }
    if (ready) {
      h.state = apply_rule3mod(h.state, h.event);
      h.event.applied_rules.push_back("3mod");
    }
  }
  h.state.time = time;
  return h;
}

char kind_tag(BrainKind k) {
  switch (k) {
    case BrainKind::Absent: return 'x';
    case BrainKind::UnknownX: return 'u';
    case BrainKind::Ready: return 'r';
    case BrainKind::Conscious: return 'c';
  }
  return '?';
}

struct Branch {
  Superposition state;
  std::map<std::string, std::vector<AcquisitionStep>> acq;
  double prob = 1.0;
};

// Branches merge only when bit-identical in every dynamic quantity and in
// their acquisition history.
std::string branch_key(const Branch& b) {
  std::string k;
  for (const auto& c : b.state.components) {
    k += c.id;
    k += '|';
    char buf[17] = {};
    const auto bits = std::bit_cast<std::uint64_t>(c.weight);
    std::to_chars(buf, buf + 16, bits, 16);
    k += buf;
    k += c.alive ? "|a|" : "|d|";
    for (const auto& lb : c.brains) {
      k += lb.observer;
      k += ':';
      k += kind_tag(lb.kind);
      k += ':';
      k += lb.state;
      k += ';';
    }
    k += '#';
  }
  k += "##";
  ObservableRecord so_far;
  so_far.acquisitions = b.acq;
  k += so_far.key();
  return k;
}

std::vector<double> slice_boundaries(const Scenario& sc, int time_slices) {
  std::vector<double> cuts{0.0};
  for (const auto& in : sc.interactions) {
    const double width = in.t_end - in.t_start;
    for (int k = 0; k <= time_slices; ++k)
      cuts.push_back(in.t_start + width * static_cast<double>(k) / time_slices);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [](double t) { return t < 0.0; }),
             cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

void merge_into(std::map<std::string, Branch>& dst, Branch&& b) {
  const std::string k = branch_key(b);
  auto it = dst.find(k);
  if (it == dst.end())
    dst.emplace(k, std::move(b));
  else
    it->second.prob += b.prob;
}

}  // namespace

OutcomeDistribution enumerate_outcomes(const Scenario& sc, const RuleSet& rules,
                                       int time_slices) {
  if (time_slices < 1) throw std::invalid_argument("time_slices must be >= 1");

  const FlowGraph base = sc.flow_graph();
  const std::vector<double> cuts = slice_boundaries(sc, time_slices);

  OutcomeDistribution dist;
  double pruned = 0.0;

  std::vector<Branch> branches;
  branches.push_back({sc.initial_state(), {}, 1.0});

  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double u = cuts[i];
    const double v = cuts[i + 1];
    if (!(v > u)) continue;

    std::map<std::string, Branch> next;
    for (auto& br : branches) {
      const FlowGraph g = rules.rule4_enabled ? rule4_filter(base, br.state) : base;

      struct Candidate {
        const Component* c;
        double integral;
        bool effective;
      };
      std::vector<Candidate> cands;
      double lambda_eff = 0.0;
      for (const auto& c : br.state.components) {
        if (!c.alive) continue;
        double integral = 0.0;
        for (const auto& e : g.edges) {
          if (e.target != c.id) continue;
          const Component* src = br.state.find(e.source);
          if (!src || !src->alive) continue;
          integral += e.profile.integral(u, v);
        }
        if (integral <= 0.0) continue;
        const bool eff = hit_changes_anything(br.state, rules, c);
        cands.push_back({&c, integral, eff});
        if (eff) lambda_eff += integral;
      }

      Superposition evolved = evolve_exact(br.state, g, v);
      dist.max_conservation_error = std::max(dist.max_conservation_error,
                                             std::abs(total_weight(evolved) - 1.0));

      if (lambda_eff <= 0.0) {
        merge_into(next, Branch{std::move(evolved), br.acq, br.prob});
        continue;
      }

      const double p_none = std::exp(-lambda_eff);
      const double p_hit = -std::expm1(-lambda_eff);
      merge_into(next, Branch{evolved, br.acq, br.prob * p_none});
      for (const auto& cd : cands) {
        if (!cd.effective) continue;
        const double pc = br.prob * p_hit * (cd.integral / lambda_eff);
        if (pc <= 0.0) continue;
        HitApplication h = apply_hit(evolved, rules, cd.c->id, v);
        dist.max_conservation_error = std::max(dist.max_conservation_error,
                                               std::abs(total_weight(h.state) - 1.0));
        Branch nb{std::move(h.state), br.acq, pc};
        for (const auto& [obs, step] : h.acquired) nb.acq[obs].push_back(step);
        merge_into(next, std::move(nb));
      }
      if (next.size() > kBranchCap)
        throw SimError("STATE_EXPLOSION", "branch count exceeded " +
                                              std::to_string(kBranchCap));
    }

    branches.clear();
    for (auto& [k, b] : next) {
      if (b.prob < kBranchPruneFloor) {
        pruned += b.prob;
        continue;
      }
      branches.push_back(std::move(b));
    }
  }

  double total = 0.0;
  std::map<std::string, double> mass;
  for (auto& br : branches) {
    ObservableRecord rec = finalize_record(br.acq, br.state);
    const std::string k = rec.key();
    mass[k] += br.prob;
    total += br.prob;
    dist.records.emplace(k, std::move(rec));
  }
  if (total > 0.0)
    for (auto& [k, p] : mass) dist.probabilities[k] = p / total;
  dist.discretization_bound = pruned;
  dist.trials = 0;
  return dist;
}

TrialResult run_single(const Scenario& sc, const RuleSet& rules, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const FlowGraph base = sc.flow_graph();

  TrialResult tr;
  Superposition state = sc.initial_state();
  std::map<std::string, std::vector<AcquisitionStep>> acq;

  auto audit = [&](const Superposition& s) {
    tr.max_conservation_error =
        std::max(tr.max_conservation_error, std::abs(total_weight(s) - 1.0));
  };

  std::vector<double> cuts{0.0};
  for (const auto& in : sc.interactions) {
    if (in.t_start > 0.0) cuts.push_back(in.t_start);
    if (in.t_end > 0.0) cuts.push_back(in.t_end);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double seg_end = cuts[i + 1];
    while (state.time < seg_end) {
      const FlowGraph g = rules.rule4_enabled ? rule4_filter(base, state) : base;

      std::vector<std::string> cands;
      for (const auto& c : state.components) {
        if (!c.alive) continue;
        bool inflow = false;
        for (const auto& e : g.edges) {
          if (e.target != c.id) continue;
          const Component* src = state.find(e.source);
          if (!src || !src->alive) continue;
          if (e.profile.integral(state.time, seg_end) > 0.0) {
            inflow = true;
            break;
          }
        }
        if (inflow && hit_changes_anything(state, rules, c)) cands.push_back(c.id);
      }

      auto ev = sample_hit_among(state, g, cands, state.time, seg_end, rng);
      if (!ev) {
        state = evolve_exact(state, g, seg_end);
        audit(state);
        break;
      }

      state = evolve_exact(state, g, ev->time);
      audit(state);
      HitApplication h = apply_hit(state, rules, ev->chosen, ev->time);
      audit(h.state);
      state = std::move(h.state);
      for (const auto& [obs, step] : h.acquired) {
        acq[obs].push_back(step);
        tr.acquisition_times[obs].push_back(ev->time);
      }
      tr.events.push_back(h.event);
    }
  }

  tr.record = finalize_record(acq, state);
  return tr;
}

OutcomeDistribution run_trials(const Scenario& sc, const RuleSet& rules, std::uint64_t n,
                               std::uint64_t seed) {
  OutcomeDistribution dist;
  dist.trials = n;
  for (std::uint64_t i = 0; i < n; ++i) {
    TrialResult tr = run_single(sc, rules, mix_seed(seed, i));
    const std::string k = tr.record.key();
    auto [it, fresh] = dist.counts.try_emplace(k, 0);
    it->second += 1;
    if (fresh) dist.records.emplace(k, std::move(tr.record));
    dist.max_conservation_error =
        std::max(dist.max_conservation_error, tr.max_conservation_error);
  }
  for (const auto& [k, c] : dist.counts)
    dist.probabilities[k] = static_cast<double>(c) / static_cast<double>(n);
  return dist;
}

ComparisonVerdict compare(const OutcomeDistribution& a, const OutcomeDistribution& b,
                          CompareMode mode, double tvd_tolerance, double alpha) {
  if (a.probabilities.empty() || b.probabilities.empty())
    throw SimError("EMPTY_DISTRIBUTION", "comparison requires two nonempty distributions");

  ComparisonVerdict v;
  v.mode = mode;
  v.total_variation = total_variation(a.probabilities, b.probabilities);
  if (mode == CompareMode::Exact) {
    v.equal = v.total_variation <= tvd_tolerance;
    return v;
  }

  if (a.trials == 0 || b.trials == 0)
    throw SimError("EMPTY_DISTRIBUTION",
                   "Monte Carlo comparison requires sampled distributions on both sides");
  const ChiSquareResult res = two_sample_chi_square(a.counts, b.counts);
  v.chi_square_p = res.p_value;
  v.equal = res.p_value >= alpha;
  return v;
}

}  // namespace roe
