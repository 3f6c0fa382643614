#include "roe/qnd.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <random>

namespace roe {

namespace {

constexpr int kSectors = 4;
constexpr int kEnvs = 3;

std::size_t flat(const SpinPairState& st, int sec, int m1, int m2, int e) {
  return ((static_cast<std::size_t>(sec) * st.d + m1) * st.d + m2) * kEnvs + e;
}

bool particle1_up(SpinSector s) {
  return s == SpinSector::UpDown || s == SpinSector::UpUp;
}

bool particle2_up(SpinSector s) {
  return s == SpinSector::DownUp || s == SpinSector::UpUp;
}

SpinPairState blank_like(const SpinPairState& s) {
  SpinPairState out;
  out.d = s.d;
  out.cyclic = s.cyclic;
  out.amp.assign(s.amp.size(), {0.0, 0.0});
  return out;
}

void validate_prep(const DetectorPrep& prep) {
  if (prep.correlation_sum < 0 || prep.register_size < prep.correlation_sum + 1)
    throw SimError("REGISTER_TOO_SMALL",
                   "register of size " + std::to_string(prep.register_size) +
                       " cannot hold correlated values summing to " +
                       std::to_string(prep.correlation_sum));
  if (!prep.cyclic) {
    const int d = prep.register_size;
    const int k = prep.support;
    if (k < 1 || k > d || (d - k) % 2 != 0)
      throw SimError("REGISTER_TOO_SMALL", "interior support does not fit the register");
    const int m0 = (d - k) / 2;
    for (int j = 0; j < k; ++j) {
      const int m2 = prep.correlation_sum - (m0 + j);
      if (m2 < 0 || m2 >= d)
        throw SimError("REGISTER_TOO_SMALL",
                       "correlated partner value leaves the register range");
    }
  }
}

double sector_weight(const SpinPairState& s, SpinSector sec) {
  double w = 0.0;
  for (int m1 = 0; m1 < s.d; ++m1)
    for (int m2 = 0; m2 < s.d; ++m2)
      for (int e = 0; e < kEnvs; ++e)
        w += std::norm(s.at(sec, m1, m2, static_cast<EnvTag>(e)));
  return w;
}

SpinPairState project_sector(const SpinPairState& s, SpinSector sec) {
  SpinPairState out = blank_like(s);
  double w = 0.0;
  for (int m1 = 0; m1 < s.d; ++m1)
    for (int m2 = 0; m2 < s.d; ++m2)
      for (int e = 0; e < kEnvs; ++e) {
        const auto a = s.at(sec, m1, m2, static_cast<EnvTag>(e));
        out.at(sec, m1, m2, static_cast<EnvTag>(e)) = a;
        w += std::norm(a);
      }
  if (w > 0.0) {
    const double r = 1.0 / std::sqrt(w);
    for (auto& z : out.amp) z *= r;
  }
  return out;
}

SpinPairState mix(const SpinPairState& x, const SpinPairState& y) {
  SpinPairState out = x;
  const double r = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < out.amp.size(); ++i) out.amp[i] = (x.amp[i] + y.amp[i]) * r;
  return out;
}

template <typename Pred>
std::array<std::complex<double>, 9> env_density(const SpinPairState& s, Pred include) {
  std::array<std::complex<double>, 9> rho{};
  double w = 0.0;
  for (int sec = 0; sec < kSectors; ++sec)
    for (int m1 = 0; m1 < s.d; ++m1)
      for (int m2 = 0; m2 < s.d; ++m2)
        for (int e = 0; e < kEnvs; ++e) {
          if (!include(static_cast<SpinSector>(sec), static_cast<EnvTag>(e))) continue;
          const auto ae = s.at(static_cast<SpinSector>(sec), m1, m2, static_cast<EnvTag>(e));
          w += std::norm(ae);
          for (int f = 0; f < kEnvs; ++f) {
            if (!include(static_cast<SpinSector>(sec), static_cast<EnvTag>(f))) continue;
            const auto af = s.at(static_cast<SpinSector>(sec), m1, m2, static_cast<EnvTag>(f));
            rho[e * 3 + f] += ae * std::conj(af);
          }
        }
  if (w > 1e-15)
    for (auto& z : rho) z /= w;
  return rho;
}

double density_overlap(const std::array<std::complex<double>, 9>& a,
                       const std::array<std::complex<double>, 9>& b) {
  std::complex<double> tr = 0.0;
  for (int e = 0; e < 3; ++e)
    for (int f = 0; f < 3; ++f) tr += a[e * 3 + f] * b[f * 3 + e];
  return tr.real();
}

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void check_event(QndEvent ev) {
  switch (ev) {
    case QndEvent::O:
    case QndEvent::A:
    case QndEvent::B:
    case QndEvent::P:
      return;
  }
  throw SimError("UNKNOWN_EVENT", "no such protocol checkpoint");
}

}  // namespace

std::complex<double>& SpinPairState::at(SpinSector s, int m1, int m2, EnvTag e) {
  return amp[flat(*this, static_cast<int>(s), m1, m2, static_cast<int>(e))];
}

const std::complex<double>& SpinPairState::at(SpinSector s, int m1, int m2, EnvTag e) const {
  return amp[flat(*this, static_cast<int>(s), m1, m2, static_cast<int>(e))];
}

double SpinPairState::norm() const {
  double w = 0.0;
  for (const auto& z : amp) w += std::norm(z);
  return std::sqrt(w);
}

const char* sector_name(SpinSector s) {
  switch (s) {
    case SpinSector::UpDown: return "UpDown";
    case SpinSector::DownUp: return "DownUp";
    case SpinSector::UpUp: return "UpUp";
    case SpinSector::DownDown: return "DownDown";
  }
  return "?";
}

const char* env_name(EnvTag e) {
  switch (e) {
    case EnvTag::Virgin: return "virgin";
    case EnvTag::Prepped: return "prepped";
    case EnvTag::Read: return "read";
  }
  return "?";
}

const char* event_name(QndEvent e) {
  switch (e) {
    case QndEvent::O: return "O";
    case QndEvent::A: return "A";
    case QndEvent::B: return "B";
    case QndEvent::P: return "P";
  }
  return "?";
}

SpinPairState initial_state(const DetectorPrep& prep) {
  validate_prep(prep);
  SpinPairState s;
  s.d = prep.register_size;
  s.cyclic = prep.cyclic;
  s.amp.assign(static_cast<std::size_t>(kSectors) * s.d * s.d * kEnvs, {0.0, 0.0});
  const double r = 1.0 / std::sqrt(2.0);
  s.at(SpinSector::UpDown, 0, 0, EnvTag::Virgin) = r;
  s.at(SpinSector::DownUp, 0, 0, EnvTag::Virgin) = -r;
  return s;
}

SpinPairState prepare(const SpinPairState& s, const DetectorPrep& prep) {
  validate_prep(prep);
  if (s.d != prep.register_size)
    throw SimError("REGISTER_TOO_SMALL", "state register does not match the preparation layout");
  SpinPairState out = s;
  const int d = prep.register_size;
  const int M = prep.correlation_sum;
  for (int sec = 0; sec < kSectors; ++sec) {
    auto& src = out.at(static_cast<SpinSector>(sec), 0, 0, EnvTag::Virgin);
    const std::complex<double> a = src;
    if (a == std::complex<double>(0.0, 0.0)) continue;
    src = 0.0;
    if (prep.cyclic) {
      const double r = 1.0 / std::sqrt(static_cast<double>(d));
      for (int m = 0; m < d; ++m) {
        const int partner = ((M - m) % d + d) % d;
        out.at(static_cast<SpinSector>(sec), m, partner, EnvTag::Prepped) += a * r;
      }
    } else {
      const int k = prep.support;
      const int m0 = (d - k) / 2;
      const double r = 1.0 / std::sqrt(static_cast<double>(k));
      for (int j = 0; j < k; ++j)
        out.at(static_cast<SpinSector>(sec), m0 + j, M - (m0 + j), EnvTag::Prepped) += a * r;
    }
  }
  return out;
}

namespace {

SpinPairState shift_register(const SpinPairState& s, bool first_register) {
  SpinPairState out = blank_like(s);
  for (int sec = 0; sec < kSectors; ++sec)
    for (int m1 = 0; m1 < s.d; ++m1)
      for (int m2 = 0; m2 < s.d; ++m2)
        for (int e = 0; e < kEnvs; ++e) {
          const auto a = s.at(static_cast<SpinSector>(sec), m1, m2, static_cast<EnvTag>(e));
          if (a == std::complex<double>(0.0, 0.0)) continue;
          const bool up = first_register ? particle1_up(static_cast<SpinSector>(sec))
                                         : particle2_up(static_cast<SpinSector>(sec));
          const int dm = up ? 1 : -1;
          int nm = (first_register ? m1 : m2) + dm;
          if (s.cyclic) {
            nm = (nm + s.d) % s.d;
          } else if (nm < 0 || nm >= s.d) {
            if (std::abs(a) > 1e-15)
              throw SimError("SHIFT_OUT_OF_RANGE",
                             "register kick leaves the interior support");
            continue;
          }
          if (first_register)
            out.at(static_cast<SpinSector>(sec), nm, m2, static_cast<EnvTag>(e)) += a;
          else
            out.at(static_cast<SpinSector>(sec), m1, nm, static_cast<EnvTag>(e)) += a;
        }
  return out;
}

}  // namespace

SpinPairState interact_A(const SpinPairState& s) { return shift_register(s, true); }

SpinPairState interact_B(const SpinPairState& s) { return shift_register(s, false); }

SpinPairState mark_read(const SpinPairState& s) {
  SpinPairState out = s;
  for (int sec = 0; sec < kSectors; ++sec)
    for (int m1 = 0; m1 < s.d; ++m1)
      for (int m2 = 0; m2 < s.d; ++m2) {
        auto& p = out.at(static_cast<SpinSector>(sec), m1, m2, EnvTag::Prepped);
        auto& r = out.at(static_cast<SpinSector>(sec), m1, m2, EnvTag::Read);
        r += p;
        p = 0.0;
      }
  return out;
}

SpinPairState state_at(const DetectorPrep& prep, QndEvent event) {
  check_event(event);
  const SpinPairState s0 = initial_state(prep);
  const SpinPairState sp = prepare(s0, prep);
  switch (event) {
    case QndEvent::O:
      return mix(s0, sp);
    case QndEvent::A:
      return mix(sp, interact_A(sp));
    case QndEvent::B: {
      const SpinPairState a = interact_A(sp);
      return mix(a, interact_B(a));
    }
    case QndEvent::P: {
      const SpinPairState b = interact_B(interact_A(sp));
      return mix(b, mark_read(b));
    }
  }
  throw SimError("UNKNOWN_EVENT", "no such protocol checkpoint");
}

double singlet_weight(const SpinPairState& s) {
  const double r = 1.0 / std::sqrt(2.0);
  double w = 0.0;
  for (int m1 = 0; m1 < s.d; ++m1)
    for (int m2 = 0; m2 < s.d; ++m2)
      for (int e = 0; e < kEnvs; ++e) {
        const auto diff = (s.at(SpinSector::UpDown, m1, m2, static_cast<EnvTag>(e)) -
                           s.at(SpinSector::DownUp, m1, m2, static_cast<EnvTag>(e))) *
                          r;
        w += std::norm(diff);
      }
  return w;
}

double register_entropy(const SpinPairState& s) {
  std::vector<double> p(s.d, 0.0);
  double total = 0.0;
  for (int sec = 0; sec < kSectors; ++sec)
    for (int m1 = 0; m1 < s.d; ++m1)
      for (int m2 = 0; m2 < s.d; ++m2)
        for (int e = 0; e < kEnvs; ++e) {
          const double w =
              std::norm(s.at(static_cast<SpinSector>(sec), m1, m2, static_cast<EnvTag>(e)));
          p[m1] += w;
          total += w;
        }
  double h = 0.0;
  if (total <= 0.0) return h;
  for (double w : p) {
    const double q = w / total;
    if (q > 1e-15) h -= q * std::log(q);
  }
  return h;
}

std::vector<std::complex<double>> detector1_density(const SpinPairState& s, SpinSector sec) {
  std::vector<std::complex<double>> rho(static_cast<std::size_t>(s.d) * s.d, {0.0, 0.0});
  const double w = sector_weight(s, sec);
  if (w <= 1e-15) return rho;
  for (int i = 0; i < s.d; ++i)
    for (int j = 0; j < s.d; ++j) {
      std::complex<double> sum = 0.0;
      for (int m2 = 0; m2 < s.d; ++m2)
        for (int e = 0; e < kEnvs; ++e)
          sum += s.at(sec, i, m2, static_cast<EnvTag>(e)) *
                 std::conj(s.at(sec, j, m2, static_cast<EnvTag>(e)));
      rho[static_cast<std::size_t>(i) * s.d + j] = sum / w;
    }
  return rho;
}

double detector1_trace_distance_bound(const SpinPairState& s) {
  const auto r1 = detector1_density(s, SpinSector::UpDown);
  const auto r2 = detector1_density(s, SpinSector::DownUp);
  double f2 = 0.0;
  for (std::size_t i = 0; i < r1.size(); ++i) f2 += std::norm(r1[i] - r2[i]);
  return 0.5 * std::sqrt(static_cast<double>(s.d)) * std::sqrt(f2);
}

double singlet_register_fidelity(const SpinPairState& s, const DetectorPrep& prep) {
  const SpinPairState target = prepare(initial_state(prep), prep);
  std::complex<double> inner = 0.0;
  for (std::size_t i = 0; i < target.amp.size() && i < s.amp.size(); ++i)
    inner += std::conj(target.amp[i]) * s.amp[i];
  return std::norm(inner);
}

EligibilityReport rule1a_eligibility(const SpinPairState& s, QndEvent event) {
  check_event(event);
  EligibilityReport rep;
  rep.event = event;

  std::array<double, kEnvs> envw{};
  for (int sec = 0; sec < kSectors; ++sec)
    for (int m1 = 0; m1 < s.d; ++m1)
      for (int m2 = 0; m2 < s.d; ++m2)
        for (int e = 0; e < kEnvs; ++e)
          envw[e] +=
              std::norm(s.at(static_cast<SpinSector>(sec), m1, m2, static_cast<EnvTag>(e)));

  std::vector<int> occupied;
  for (int e = 0; e < kEnvs; ++e)
    if (envw[e] > 1e-12) occupied.push_back(e);

  if (occupied.size() >= 2) {
    rep.branch_basis = "environment";
    std::sort(occupied.begin(), occupied.end(),
              [&](int a, int b) { return envw[a] > envw[b]; });
    const EnvTag g1 = static_cast<EnvTag>(occupied[0]);
    const EnvTag g2 = static_cast<EnvTag>(occupied[1]);
    const auto rho1 = env_density(s, [g1](SpinSector, EnvTag e) { return e == g1; });
    const auto rho2 = env_density(s, [g2](SpinSector, EnvTag e) { return e == g2; });
    rep.branch_overlap = density_overlap(rho1, rho2);
  } else {
    rep.branch_basis = "spin";
    const double w1 = sector_weight(s, SpinSector::UpDown);
    const double w2 = sector_weight(s, SpinSector::DownUp);
    if (w1 <= 1e-12 || w2 <= 1e-12) {
      rep.branch_overlap = 1.0;
      rep.eligible = false;
      return rep;
    }
    const auto rho1 =
        env_density(s, [](SpinSector sec, EnvTag) { return sec == SpinSector::UpDown; });
    const auto rho2 =
        env_density(s, [](SpinSector sec, EnvTag) { return sec == SpinSector::DownUp; });
    rep.branch_overlap = density_overlap(rho1, rho2);
  }
  rep.eligible = rep.branch_overlap < kOverlapFloor;
  return rep;
}

std::vector<EligibilityReport> eligibility_table(const DetectorPrep& prep) {
  std::vector<EligibilityReport> table;
  for (QndEvent ev : {QndEvent::O, QndEvent::A, QndEvent::B, QndEvent::P})
    table.push_back(rule1a_eligibility(state_at(prep, ev), ev));
  return table;
}

NondemolitionRun run_nondemolition(const RuleSet& rules, std::uint64_t seed) {
  const DetectorPrep prep;
  NondemolitionRun out;
  out.table = eligibility_table(prep);

  std::mt19937_64 rng(seed);
  auto audit = [&out](const SpinPairState& st) {
    out.max_norm_error = std::max(out.max_norm_error, std::abs(st.norm() - 1.0));
  };

  const SpinPairState s0 = initial_state(prep);
  audit(s0);
  SpinPairState state = prepare(s0, prep);
  audit(state);

  // O: the preparation lands; the prepped branch carries the ready brain
  // state, so either rule set records the acquisition and keeps that branch.
  out.record.acquisitions["k"].push_back({"P0", "singlet", "D00"});

  for (QndEvent ev : {QndEvent::A, QndEvent::B}) {
    SpinPairState done = ev == QndEvent::A ? interact_A(state) : interact_B(state);
    if (rules.regime == Regime::Objective) {
      const EligibilityReport el = rule1a_eligibility(mix(state, done), ev);
      const bool reduce = rules.rule1a_require_incoherence ? el.eligible : true;
      if (reduce) {
        const double w1 = sector_weight(done, SpinSector::UpDown);
        const double w2 = sector_weight(done, SpinSector::DownUp);
        if (w1 > 1e-12 && w2 > 1e-12) {
          const double pick = uniform_from_bits(rng()) * (w1 + w2);
          done = project_sector(done, pick < w1 ? SpinSector::UpDown : SpinSector::DownUp);
        }
      }
    }
    state = std::move(done);
    audit(state);
  }

  out.final_singlet_weight = singlet_weight(state);

  // P: the readout branches carry distinct environment tags, so both rule
  // sets reduce here; the surviving branch reports the total-spin outcome.
  std::string outcome;
  if (out.final_singlet_weight > 1.0 - kQndTolerance)
    outcome = "J2=0";
  else if (out.final_singlet_weight < kQndTolerance)
    outcome = "J2=2";
  else
    outcome = uniform_from_bits(rng()) < out.final_singlet_weight ? "J2=0" : "J2=2";

  out.record.acquisitions["k"].push_back({"R1", outcome, "D11"});
  out.record.finals.push_back({outcome, "D11", {{"k", "R1"}}});
  return out;
}

OutcomeDistribution nondemolition_distribution(const RuleSet& rules) {
  const DetectorPrep prep;
  OutcomeDistribution dist;
  dist.trials = 0;

  struct Path {
    SpinPairState state;
    double prob;
  };
  std::vector<Path> paths;
  paths.push_back({prepare(initial_state(prep), prep), 1.0});

  for (QndEvent ev : {QndEvent::A, QndEvent::B}) {
    std::vector<Path> next;
    for (auto& p : paths) {
      SpinPairState done = ev == QndEvent::A ? interact_A(p.state) : interact_B(p.state);
      dist.max_conservation_error =
          std::max(dist.max_conservation_error, std::abs(done.norm() - 1.0));
      bool reduce = false;
      if (rules.regime == Regime::Objective) {
        const EligibilityReport el = rule1a_eligibility(mix(p.state, done), ev);
        reduce = rules.rule1a_require_incoherence ? el.eligible : true;
      }
      if (!reduce) {
        next.push_back({std::move(done), p.prob});
        continue;
      }
      bool split = false;
      for (SpinSector sec : {SpinSector::UpDown, SpinSector::DownUp}) {
        const double w = sector_weight(done, sec);
        if (w <= 1e-12) continue;
        next.push_back({project_sector(done, sec), p.prob * w});
        split = true;
      }
      if (!split) next.push_back({std::move(done), p.prob});
    }
    paths = std::move(next);
  }

  std::map<std::string, double> mass;
  for (const auto& p : paths) {
    const double w0 = singlet_weight(p.state);
    const std::array<std::pair<std::string, double>, 2> outcomes{
        {{"J2=0", w0}, {"J2=2", 1.0 - w0}}};
    for (const auto& [label, w] : outcomes) {
      if (w <= 1e-12) continue;
      ObservableRecord r;
      r.acquisitions["k"] = {{"P0", "singlet", "D00"}, {"R1", label, "D11"}};
      r.finals = {{label, "D11", {{"k", "R1"}}}};
      const std::string key = r.key();
      mass[key] += p.prob * w;
      dist.records.emplace(key, std::move(r));
    }
  }
  double total = 0.0;
  for (const auto& [k, w] : mass) total += w;
  if (total > 0.0)
    for (const auto& [k, w] : mass) dist.probabilities[k] = w / total;
  return dist;
}

std::string qnd_snapshot(const SpinPairState& s) {
  std::string out = "{";
  bool first = true;
  for (int sec = 0; sec < kSectors; ++sec)
    for (int m1 = 0; m1 < s.d; ++m1)
      for (int m2 = 0; m2 < s.d; ++m2)
        for (int e = 0; e < kEnvs; ++e) {
          const auto a =
              s.at(static_cast<SpinSector>(sec), m1, m2, static_cast<EnvTag>(e));
          if (std::abs(a) <= 1e-15) continue;
          if (!first) out += ',';
          first = false;
          out += '"';
          out += sector_name(static_cast<SpinSector>(sec));
          out += '|';
          out += std::to_string(m1);
          out += '|';
          out += std::to_string(m2);
          out += '|';
          out += env_name(static_cast<EnvTag>(e));
          out += "\":[";
          out += fmt_double(a.real());
          out += ',';
          out += fmt_double(a.imag());
          out += ']';
        }
  out += '}';
  return out;
}

}  // namespace roe
