#pragma once

#include <complex>
#include <string>
#include <vector>

#include "roe/harness.hpp"
#include "roe/rules.hpp"

namespace roe {

// Numeric slack for amplitude-level checks (norms, fidelities).
inline constexpr double kQndTolerance = 1e-12;
// Branch pairs whose environment overlap is below this count as locally
// incoherent and are fair game for objective reduction.
inline constexpr double kOverlapFloor = 1e-9;

// Joint spin basis of the pair; first arrow is particle 1.
enum class SpinSector { UpDown, DownUp, UpUp, DownDown };

// Environment tag of the detector assembly.
enum class EnvTag { Virgin, Prepped, Read };

// The four checkpoints of the nondemolition protocol: O = register
// preparation, A/B = the two particle passes, P = the readout.
enum class QndEvent { O, A, B, P };

// Register layout of the paired detectors. Each register holds a value in
// [0, register_size); preparation entangles them so the values add up to
// correlation_sum. In cyclic mode shifts wrap mod register_size and the
// prepared support covers the whole register; in interior mode the support
// is `support` values centered in the range and shifts must stay inside.
struct DetectorPrep {
  int register_size = 5;
  int correlation_sum = 4;
  int support = 5;
  bool cyclic = true;
};

// Full amplitude vector over sector x m1 x m2 x env.
struct SpinPairState {
  int d = 5;
  bool cyclic = true;
  std::vector<std::complex<double>> amp;

  std::complex<double>& at(SpinSector s, int m1, int m2, EnvTag e);
  const std::complex<double>& at(SpinSector s, int m1, int m2, EnvTag e) const;
  double norm() const;
};

const char* sector_name(SpinSector s);
const char* env_name(EnvTag e);
const char* event_name(QndEvent e);

// Singlet pair, both registers at 0, environment untouched.
SpinPairState initial_state(const DetectorPrep& prep);

// Spreads every virgin (0,0) amplitude over the correlated register pairs
// and tags it prepped. Throws SimError "REGISTER_TOO_SMALL" when the layout
// cannot hold the correlated values.
SpinPairState prepare(const SpinPairState& s, const DetectorPrep& prep);

// Particle 1 kicks register 1 by +1 (spin up) or -1 (spin down). In
// interior mode a shift leaving [0, d) throws SimError "SHIFT_OUT_OF_RANGE".
SpinPairState interact_A(const SpinPairState& s);

// Particle 2 kicks register 2, same sign convention, so for anticorrelated
// pairs the two kicks cancel in the register sum.
SpinPairState interact_B(const SpinPairState& s);

// Readout apparatus couples to the assembly: prepped tags become read.
SpinPairState mark_read(const SpinPairState& s);

// Canonical mid-event superposition (not-yet-done + done)/sqrt(2) for each
// protocol checkpoint. Throws SimError "UNKNOWN_EVENT" for a bad event.
SpinPairState state_at(const DetectorPrep& prep, QndEvent event);

// Weight of the total-spin-zero (singlet) component.
double singlet_weight(const SpinPairState& s);

// Shannon entropy (nats) of the register-1 value distribution.
double register_entropy(const SpinPairState& s);

// Register-1 density matrix conditional on a spin sector, row-major d x d.
// Zero matrix when the sector carries no weight.
std::vector<std::complex<double>> detector1_density(const SpinPairState& s, SpinSector sec);

// Upper bound on the trace distance between the register-1 states seen in
// the UpDown and DownUp sectors (Frobenius bound, exact when zero).
double detector1_trace_distance_bound(const SpinPairState& s);

// Overlap |<target|s>|^2 with singlet x correlated registers x prepped,
// i.e. how well the pair plus detectors returned to the undisturbed form.
double singlet_register_fidelity(const SpinPairState& s, const DetectorPrep& prep);

struct EligibilityReport {
  QndEvent event = QndEvent::O;
  // "environment" when distinct env tags carry weight, else "spin".
  std::string branch_basis;
  // tr(rho1 * rho2) of the branch-conditional environment states.
  double branch_overlap = 1.0;
  bool eligible = false;
};

// Whether objective reduction may act on the given mid-event state: splits
// it into branches (environment groups when at least two are occupied,
// otherwise the two anticorrelated spin sectors) and tests whether the
// branch environments overlap below kOverlapFloor.
EligibilityReport rule1a_eligibility(const SpinPairState& s, QndEvent event);

// rule1a_eligibility at every checkpoint of the canonical protocol.
std::vector<EligibilityReport> eligibility_table(const DetectorPrep& prep);

struct NondemolitionRun {
  ObservableRecord record;
  double final_singlet_weight = 0.0;
  std::vector<EligibilityReport> table;
  double max_norm_error = 0.0;
};

// Runs the full protocol at amplitude level under the given rule set and
// returns what the observer ends up with. Deterministic in seed; the seed
// only matters when a rule variant forces a genuinely random branch choice.
NondemolitionRun run_nondemolition(const RuleSet& rules, std::uint64_t seed = 0);

// Exact outcome distribution of the protocol under the given rule set.
OutcomeDistribution nondemolition_distribution(const RuleSet& rules);

// Compact JSON dump of all amplitudes above 1e-15, keys "Sector|m1|m2|env".
std::string qnd_snapshot(const SpinPairState& s);

}  // namespace roe
