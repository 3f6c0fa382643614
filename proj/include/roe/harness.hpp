#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roe/rules.hpp"
#include "roe/scenario.hpp"

namespace roe {

// Components lighter than this are invisible in observable records.
inline constexpr double kObservableWeightFloor = 1e-9;
// Enumeration branches below this probability are dropped (mass is tracked).
inline constexpr double kBranchPruneFloor = 1e-12;
// Two exact distributions count as equal when their total variation
// distance is at most this.
inline constexpr double kTvdTolerance = 1e-9;
// Two Monte Carlo samples count as equal when the chi-square p-value is at
// least this.
inline constexpr double kChiSquareAlpha = 0.01;
// Branch-count ceiling for exact enumeration.
inline constexpr std::uint64_t kBranchCap = 10000000;

// One conscious acquisition as the observer would report it: the brain state
// acquired plus the particle/detector labels of the component it happened on.
struct AcquisitionStep {
  std::string state;
  std::string particle;
  std::string detector;

  bool operator==(const AcquisitionStep&) const = default;
};

// One surviving world at the end of a run, stripped to what is observable:
// pointer labels plus every conscious brain state riding on the component.
struct FinalBranch {
  std::string particle;
  std::string detector;
  std::vector<std::pair<std::string, std::string>> conscious;  // observer, state

  bool operator==(const FinalBranch&) const = default;
};

// Everything observers can compare notes about after a run. Deliberately
// excludes weights, times, liveness bookkeeping, environment tags and which
// rule set produced it: two runs agree exactly when their records are equal.
struct ObservableRecord {
  // Acquisition history per observer, in the order the observer lived it.
  std::map<std::string, std::vector<AcquisitionStep>> acquisitions;
  // Surviving branches (weight >= kObservableWeightFloor), sorted.
  std::vector<FinalBranch> finals;

  // Canonical string form, usable as a map key.
  std::string key() const;

  bool operator==(const ObservableRecord&) const = default;
};

// A distribution over observable records, from exact enumeration
// (trials == 0) or Monte Carlo (trials > 0, counts filled).
struct OutcomeDistribution {
  std::map<std::string, double> probabilities;       // by record key
  std::map<std::string, ObservableRecord> records;   // key -> record
  std::map<std::string, std::uint64_t> counts;       // Monte Carlo only
  std::uint64_t trials = 0;
  // Probability mass dropped by branch pruning (exact mode).
  double discretization_bound = 0.0;
  // Largest |total weight - 1| seen between reductions.
  double max_conservation_error = 0.0;
};

enum class CompareMode { Exact, MonteCarlo };

struct ComparisonVerdict {
  CompareMode mode = CompareMode::Exact;
  double total_variation = 0.0;
  std::optional<double> chi_square_p;  // Monte Carlo mode only
  bool equal = false;
};

// One Monte Carlo history: the record it produced plus the event log.
struct TrialResult {
  ObservableRecord record;
  std::vector<StochasticEvent> events;
  // Time of each acquisition, aligned with record.acquisitions.
  std::map<std::string, std::vector<double>> acquisition_times;
  double max_conservation_error = 0.0;
};

// Exact distribution over records. Each interaction window is cut into
// time_slices pieces; within a piece the first-hit competition is resolved
// in closed form, so refining time_slices only moves hit *times*, never the
// record probabilities of the shipped catalog. Throws SimError
// "STATE_EXPLOSION" if the branch set exceeds kBranchCap.
OutcomeDistribution enumerate_outcomes(const Scenario& sc, const RuleSet& rules,
                                       int time_slices);

// One full stochastic history, deterministic in seed.
TrialResult run_single(const Scenario& sc, const RuleSet& rules, std::uint64_t seed);

// n independent trials; trial i uses mix_seed(seed, i).
OutcomeDistribution run_trials(const Scenario& sc, const RuleSet& rules,
                               std::uint64_t n, std::uint64_t seed);

// Verdict on whether two distributions describe the same observable law.
// Exact mode: total variation distance <= tvd_tolerance. Monte Carlo mode:
// two-sample chi-square test, equal when p >= alpha. Throws SimError
// "EMPTY_DISTRIBUTION" when either side has no mass.
ComparisonVerdict compare(const OutcomeDistribution& a, const OutcomeDistribution& b,
                          CompareMode mode, double tvd_tolerance = kTvdTolerance,
                          double alpha = kChiSquareAlpha);

}  // namespace roe
