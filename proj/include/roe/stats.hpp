#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace roe {

// Total variation distance between two discrete distributions keyed by
// outcome; missing keys count as probability zero.
double total_variation(const std::map<std::string, double>& a,
                       const std::map<std::string, double>& b);

struct ChiSquareResult {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
};

// Two-sample chi-square homogeneity test on outcome counts. Cells are the
// union of keys; expectations come from the pooled distribution. Cells with
// zero pooled count are skipped.
ChiSquareResult two_sample_chi_square(const std::map<std::string, std::uint64_t>& a,
                                      const std::map<std::string, std::uint64_t>& b);

// Upper regularized incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s),
// via the standard series / continued-fraction split. Survival function of
// the chi-square distribution: P(X > x | df) = Q(df/2, x/2).
double regularized_gamma_q(double s, double x);

// Kolmogorov-Smirnov distance between a sample and the unit-rate
// exponential distribution. The sample is copied and sorted internally.
double ks_distance_exp1(std::vector<double> samples);

}  // namespace roe
