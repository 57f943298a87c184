#pragma once

#include <string>
#include <string_view>

#include "ucm/core.hpp"
#include "ucm/estimation.hpp"

namespace ucm {

/// Outcome of one likelihood-ratio test. g2 is the deviance
/// 2 * (L_alternative - L_null) in nats, clamped at 0 against rounding.
struct TestResult {
  double g2 = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::string direction_label;
  PermutationKind kind = PermutationKind::general;
};

/// Upper tail of the chi-squared distribution: P[chi2_df >= x], computed as
/// the regularized upper incomplete gamma Q(df/2, x/2). Series expansion
/// below the a+1 crossover, Lentz continued fraction above; absolute error
/// within 1e-10. Negative x is treated as 0.
double chi2_sf(double x, int df);

/// Likelihood-ratio test of the uniform-channel null (general or cyclic)
/// against an arbitrary channel. The table is smoothed once with
/// config.smoothing before both fits; df = (|X|-1)(|Y|-1).
/// Throws DegenerateTableError unless the table is at least 2x2.
TestResult lrt_ucm(const ContingencyTable& table, PermutationKind kind,
                   const EstimationConfig& config = {},
                   std::string_view direction_label = "");

/// lrt_ucm plus the fitted models behind the statistic.
struct LrtDetail {
  TestResult result;
  UcmEstimate null_estimate;
  double arbitrary_log_likelihood;
};

LrtDetail lrt_ucm_detailed(const ContingencyTable& table, PermutationKind kind,
                           const EstimationConfig& config = {},
                           std::string_view direction_label = "");

/// G2 test of independence on the table as given (no smoothing),
/// df = (|X|-1)(|Y|-1).
TestResult independence_test(const ContingencyTable& table);

}  // namespace ucm
