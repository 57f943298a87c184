#include "ucm/testing.hpp"

#include <algorithm>
#include <cmath>

namespace ucm {

namespace {

constexpr int kMaxGammaTerms = 500;

/// Regularized lower incomplete gamma P(a, t) by power series, valid for
/// t < a + 1.
double gamma_p_series(double a, double t) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n <= kMaxGammaTerms; ++n) {
    term *= t / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-t + a * std::log(t) - std::lgamma(a));
}

/// Regularized upper incomplete gamma Q(a, t) by modified Lentz continued
/// fraction, valid for t >= a + 1.
double gamma_q_fraction(double a, double t) {
  constexpr double kTiny = 1e-300;
  double b = t + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxGammaTerms; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-t + a * std::log(t) - std::lgamma(a)) * h;
}

void require_at_least_2x2(const ContingencyTable& table) {
  if (table.rows() < 2 || table.cols() < 2) {
    throw DegenerateTableError("test needs at least two categories per axis");
  }
}

/// Deviances below 1e-9 are rounding residue of an exact fit; snapping them
/// to zero keeps the exact-fit case at p = 1 (the nested models make truly
/// negative values impossible).
double snap_deviance(double g2) { return g2 <= 1e-9 ? 0.0 : g2; }

int degrees_of_freedom(const ContingencyTable& table) {
  return static_cast<int>((table.rows() - 1) * (table.cols() - 1));
}

}  // namespace

double chi2_sf(double x, int df) {
  if (df < 1) {
    throw Error("degrees of freedom must be positive");
  }
  if (!(x > 0.0)) return 1.0;
  const double a = 0.5 * df;
  const double t = 0.5 * x;
  const double q =
      t < a + 1.0 ? 1.0 - gamma_p_series(a, t) : gamma_q_fraction(a, t);
  return std::clamp(q, 0.0, 1.0);
}

LrtDetail lrt_ucm_detailed(const ContingencyTable& table, PermutationKind kind,
                           const EstimationConfig& config,
                           std::string_view direction_label) {
  require_at_least_2x2(table);
  const ContingencyTable smoothed = table.smoothed(config.smoothing);
  const ArbitraryEstimate alternative = estimate_arbitrary(smoothed);
  UcmEstimate null_fit = kind == PermutationKind::general
                             ? estimate_uc(smoothed)
                             : estimate_cuc(smoothed, config);
  const double g2 = snap_deviance(
      2.0 * (alternative.log_likelihood - null_fit.log_likelihood()));
  const int df = degrees_of_freedom(table);
  TestResult result{g2, df, chi2_sf(g2, df), std::string(direction_label),
                    kind};
  return LrtDetail{std::move(result), std::move(null_fit),
                   alternative.log_likelihood};
}

TestResult lrt_ucm(const ContingencyTable& table, PermutationKind kind,
                   const EstimationConfig& config,
                   std::string_view direction_label) {
  return lrt_ucm_detailed(table, kind, config, direction_label).result;
}

TestResult independence_test(const ContingencyTable& table) {
  require_at_least_2x2(table);
  const double n = table.total();
  if (!(n > 0.0)) {
    throw EmptyTableError("cannot test independence on an empty table");
  }
  double sum = 0.0;
  for (std::size_t x = 0; x < table.rows(); ++x) {
    for (std::size_t y = 0; y < table.cols(); ++y) {
      const double c = table.at(x, y);
      if (c > 0.0) {
        sum += c * std::log(c * n / (table.row_total(x) * table.col_total(y)));
      }
    }
  }
  const double g2 = snap_deviance(2.0 * sum);
  const int df = degrees_of_freedom(table);
  return TestResult{g2, df, chi2_sf(g2, df), "independence",
                    PermutationKind::general};
}

}  // namespace ucm
