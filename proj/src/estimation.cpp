#include "ucm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ucm/rng.hpp"

namespace ucm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_positive_rows(const ContingencyTable& table) {
  for (std::size_t x = 0; x < table.rows(); ++x) {
    if (!(table.row_total(x) > 0.0)) {
      throw EmptyRowError("row " + std::to_string(x) + " has zero total");
    }
  }
}

/// Pooled aligned counts, the gamma numerators: agg[y] = sum_x N[x][tau_x(y)].
std::vector<double> aggregate_counts(const ContingencyTable& table,
                                     const std::vector<Permutation>& taus) {
  std::vector<double> agg(table.cols(), 0.0);
  for (std::size_t x = 0; x < table.rows(); ++x) {
    for (std::size_t y = 0; y < table.cols(); ++y) {
      agg[y] += table.at(x, taus[x](y));
    }
  }
  return agg;
}

/// Conditional log-likelihood of the shared-pmf fit implied by `agg`:
/// sum_y agg[y] * log(agg[y] / N), with empty positions contributing 0.
double loglik_from_aggregate(const std::vector<double>& agg, double total) {
  double ll = 0.0;
  for (double a : agg) {
    if (a > 0.0) ll += a * std::log(a / total);
  }
  return ll;
}

/// Stable non-increasing argsort; equal values keep their original order.
std::vector<std::size_t> descending_argsort(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return values[a] > values[b];
                   });
  return order;
}

/// Relabels (gamma, taus) by a permutation rho of the shared alphabet:
/// gamma'[r] = gamma[rho(r)], tau'_x = tau_x ∘ rho. The reconstructed channel
/// and the likelihood are unchanged.
std::pair<std::vector<double>, std::vector<Permutation>> relabel(
    const std::vector<double>& gamma, const std::vector<Permutation>& taus,
    const Permutation& rho) {
  std::vector<double> out(gamma.size());
  for (std::size_t r = 0; r < gamma.size(); ++r) out[r] = gamma[rho(r)];
  std::vector<Permutation> new_taus;
  new_taus.reserve(taus.size());
  for (const auto& tau : taus) new_taus.push_back(tau.compose(rho));
  return {std::move(out), std::move(new_taus)};
}

UcmEstimate make_general_estimate(const std::vector<double>& gamma,
                                  const std::vector<Permutation>& taus,
                                  double log_likelihood) {
  Permutation rho(descending_argsort(gamma));
  auto [sorted, new_taus] = relabel(gamma, taus, rho);
  return UcmEstimate(CategoricalDistribution::from_weights(sorted),
                     std::move(new_taus), log_likelihood,
                     PermutationKind::general);
}

/// Canonical rotation for cyclic fits: rotate gamma to its lexicographically
/// maximal position (smallest rotation wins ties) so estimates of the same
/// channel compare equal while every tau stays cyclic.
UcmEstimate make_cyclic_estimate(const std::vector<double>& gamma,
                                 const std::vector<std::size_t>& shifts,
                                 double log_likelihood) {
  const std::size_t n = gamma.size();
  std::size_t best_r = 0;
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t y = 0; y < n; ++y) {
      const double cand = gamma[(y + r) % n];
      const double best = gamma[(y + best_r) % n];
      if (cand != best) {
        if (cand > best) best_r = r;
        break;
      }
    }
  }
  std::vector<double> rotated(n);
  for (std::size_t y = 0; y < n; ++y) rotated[y] = gamma[(y + best_r) % n];
  std::vector<Permutation> taus;
  taus.reserve(shifts.size());
  for (std::size_t s : shifts) taus.push_back(Permutation::cyclic(n, s + best_r));
  return UcmEstimate(CategoricalDistribution::from_weights(rotated),
                     std::move(taus), log_likelihood, PermutationKind::cyclic);
}

std::vector<double> log_of(const std::vector<double>& probs) {
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
  }
  return out;
}

/// Best cyclic shift for one row under fixed log-gamma. Zero counts skip the
/// term entirely (0 * log 0 convention), so -inf only appears when positive
/// mass lands on a zero-probability slot.
std::size_t best_shift(const std::vector<double>& row,
                       const std::vector<double>& log_gamma) {
  const std::size_t n = row.size();
  std::size_t best = 0;
  double best_score = kNegInf;
  for (std::size_t s = 0; s < n; ++s) {
    double score = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      const double c = row[(y + s) % n];
      if (c > 0.0) score += c * log_gamma[y];
    }
    if (score > best_score) {
      best_score = score;
      best = s;
    }
  }
  return best;
}

CucRun run_cuc_once(const ContingencyTable& table,
                    const std::vector<double>& gamma0, int max_iters,
                    int restart_index) {
  const std::size_t nx = table.rows();
  const std::size_t ny = table.cols();
  std::vector<double> log_gamma = log_of(gamma0);
  std::vector<std::size_t> shifts(nx, 0);
  std::vector<std::size_t> best_shifts(nx, 0);
  std::vector<double> best_gamma(ny, 0.0);
  double best_objective = kNegInf;
  std::vector<double> trace;
  trace.reserve(8);
  for (int iter = 0; iter < max_iters; ++iter) {
    // Exact combinatorial step: best cyclic shift per row.
    for (std::size_t x = 0; x < nx; ++x) {
      shifts[x] = best_shift(table.counts()[x], log_gamma);
    }
    // Exact gamma step: pooled aligned counts.
    std::vector<double> agg(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        agg[y] += table.at(x, (y + shifts[x]) % ny);
      }
    }
    const double objective = loglik_from_aggregate(agg, table.total());
    if (objective <= best_objective) {
      // Both steps are exact maximizations, so a non-improving objective
      // means a fixed point was reached.
      break;
    }
    best_objective = objective;
    best_shifts = shifts;
    for (std::size_t y = 0; y < ny; ++y) best_gamma[y] = agg[y] / table.total();
    trace.push_back(objective);
    log_gamma = log_of(best_gamma);
  }
  return CucRun{make_cyclic_estimate(best_gamma, best_shifts, best_objective),
                std::move(trace), restart_index};
}

}  // namespace

CategoricalDistribution estimate_marginal(const ContingencyTable& table) {
  if (!(table.total() > 0.0)) {
    throw EmptyTableError("cannot estimate a marginal from an empty table");
  }
  return CategoricalDistribution::from_weights(table.row_totals());
}

ArbitraryEstimate estimate_arbitrary(const ContingencyTable& table) {
  require_positive_rows(table);
  std::vector<CategoricalDistribution> rows;
  rows.reserve(table.rows());
  double ll = 0.0;
  for (std::size_t x = 0; x < table.rows(); ++x) {
    rows.push_back(CategoricalDistribution::from_weights(table.counts()[x]));
    for (std::size_t y = 0; y < table.cols(); ++y) {
      const double c = table.at(x, y);
      if (c > 0.0) ll += c * std::log(c / table.row_total(x));
    }
  }
  return ArbitraryEstimate{ChannelMatrix(std::move(rows)), ll};
}

UcmEstimate estimate_uc_known(const ContingencyTable& table,
                              const std::vector<Permutation>& taus) {
  if (taus.size() != table.rows()) {
    throw DimensionMismatchError("need one permutation per table row");
  }
  for (const auto& tau : taus) {
    if (tau.size() != table.cols()) {
      throw DimensionMismatchError("permutation size differs from column count");
    }
  }
  if (!(table.total() > 0.0)) {
    throw EmptyTableError("cannot fit a shared pmf on an empty table");
  }
  const std::vector<double> agg = aggregate_counts(table, taus);
  std::vector<double> gamma(agg.size());
  for (std::size_t y = 0; y < agg.size(); ++y) gamma[y] = agg[y] / table.total();
  return make_general_estimate(gamma, taus,
                               loglik_from_aggregate(agg, table.total()));
}

UcmEstimate estimate_uc(const ContingencyTable& table) {
  require_positive_rows(table);
  std::vector<Permutation> taus;
  taus.reserve(table.rows());
  for (std::size_t x = 0; x < table.rows(); ++x) {
    taus.emplace_back(descending_argsort(table.counts()[x]));
  }
  const std::vector<double> agg = aggregate_counts(table, taus);
  std::vector<double> gamma(agg.size());
  for (std::size_t y = 0; y < agg.size(); ++y) gamma[y] = agg[y] / table.total();
  // Rows were sorted, so gamma is already non-increasing; the normalization
  // in make_general_estimate is a no-op relabeling here.
  return make_general_estimate(gamma, taus,
                               loglik_from_aggregate(agg, table.total()));
}

std::vector<CucRun> estimate_cuc_runs(const ContingencyTable& table,
                                      const EstimationConfig& config) {
  if (config.cuc_max_iters < 1) {
    throw Error("cuc_max_iters must be at least 1");
  }
  if (config.cuc_restarts < 0) {
    throw Error("cuc_restarts must be nonnegative");
  }
  require_positive_rows(table);
  const std::size_t ny = table.cols();
  std::vector<CucRun> runs;
  runs.reserve(static_cast<std::size_t>(config.cuc_restarts) + 1);
  for (int restart = 0; restart <= config.cuc_restarts; ++restart) {
    std::vector<double> gamma0;
    if (restart == 0) {
      gamma0 = estimate_uc(table).gamma().probs();
    } else {
      SplitMix64 rng = SplitMix64::derive(config.rng_seed, restart);
      gamma0 = flat_simplex(rng, ny);
    }
    runs.push_back(run_cuc_once(table, gamma0, config.cuc_max_iters, restart));
  }
  return runs;
}

UcmEstimate estimate_cuc(const ContingencyTable& table,
                         const EstimationConfig& config) {
  const std::vector<CucRun> runs = estimate_cuc_runs(table, config);
  const CucRun* best = &runs.front();
  for (const CucRun& run : runs) {
    if (run.estimate.log_likelihood() > best->estimate.log_likelihood()) {
      best = &run;
    }
  }
  return best->estimate;
}

UcmEstimate oracle_uc(const ContingencyTable& table, PermutationKind kind) {
  require_positive_rows(table);
  const std::size_t nx = table.rows();
  const std::size_t ny = table.cols();
  constexpr double kCap = 1e7;

  double per_row = 1.0;
  if (kind == PermutationKind::general) {
    for (std::size_t k = 2; k <= ny; ++k) per_row *= static_cast<double>(k);
  } else {
    per_row = static_cast<double>(ny);
  }
  double space = 1.0;
  for (std::size_t x = 0; x < nx; ++x) {
    space *= per_row;
    if (space > kCap) {
      throw TooLargeError("search space exceeds the 1e7 tuple cap");
    }
  }

  double best_ll = kNegInf;
  if (kind == PermutationKind::cyclic) {
    std::vector<std::size_t> shifts(nx, 0);
    std::vector<std::size_t> best_shifts = shifts;
    while (true) {
      std::vector<double> agg(ny, 0.0);
      for (std::size_t x = 0; x < nx; ++x) {
        for (std::size_t y = 0; y < ny; ++y) {
          agg[y] += table.at(x, (y + shifts[x]) % ny);
        }
      }
      const double ll = loglik_from_aggregate(agg, table.total());
      if (ll > best_ll) {
        best_ll = ll;
        best_shifts = shifts;
      }
      std::size_t x = 0;
      while (x < nx && ++shifts[x] == ny) shifts[x++] = 0;
      if (x == nx) break;
    }
    std::vector<double> agg(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        agg[y] += table.at(x, (y + best_shifts[x]) % ny);
      }
    }
    std::vector<double> gamma(ny);
    for (std::size_t y = 0; y < ny; ++y) gamma[y] = agg[y] / table.total();
    return make_cyclic_estimate(gamma, best_shifts, best_ll);
  }

  // General kind: odometer of lexicographic permutations, one per row.
  std::vector<std::vector<std::size_t>> maps(nx);
  for (auto& m : maps) {
    m.resize(ny);
    std::iota(m.begin(), m.end(), std::size_t{0});
  }
  std::vector<std::vector<std::size_t>> best_maps = maps;
  while (true) {
    std::vector<double> agg(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        agg[y] += table.at(x, maps[x][y]);
      }
    }
    const double ll = loglik_from_aggregate(agg, table.total());
    if (ll > best_ll) {
      best_ll = ll;
      best_maps = maps;
    }
    std::size_t x = 0;
    while (x < nx && !std::next_permutation(maps[x].begin(), maps[x].end())) {
      ++x;  // this row wrapped back to identity; carry into the next row
    }
    if (x == nx) break;
  }
  std::vector<Permutation> taus;
  taus.reserve(nx);
  for (auto& m : best_maps) taus.emplace_back(std::move(m));
  const std::vector<double> agg = aggregate_counts(table, taus);
  std::vector<double> gamma(ny);
  for (std::size_t y = 0; y < ny; ++y) gamma[y] = agg[y] / table.total();
  return make_general_estimate(gamma, taus, best_ll);
}

}  // namespace ucm
