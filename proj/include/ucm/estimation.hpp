#pragma once

#include <cstdint>
#include <vector>

#include "ucm/core.hpp"

namespace ucm {

/// Knobs for the channel estimators. Smoothing is a pseudo-count added to
/// every cell of a table *before* estimation (see ContingencyTable::smoothed);
/// the estimators themselves never smooth, so a table is smoothed exactly once
/// at the point where raw data enters (tests, decisions, CLI).
struct EstimationConfig {
  double smoothing = 1e-3;
  int cuc_max_iters = 200;
  int cuc_restarts = 10;
  std::uint64_t rng_seed = 0;
};

/// ML estimate of the input marginal: row totals over the grand total.
/// Throws EmptyTableError when the table has no mass.
CategoricalDistribution estimate_marginal(const ContingencyTable& table);

struct ArbitraryEstimate {
  ChannelMatrix channel;
  double log_likelihood;  // conditional log-likelihood, nats
};

/// Unconstrained per-row ML estimate theta[x][y] = N_xy / N_x.
/// Throws EmptyRowError when some row total is zero.
ArbitraryEstimate estimate_arbitrary(const ContingencyTable& table);

/// ML estimate of the shared pmf when the row permutations are known:
/// gamma[y] = (1/N) * sum_x N[x][tau_x(y)].
UcmEstimate estimate_uc_known(const ContingencyTable& table,
                              const std::vector<Permutation>& taus);

/// Globally optimal uniform-channel fit with unknown permutations. Each
/// tau_x sorts row x into non-increasing order (stable, lower column index
/// first on ties), which makes the aggregated gamma non-increasing and
/// globally maximizes the likelihood.
UcmEstimate estimate_uc(const ContingencyTable& table);

/// One alternating-maximization run for the cyclic fit.
struct CucRun {
  UcmEstimate estimate;
  std::vector<double> objective_trace;  // conditional log-likelihood per iteration
  int restart_index;
};

/// All restart runs of the cyclic estimator, in restart order. Restart 0
/// starts from the sorted general-fit gamma; restarts 1..R start from seeded
/// flat-simplex draws. Within a run the two exact steps alternate: best
/// cyclic shift per row given gamma, then the closed-form gamma update.
std::vector<CucRun> estimate_cuc_runs(const ContingencyTable& table,
                                      const EstimationConfig& config);

/// Best cyclic-uniform-channel fit over all restarts (ties resolved toward
/// the lowest restart index).
UcmEstimate estimate_cuc(const ContingencyTable& table,
                         const EstimationConfig& config);

/// Exhaustive-search reference: maximizes the likelihood over all
/// (|Y|!)^|X| permutation tuples (general) or |Y|^|X| shift tuples (cyclic).
/// Throws TooLargeError when the search space exceeds 1e7 tuples.
UcmEstimate oracle_uc(const ContingencyTable& table, PermutationKind kind);

}  // namespace ucm
