#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucm {

// Error hierarchy. Preconditions violated by callers surface as one of these
// rather than UB; everything derives from Error so callers can catch broadly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class ZeroEffectMarginalError : public Error {
 public:
  using Error::Error;
};

class EmptyTableError : public Error {
 public:
  using Error::Error;
};

class EmptyRowError : public Error {
 public:
  using Error::Error;
};

class TooLargeError : public Error {
 public:
  using Error::Error;
};

class DegenerateTableError : public Error {
 public:
  using Error::Error;
};

enum class PermutationKind { general, cyclic };

std::string to_string(PermutationKind kind);

/// A pmf over a finite alphabet. Entries must lie in [0,1] and sum to 1
/// (validated to 1e-12). Immutable after construction.
class CategoricalDistribution {
 public:
  explicit CategoricalDistribution(std::vector<double> probs);

  /// Normalizes nonnegative weights into a distribution.
  static CategoricalDistribution from_weights(const std::vector<double>& weights);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

  bool operator==(const CategoricalDistribution& other) const = default;

 private:
  std::vector<double> probs_;
};

/// Shannon entropy in nats, with 0 log 0 := 0.
double entropy(const CategoricalDistribution& dist);

/// A bijection on {0, ..., n-1}. A cyclic permutation additionally satisfies
/// map[i] == (i + s) % n for a fixed shift s.
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> mapping,
                       PermutationKind kind = PermutationKind::general);

  static Permutation identity(std::size_t n,
                              PermutationKind kind = PermutationKind::general);
  static Permutation cyclic(std::size_t n, std::size_t shift);

  std::size_t size() const { return map_.size(); }
  std::size_t operator()(std::size_t i) const { return map_[i]; }
  const std::vector<std::size_t>& mapping() const { return map_; }
  PermutationKind kind() const { return kind_; }

  /// Shift s of a cyclic permutation; throws for general kind.
  std::size_t shift() const;

  Permutation inverse() const;

  /// Composition (this ∘ other)(i) = this(other(i)). Cyclic is preserved
  /// when both operands are cyclic.
  Permutation compose(const Permutation& other) const;

  bool operator==(const Permutation& other) const = default;

 private:
  std::vector<std::size_t> map_;
  PermutationKind kind_;
};

/// Row-stochastic conditional pmf: row x is the distribution of the output
/// given input x.
class ChannelMatrix {
 public:
  explicit ChannelMatrix(std::vector<CategoricalDistribution> rows);
  explicit ChannelMatrix(const std::vector<std::vector<double>>& rows);

  std::size_t input_size() const { return rows_.size(); }
  std::size_t output_size() const { return rows_.front().size(); }
  double at(std::size_t x, std::size_t y) const { return rows_[x][y]; }
  const CategoricalDistribution& row(std::size_t x) const { return rows_[x]; }

  bool operator==(const ChannelMatrix& other) const = default;

 private:
  std::vector<CategoricalDistribution> rows_;
};

/// Joint count table with cached row/column/grand totals. Counts are real
/// valued so that additive smoothing can be represented directly.
class ContingencyTable {
 public:
  explicit ContingencyTable(std::vector<std::vector<double>> counts);

  std::size_t rows() const { return counts_.size(); }
  std::size_t cols() const { return counts_.front().size(); }
  double at(std::size_t x, std::size_t y) const { return counts_[x][y]; }
  const std::vector<std::vector<double>>& counts() const { return counts_; }
  double row_total(std::size_t x) const { return row_totals_[x]; }
  double col_total(std::size_t y) const { return col_totals_[y]; }
  const std::vector<double>& row_totals() const { return row_totals_; }
  const std::vector<double>& col_totals() const { return col_totals_; }
  double total() const { return grand_total_; }

  /// Returns a copy with `pseudo_count` added to every cell.
  ContingencyTable smoothed(double pseudo_count) const;

  ContingencyTable transposed() const;

  bool operator==(const ContingencyTable& other) const = default;

 private:
  std::vector<std::vector<double>> counts_;
  std::vector<double> row_totals_;
  std::vector<double> col_totals_;
  double grand_total_;
};

/// Fitted uniform-channel parameters: the shared pmf gamma together with the
/// inverse permutations tau_x that map shared-pmf positions onto columns of
/// row x, and the conditional log-likelihood (nats) achieved on the fitted
/// table. For kind == general, gamma is normalized to non-increasing order;
/// for kind == cyclic, gamma is normalized to its lexicographically maximal
/// rotation so that the taus can stay cyclic.
class UcmEstimate {
 public:
  UcmEstimate(CategoricalDistribution gamma, std::vector<Permutation> taus,
              double log_likelihood, PermutationKind kind);

  const CategoricalDistribution& gamma() const { return gamma_; }
  const std::vector<Permutation>& taus() const { return taus_; }
  double log_likelihood() const { return log_likelihood_; }
  PermutationKind kind() const { return kind_; }

  /// Rebuilds the channel: row x has entries theta[x][y] = gamma[sigma_x(y)]
  /// with sigma_x = tau_x^{-1}.
  ChannelMatrix channel() const;

 private:
  CategoricalDistribution gamma_;
  std::vector<Permutation> taus_;
  double log_likelihood_;
  PermutationKind kind_;
};

struct ReverseChannelResult {
  ChannelMatrix channel;              // theta^{Y->X}, rows indexed by y
  CategoricalDistribution marginal;   // output marginal A_y of the forward pass
};

/// Bayes inversion of a channel under a full-support input marginal:
/// theta^{Y->X}[y][x] = theta[x][y] * marginal[x] / A_y with
/// A_y = sum_x theta[x][y] * marginal[x]. Throws ZeroEffectMarginalError if
/// some A_y vanishes; restrict the support first in that case.
ReverseChannelResult reverse_channel(const ChannelMatrix& forward,
                                     const CategoricalDistribution& marginal);

/// True when every row is (within max-abs `tol`) a permutation of the first
/// row: sorted rows are compared for the general kind, all cyclic shifts are
/// tried for the cyclic kind.
bool is_uniform_channel(const ChannelMatrix& channel, PermutationKind kind,
                        double tol = 1e-9);

/// H(Y|X) in nats: sum_x marginal[x] * H(row x), with 0 log 0 := 0.
double conditional_entropy(const ChannelMatrix& channel,
                           const CategoricalDistribution& marginal);

struct PrunedTable {
  ContingencyTable table;
  std::vector<std::size_t> kept_rows;
  std::vector<std::size_t> kept_cols;
};

/// Drops all-zero rows and columns, returning the reduced table plus the
/// retained original indices. Throws EmptyTableError when nothing remains.
PrunedTable prune_zero_support(const ContingencyTable& table);

}  // namespace ucm
