#include "ucm/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ucm {

namespace {

constexpr double kProbTol = 1e-12;

}  // namespace

std::string to_string(PermutationKind kind) {
  return kind == PermutationKind::general ? "general" : "cyclic";
}

CategoricalDistribution::CategoricalDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw DimensionMismatchError("distribution must have at least one entry");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= -kProbTol) || !(p <= 1.0 + kProbTol)) {
      throw Error("distribution entry " + std::to_string(p) +
                  " outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbTol) {
    throw Error("distribution sums to " + std::to_string(sum) + ", not 1");
  }
}

CategoricalDistribution CategoricalDistribution::from_weights(
    const std::vector<double>& weights) {
  double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0)) {
    throw Error("weights must have a positive sum");
  }
  std::vector<double> probs(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) {
      throw Error("weights must be nonnegative");
    }
    probs[i] = weights[i] / sum;
  }
  // Nudge the largest entry so the normalized vector sums to 1 exactly.
  double err = std::accumulate(probs.begin(), probs.end(), 0.0) - 1.0;
  if (err != 0.0) {
    auto it = std::max_element(probs.begin(), probs.end());
    *it -= err;
  }
  return CategoricalDistribution(std::move(probs));
}

double entropy(const CategoricalDistribution& dist) {
  double h = 0.0;
  for (double p : dist.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

Permutation::Permutation(std::vector<std::size_t> mapping, PermutationKind kind)
    : map_(std::move(mapping)), kind_(kind) {
  const std::size_t n = map_.size();
  if (n == 0) {
    throw DimensionMismatchError("permutation must be non-empty");
  }
  std::vector<bool> seen(n, false);
  for (std::size_t v : map_) {
    if (v >= n || seen[v]) {
      throw Error("mapping is not a bijection on {0..n-1}");
    }
    seen[v] = true;
  }
  if (kind_ == PermutationKind::cyclic) {
    const std::size_t s = map_[0];
    for (std::size_t i = 0; i < n; ++i) {
      if (map_[i] != (i + s) % n) {
        throw Error("mapping is not a cyclic shift");
      }
    }
  }
}

Permutation Permutation::identity(std::size_t n, PermutationKind kind) {
  std::vector<std::size_t> map(n);
  std::iota(map.begin(), map.end(), std::size_t{0});
  return Permutation(std::move(map), kind);
}

Permutation Permutation::cyclic(std::size_t n, std::size_t shift) {
  std::vector<std::size_t> map(n);
  for (std::size_t i = 0; i < n; ++i) map[i] = (i + shift % n) % n;
  return Permutation(std::move(map), PermutationKind::cyclic);
}

std::size_t Permutation::shift() const {
  if (kind_ != PermutationKind::cyclic) {
    throw Error("shift() is only defined for cyclic permutations");
  }
  return map_[0];
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = i;
  return Permutation(std::move(inv), kind_);
}

Permutation Permutation::compose(const Permutation& other) const {
  if (size() != other.size()) {
    throw DimensionMismatchError("composing permutations of different sizes");
  }
  std::vector<std::size_t> map(size());
  for (std::size_t i = 0; i < size(); ++i) map[i] = map_[other(i)];
  PermutationKind kind = (kind_ == PermutationKind::cyclic &&
                          other.kind() == PermutationKind::cyclic)
                             ? PermutationKind::cyclic
                             : PermutationKind::general;
  return Permutation(std::move(map), kind);
}

ChannelMatrix::ChannelMatrix(std::vector<CategoricalDistribution> rows)
    : rows_(std::move(rows)) {
  if (rows_.empty()) {
    throw DimensionMismatchError("channel must have at least one row");
  }
  for (const auto& row : rows_) {
    if (row.size() != rows_.front().size()) {
      throw DimensionMismatchError("channel rows have unequal lengths");
    }
  }
}

ChannelMatrix::ChannelMatrix(const std::vector<std::vector<double>>& rows)
    : ChannelMatrix([&] {
        std::vector<CategoricalDistribution> dists;
        dists.reserve(rows.size());
        for (const auto& row : rows) dists.emplace_back(row);
        return dists;
      }()) {}

ContingencyTable::ContingencyTable(std::vector<std::vector<double>> counts)
    : counts_(std::move(counts)) {
  if (counts_.empty() || counts_.front().empty()) {
    throw EmptyTableError("count table must be non-empty");
  }
  const std::size_t ny = counts_.front().size();
  row_totals_.assign(counts_.size(), 0.0);
  col_totals_.assign(ny, 0.0);
  grand_total_ = 0.0;
  for (std::size_t x = 0; x < counts_.size(); ++x) {
    if (counts_[x].size() != ny) {
      throw DimensionMismatchError("count rows have unequal lengths");
    }
    for (std::size_t y = 0; y < ny; ++y) {
      const double c = counts_[x][y];
      if (!(c >= 0.0)) {
        throw Error("counts must be nonnegative");
      }
      row_totals_[x] += c;
      col_totals_[y] += c;
    }
    grand_total_ += row_totals_[x];
  }
}

ContingencyTable ContingencyTable::smoothed(double pseudo_count) const {
  if (pseudo_count < 0.0) {
    throw Error("pseudo count must be nonnegative");
  }
  if (pseudo_count == 0.0) return *this;
  auto counts = counts_;
  for (auto& row : counts) {
    for (double& c : row) c += pseudo_count;
  }
  return ContingencyTable(std::move(counts));
}

ContingencyTable ContingencyTable::transposed() const {
  std::vector<std::vector<double>> t(cols(), std::vector<double>(rows()));
  for (std::size_t x = 0; x < rows(); ++x) {
    for (std::size_t y = 0; y < cols(); ++y) t[y][x] = counts_[x][y];
  }
  return ContingencyTable(std::move(t));
}

UcmEstimate::UcmEstimate(CategoricalDistribution gamma,
                         std::vector<Permutation> taus, double log_likelihood,
                         PermutationKind kind)
    : gamma_(std::move(gamma)),
      taus_(std::move(taus)),
      log_likelihood_(log_likelihood),
      kind_(kind) {
  if (taus_.empty()) {
    throw DimensionMismatchError("estimate needs at least one permutation");
  }
  for (const auto& tau : taus_) {
    if (tau.size() != gamma_.size()) {
      throw DimensionMismatchError("permutation size differs from gamma size");
    }
    if (kind_ == PermutationKind::cyclic &&
        tau.kind() != PermutationKind::cyclic) {
      throw Error("cyclic estimate holds a non-cyclic permutation");
    }
  }
  if (kind_ == PermutationKind::general) {
    for (std::size_t y = 0; y + 1 < gamma_.size(); ++y) {
      if (gamma_[y] + kProbTol < gamma_[y + 1]) {
        throw Error("gamma of a general estimate must be non-increasing");
      }
    }
  }
}

ChannelMatrix UcmEstimate::channel() const {
  std::vector<CategoricalDistribution> rows;
  rows.reserve(taus_.size());
  for (const auto& tau : taus_) {
    const Permutation sigma = tau.inverse();
    std::vector<double> row(gamma_.size());
    for (std::size_t y = 0; y < gamma_.size(); ++y) row[y] = gamma_[sigma(y)];
    rows.emplace_back(std::move(row));
  }
  return ChannelMatrix(std::move(rows));
}

ReverseChannelResult reverse_channel(const ChannelMatrix& forward,
                                     const CategoricalDistribution& marginal) {
  const std::size_t nx = forward.input_size();
  const std::size_t ny = forward.output_size();
  if (marginal.size() != nx) {
    throw DimensionMismatchError("marginal length differs from channel rows");
  }
  std::vector<double> effect(ny, 0.0);
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      effect[y] += forward.at(x, y) * marginal[x];
    }
    if (effect[y] <= 0.0) {
      throw ZeroEffectMarginalError("output symbol " + std::to_string(y) +
                                    " has zero probability");
    }
  }
  std::vector<std::vector<double>> rows(ny, std::vector<double>(nx));
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      rows[y][x] = forward.at(x, y) * marginal[x] / effect[y];
    }
  }
  // Clean up rounding so each row passes the distribution validation.
  for (auto& row : rows) {
    for (double& p : row) p = std::clamp(p, 0.0, 1.0);
    double sum = std::accumulate(row.begin(), row.end(), 0.0);
    double err = sum - 1.0;
    if (err != 0.0 && std::abs(err) <= kProbTol) {
      *std::max_element(row.begin(), row.end()) -= err;
    }
  }
  return ReverseChannelResult{ChannelMatrix(rows),
                              CategoricalDistribution::from_weights(effect)};
}

bool is_uniform_channel(const ChannelMatrix& channel, PermutationKind kind,
                        double tol) {
  if (!(tol > 0.0)) {
    throw Error("tolerance must be positive");
  }
  const std::size_t nx = channel.input_size();
  const std::size_t ny = channel.output_size();
  if (kind == PermutationKind::general) {
    std::vector<double> first = channel.row(0).probs();
    std::sort(first.begin(), first.end(), std::greater<>());
    for (std::size_t x = 1; x < nx; ++x) {
      std::vector<double> row = channel.row(x).probs();
      std::sort(row.begin(), row.end(), std::greater<>());
      for (std::size_t y = 0; y < ny; ++y) {
        if (std::abs(row[y] - first[y]) > tol) return false;
      }
    }
    return true;
  }
  const auto& first = channel.row(0).probs();
  for (std::size_t x = 1; x < nx; ++x) {
    const auto& row = channel.row(x).probs();
    bool matched = false;
    for (std::size_t s = 0; s < ny && !matched; ++s) {
      matched = true;
      for (std::size_t y = 0; y < ny; ++y) {
        if (std::abs(row[y] - first[(y + s) % ny]) > tol) {
          matched = false;
          break;
        }
      }
    }
    if (!matched) return false;
  }
  return true;
}

double conditional_entropy(const ChannelMatrix& channel,
                           const CategoricalDistribution& marginal) {
  if (marginal.size() != channel.input_size()) {
    throw DimensionMismatchError("marginal length differs from channel rows");
  }
  double h = 0.0;
  for (std::size_t x = 0; x < channel.input_size(); ++x) {
    h += marginal[x] * entropy(channel.row(x));
  }
  return h;
}

PrunedTable prune_zero_support(const ContingencyTable& table) {
  std::vector<std::size_t> kept_rows;
  std::vector<std::size_t> kept_cols;
  for (std::size_t x = 0; x < table.rows(); ++x) {
    if (table.row_total(x) > 0.0) kept_rows.push_back(x);
  }
  for (std::size_t y = 0; y < table.cols(); ++y) {
    if (table.col_total(y) > 0.0) kept_cols.push_back(y);
  }
  if (kept_rows.empty() || kept_cols.empty()) {
    throw EmptyTableError("table has no support left after pruning");
  }
  std::vector<std::vector<double>> counts(kept_rows.size(),
                                          std::vector<double>(kept_cols.size()));
  for (std::size_t i = 0; i < kept_rows.size(); ++i) {
    for (std::size_t j = 0; j < kept_cols.size(); ++j) {
      counts[i][j] = table.at(kept_rows[i], kept_cols[j]);
    }
  }
  return PrunedTable{ContingencyTable(std::move(counts)), std::move(kept_rows),
                     std::move(kept_cols)};
}

}  // namespace ucm
