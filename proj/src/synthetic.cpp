#include "ucm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ucm/rng.hpp"

namespace ucm {

namespace {

constexpr double kMinMarginal = 1e-3;
constexpr double kRowEqualTol = 1e-9;

std::vector<double> cumulative(const CategoricalDistribution& dist) {
  std::vector<double> cum(dist.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    acc += dist[i];
    cum[i] = acc;
  }
  cum.back() = 1.0;
  return cum;
}

std::size_t draw(const std::vector<double>& cum, double u) {
  return static_cast<std::size_t>(
      std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
}

bool rows_all_equal(const CategoricalDistribution& gamma,
                    const std::vector<Permutation>& sigmas) {
  for (std::size_t x = 1; x < sigmas.size(); ++x) {
    for (std::size_t y = 0; y < gamma.size(); ++y) {
      if (std::abs(gamma[sigmas[x](y)] - gamma[sigmas[0](y)]) > kRowEqualTol) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

UcmSpec::UcmSpec(CategoricalDistribution marginal, CategoricalDistribution gamma,
                 std::vector<Permutation> sigmas, PermutationKind kind,
                 std::uint64_t seed)
    : marginal_(std::move(marginal)),
      gamma_(std::move(gamma)),
      sigmas_(std::move(sigmas)),
      kind_(kind),
      seed_(seed) {
  if (sigmas_.size() != marginal_.size()) {
    throw DimensionMismatchError("need one permutation per cause category");
  }
  for (const auto& sigma : sigmas_) {
    if (sigma.size() != gamma_.size()) {
      throw DimensionMismatchError("permutation size differs from gamma size");
    }
    if (kind_ == PermutationKind::cyclic &&
        sigma.kind() != PermutationKind::cyclic) {
      throw Error("cyclic model holds a non-cyclic permutation");
    }
  }
  if (rows_all_equal(gamma_, sigmas_)) {
    throw Error("channel rows are all equal (independent pair)");
  }
}

ChannelMatrix UcmSpec::channel() const {
  std::vector<CategoricalDistribution> rows;
  rows.reserve(sigmas_.size());
  for (const auto& sigma : sigmas_) {
    std::vector<double> row(gamma_.size());
    for (std::size_t y = 0; y < gamma_.size(); ++y) row[y] = gamma_[sigma(y)];
    rows.emplace_back(std::move(row));
  }
  return ChannelMatrix(std::move(rows));
}

UcmSpec random_ucm(std::size_t nx, std::size_t ny, PermutationKind kind,
                   std::uint64_t seed) {
  if (nx < 2 || ny < 2) {
    throw Error("random model needs at least two categories per variable");
  }
  SplitMix64 rng = SplitMix64::derive(seed);
  while (true) {
    const std::vector<double> beta = flat_simplex(rng, nx);
    if (*std::min_element(beta.begin(), beta.end()) < kMinMarginal) continue;
    const std::vector<double> gamma = flat_simplex(rng, ny);
    std::vector<Permutation> sigmas;
    sigmas.reserve(nx);
    for (std::size_t x = 0; x < nx; ++x) {
      if (kind == PermutationKind::cyclic) {
        sigmas.push_back(Permutation::cyclic(ny, rng.next_below(ny)));
      } else {
        std::vector<std::size_t> map(ny);
        std::iota(map.begin(), map.end(), std::size_t{0});
        shuffle(rng, map);
        sigmas.emplace_back(std::move(map));
      }
    }
    // Reject the independence-degenerate draw (all rows equal).
    const CategoricalDistribution gamma_dist =
        CategoricalDistribution::from_weights(gamma);
    if (rows_all_equal(gamma_dist, sigmas)) continue;
    return UcmSpec(CategoricalDistribution::from_weights(beta), gamma_dist,
                   std::move(sigmas), kind, seed);
  }
}

ContingencyTable sample(const UcmSpec& spec, std::size_t n,
                        std::uint64_t seed) {
  if (n < 1) {
    throw Error("sample size must be positive");
  }
  const std::vector<double> cum_beta = cumulative(spec.marginal());
  const std::vector<double> cum_gamma = cumulative(spec.gamma());
  std::vector<Permutation> taus;
  taus.reserve(spec.input_size());
  for (const auto& sigma : spec.sigmas()) taus.push_back(sigma.inverse());
  std::vector<std::vector<double>> counts(
      spec.input_size(), std::vector<double>(spec.output_size(), 0.0));
  SplitMix64 rng = SplitMix64::derive(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = draw(cum_beta, rng.next_double());
    const std::size_t u = draw(cum_gamma, rng.next_double());
    counts[x][taus[x](u)] += 1.0;
  }
  return ContingencyTable(std::move(counts));
}

ContingencyTable sample_channel(const ChannelMatrix& channel,
                                const CategoricalDistribution& marginal,
                                std::size_t n, std::uint64_t seed) {
  if (n < 1) {
    throw Error("sample size must be positive");
  }
  if (marginal.size() != channel.input_size()) {
    throw DimensionMismatchError("marginal length differs from channel rows");
  }
  const std::vector<double> cum_beta = cumulative(marginal);
  std::vector<std::vector<double>> cum_rows;
  cum_rows.reserve(channel.input_size());
  for (std::size_t x = 0; x < channel.input_size(); ++x) {
    cum_rows.push_back(cumulative(channel.row(x)));
  }
  std::vector<std::vector<double>> counts(
      channel.input_size(), std::vector<double>(channel.output_size(), 0.0));
  SplitMix64 rng = SplitMix64::derive(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = draw(cum_beta, rng.next_double());
    const std::size_t y = draw(cum_rows[x], rng.next_double());
    counts[x][y] += 1.0;
  }
  return ContingencyTable(std::move(counts));
}

ChannelMatrix random_channel(std::size_t nx, std::size_t ny,
                             std::uint64_t seed) {
  if (nx < 1 || ny < 2) {
    throw Error("channel needs at least one row and two columns");
  }
  SplitMix64 rng = SplitMix64::derive(seed);
  std::vector<CategoricalDistribution> rows;
  rows.reserve(nx);
  for (std::size_t x = 0; x < nx; ++x) {
    rows.push_back(CategoricalDistribution::from_weights(flat_simplex(rng, ny)));
  }
  return ChannelMatrix(std::move(rows));
}

nlohmann::json to_json(const UcmSpec& spec) {
  nlohmann::json sigmas = nlohmann::json::array();
  for (const auto& sigma : spec.sigmas()) sigmas.push_back(sigma.mapping());
  return nlohmann::json{
      {"sizes", {spec.input_size(), spec.output_size()}},
      {"kind", to_string(spec.kind())},
      {"marginal", spec.marginal().probs()},
      {"gamma", spec.gamma().probs()},
      {"sigmas", sigmas},
      {"seed", spec.seed()},
  };
}

UcmSpec spec_from_json(const nlohmann::json& doc) {
  const std::string kind_name = doc.at("kind").get<std::string>();
  PermutationKind kind;
  if (kind_name == "general") {
    kind = PermutationKind::general;
  } else if (kind_name == "cyclic") {
    kind = PermutationKind::cyclic;
  } else {
    throw Error("unknown channel kind: " + kind_name);
  }
  std::vector<Permutation> sigmas;
  for (const auto& mapping : doc.at("sigmas")) {
    sigmas.emplace_back(mapping.get<std::vector<std::size_t>>(), kind);
  }
  return UcmSpec(
      CategoricalDistribution(doc.at("marginal").get<std::vector<double>>()),
      CategoricalDistribution(doc.at("gamma").get<std::vector<double>>()),
      std::move(sigmas), kind, doc.value("seed", std::uint64_t{0}));
}

}  // namespace ucm
