#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "ucm/core.hpp"

namespace ucm {

/// Ground-truth generative model: cause marginal, shared effect pmf, and the
/// per-cause permutations that place it. Equivalently the structural form
/// X := U_X, Y := tau_X(U_Y) with U_X ~ marginal, U_Y ~ gamma and
/// tau_x = sigma_x^{-1}.
class UcmSpec {
 public:
  UcmSpec(CategoricalDistribution marginal, CategoricalDistribution gamma,
          std::vector<Permutation> sigmas, PermutationKind kind,
          std::uint64_t seed = 0);

  const CategoricalDistribution& marginal() const { return marginal_; }
  const CategoricalDistribution& gamma() const { return gamma_; }
  const std::vector<Permutation>& sigmas() const { return sigmas_; }
  PermutationKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t input_size() const { return marginal_.size(); }
  std::size_t output_size() const { return gamma_.size(); }

  /// theta[x][y] = gamma[sigma_x(y)].
  ChannelMatrix channel() const;

 private:
  CategoricalDistribution marginal_;
  CategoricalDistribution gamma_;
  std::vector<Permutation> sigmas_;
  PermutationKind kind_;
  std::uint64_t seed_;
};

/// Draws a random model: marginal and gamma from the flat simplex
/// distribution, permutations uniform over the full or cyclic group. Redraws
/// until min(marginal) >= 1e-3 and the channel rows are not all equal
/// (within 1e-9). Deterministic in the seed.
UcmSpec random_ucm(std::size_t nx, std::size_t ny, PermutationKind kind,
                   std::uint64_t seed);

/// Draws n i.i.d. pairs through the structural form (x ~ marginal,
/// u ~ gamma, y = tau_x(u)) and tallies them. Counts sum to n.
ContingencyTable sample(const UcmSpec& spec, std::size_t n, std::uint64_t seed);

/// Reference sampler through the conditional directly: x ~ marginal, then
/// y ~ channel row x. Distributionally identical to sample() for the
/// spec's channel.
ContingencyTable sample_channel(const ChannelMatrix& channel,
                                const CategoricalDistribution& marginal,
                                std::size_t n, std::uint64_t seed);

/// Arbitrary random channel (independent flat-simplex rows); handy as a
/// non-uniform negative case.
ChannelMatrix random_channel(std::size_t nx, std::size_t ny,
                             std::uint64_t seed);

/// Provenance document: {sizes, kind, marginal, gamma, sigmas, seed} with
/// 0-based permutation mappings.
nlohmann::json to_json(const UcmSpec& spec);
UcmSpec spec_from_json(const nlohmann::json& doc);

}  // namespace ucm
