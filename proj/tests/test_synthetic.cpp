#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ucm/rng.hpp"
#include "ucm/synthetic.hpp"
#include "ucm/testing.hpp"

using namespace ucm;

TEST_CASE("random models are deterministic in the seed") {
  const UcmSpec a = random_ucm(3, 4, PermutationKind::general, 12345);
  const UcmSpec b = random_ucm(3, 4, PermutationKind::general, 12345);
  CHECK(a.marginal().probs() == b.marginal().probs());
  CHECK(a.gamma().probs() == b.gamma().probs());
  for (std::size_t x = 0; x < 3; ++x) CHECK(a.sigmas()[x] == b.sigmas()[x]);

  const UcmSpec c = random_ucm(3, 4, PermutationKind::general, 12346);
  CHECK(a.gamma().probs() != c.gamma().probs());
}

TEST_CASE("random model invariants hold across many draws") {
  SplitMix64 rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t nx = 2 + rng.next_below(3);
    const std::size_t ny = 2 + rng.next_below(3);
    const bool cyclic = rng.next_below(2) == 1;
    const UcmSpec spec = random_ucm(
        nx, ny, cyclic ? PermutationKind::cyclic : PermutationKind::general,
        rng.next());
    const ChannelMatrix channel = spec.channel();
    REQUIRE(is_uniform_channel(channel,
                               cyclic ? PermutationKind::cyclic
                                      : PermutationKind::general,
                               1e-12));
    // support guard on the cause marginal
    for (std::size_t x = 0; x < nx; ++x) CHECK(spec.marginal()[x] >= 1e-3);
    // no independence-degenerate draws slip through
    double max_row_gap = 0.0;
    for (std::size_t x = 0; x < nx; ++x) {
      for (std::size_t y = 0; y < ny; ++y) {
        max_row_gap = std::max(max_row_gap,
                               std::abs(channel.at(x, y) - channel.at(0, y)));
      }
    }
    CHECK(max_row_gap > 1e-9);
  }
}

TEST_CASE("no all-rows-equal draw survives the guard") {
  SplitMix64 rng(32);
  int degenerate = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const UcmSpec spec = random_ucm(3, 3, PermutationKind::general,
                                    rng.next());
    const ChannelMatrix channel = spec.channel();
    bool all_equal = true;
    for (std::size_t x = 1; x < 3 && all_equal; ++x) {
      for (std::size_t y = 0; y < 3; ++y) {
        if (std::abs(channel.at(x, y) - channel.at(0, y)) > 1e-9) {
          all_equal = false;
          break;
        }
      }
    }
    degenerate += all_equal ? 1 : 0;
  }
  CHECK(degenerate == 0);
}

TEST_CASE("cyclic draws use rotations only") {
  const UcmSpec spec = random_ucm(5, 6, PermutationKind::cyclic, 77);
  for (const auto& sigma : spec.sigmas()) {
    CHECK(sigma.kind() == PermutationKind::cyclic);
  }
}

TEST_CASE("a large sample reproduces the channel") {
  const UcmSpec spec = random_ucm(3, 3, PermutationKind::general, 2020);
  const ContingencyTable table = sample(spec, 1000000, 2021);
  CHECK(table.total() == 1000000.0);
  const ChannelMatrix truth = spec.channel();
  for (std::size_t x = 0; x < 3; ++x) {
    REQUIRE(table.row_total(x) > 0.0);
    for (std::size_t y = 0; y < 3; ++y) {
      const double empirical = table.at(x, y) / table.row_total(x);
      CHECK(std::abs(empirical - truth.at(x, y)) <= 0.01);
    }
  }
}

TEST_CASE("a point-mass effect concentrates each row") {
  // gamma = (1, 0, 0): every cause maps all mass to one effect symbol
  const UcmSpec spec(
      CategoricalDistribution({0.5, 0.5}), CategoricalDistribution({1, 0, 0}),
      {Permutation({0, 1, 2}), Permutation({2, 0, 1})},
      PermutationKind::general);
  const ContingencyTable table = sample(spec, 500, 3);
  for (std::size_t x = 0; x < 2; ++x) {
    int nonzero = 0;
    for (std::size_t y = 0; y < 3; ++y) nonzero += table.at(x, y) > 0 ? 1 : 0;
    CHECK(nonzero <= 1);
  }
}

TEST_CASE("a single draw lands in a single cell") {
  const UcmSpec spec = random_ucm(2, 2, PermutationKind::general, 8);
  const ContingencyTable table = sample(spec, 1, 9);
  CHECK(table.total() == 1.0);
  int nonzero = 0;
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < 2; ++y) nonzero += table.at(x, y) == 1.0;
  }
  CHECK(nonzero == 1);
}

TEST_CASE("structural and conditional samplers are indistinguishable") {
  // Pool both samplers into a (method x outcome) table; independence of the
  // method label certifies they draw from the same joint distribution.
  const UcmSpec spec = random_ucm(3, 3, PermutationKind::general, 314);
  const std::size_t n = 100000;
  const ContingencyTable scm = sample(spec, n, 315);
  const ContingencyTable direct =
      sample_channel(spec.channel(), spec.marginal(), n, 316);
  std::vector<std::vector<double>> pooled(2, std::vector<double>(9, 0.0));
  for (std::size_t x = 0; x < 3; ++x) {
    for (std::size_t y = 0; y < 3; ++y) {
      pooled[0][3 * x + y] = scm.at(x, y);
      pooled[1][3 * x + y] = direct.at(x, y);
    }
  }
  const TestResult r = independence_test(ContingencyTable(pooled));
  CHECK(r.p_value > 0.01);
}

TEST_CASE("model entropy is the entropy of the shared pmf") {
  SplitMix64 rng(218);
  const UcmSpec spec = random_ucm(4, 3, PermutationKind::general, 219);
  const double h = entropy(spec.gamma());
  for (int rep = 0; rep < 5; ++rep) {
    const auto marginal =
        CategoricalDistribution::from_weights(flat_simplex(rng, 4));
    CHECK(conditional_entropy(spec.channel(), marginal) ==
          doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("model documents round-trip through JSON") {
  for (auto kind : {PermutationKind::general, PermutationKind::cyclic}) {
    const UcmSpec spec = random_ucm(3, 4, kind, 5150);
    const nlohmann::json doc = to_json(spec);
    CHECK(doc.at("sizes") == nlohmann::json({3, 4}));
    CHECK(doc.at("kind").get<std::string>() == to_string(kind));
    CHECK(doc.at("seed").get<std::uint64_t>() == 5150);
    const UcmSpec back = spec_from_json(doc);
    CHECK(back.marginal().probs() == spec.marginal().probs());
    CHECK(back.gamma().probs() == spec.gamma().probs());
    for (std::size_t x = 0; x < 3; ++x) {
      CHECK(back.sigmas()[x] == spec.sigmas()[x]);
    }
    CHECK(back.kind() == spec.kind());
  }
}

TEST_CASE("hand-built independent models are rejected") {
  CHECK_THROWS_AS(
      UcmSpec(CategoricalDistribution({0.5, 0.5}),
              CategoricalDistribution({0.7, 0.3}),
              {Permutation({0, 1}), Permutation({0, 1})},
              PermutationKind::general),
      Error);
}
