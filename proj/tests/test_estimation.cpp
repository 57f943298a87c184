#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "test_util.hpp"
#include "ucm/estimation.hpp"
#include "ucm/rng.hpp"

using namespace ucm;

namespace {

ContingencyTable shuffled_columns(const ContingencyTable& table,
                                  SplitMix64& rng) {
  std::vector<std::size_t> order(table.cols());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ucm::shuffle(rng, order);
  std::vector<std::vector<double>> counts(table.rows(),
                                          std::vector<double>(table.cols()));
  for (std::size_t x = 0; x < table.rows(); ++x) {
    for (std::size_t y = 0; y < table.cols(); ++y) {
      counts[x][y] = table.at(x, order[y]);
    }
  }
  return ContingencyTable(std::move(counts));
}

ContingencyTable shifted_columns(const ContingencyTable& table,
                                 std::size_t shift) {
  std::vector<std::vector<double>> counts(table.rows(),
                                          std::vector<double>(table.cols()));
  for (std::size_t x = 0; x < table.rows(); ++x) {
    for (std::size_t y = 0; y < table.cols(); ++y) {
      counts[x][y] = table.at(x, (y + shift) % table.cols());
    }
  }
  return ContingencyTable(std::move(counts));
}

}  // namespace

TEST_CASE("marginal estimate is the row-total fraction") {
  CHECK(estimate_marginal(ContingencyTable({{4, 6}, {10, 20}})).probs() ==
        std::vector<double>{0.25, 0.75});
  const auto thirds = estimate_marginal(ContingencyTable({{7}, {7}, {7}}));
  for (std::size_t x = 0; x < 3; ++x) {
    CHECK(thirds[x] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  }
  // Smoothing keeps a symmetric table symmetric.
  const auto smoothed =
      estimate_marginal(ContingencyTable({{0, 5}, {5, 0}}).smoothed(1e-3));
  CHECK(smoothed[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(smoothed[1] == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(estimate_marginal(ContingencyTable({{0.0, 0.0}})),
                  EmptyTableError);
}

TEST_CASE("arbitrary channel estimate is the per-row frequency") {
  const auto fit = estimate_arbitrary(ContingencyTable({{8, 2}, {3, 7}}));
  CHECK(fit.channel.at(0, 0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(fit.channel.at(0, 1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(fit.channel.at(1, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(fit.channel.at(1, 1) == doctest::Approx(0.7).epsilon(1e-15));

  const auto flat = estimate_arbitrary(ContingencyTable({{5, 5}, {5, 5}}));
  CHECK(flat.log_likelihood ==
        doctest::Approx(20.0 * std::log(0.5)).epsilon(1e-14));

  const auto skewed = estimate_arbitrary(ContingencyTable({{9, 1}, {1, 9}}));
  CHECK(skewed.log_likelihood ==
        doctest::Approx(18.0 * std::log(0.9) + 2.0 * std::log(0.1))
            .epsilon(1e-14));
  CHECK(skewed.log_likelihood == doctest::Approx(-6.5017).epsilon(1e-4));

  CHECK_THROWS_AS(estimate_arbitrary(ContingencyTable({{1, 1}, {0, 0}})),
                  EmptyRowError);
}

TEST_CASE("shared-pmf estimate with known permutations") {
  const ContingencyTable table({{8, 2}, {3, 7}});
  const auto fit = estimate_uc_known(
      table, {Permutation::identity(2), Permutation({1, 0})});
  CHECK(fit.gamma().probs() == std::vector<double>{0.75, 0.25});
  CHECK(fit.log_likelihood() ==
        doctest::Approx(15.0 * std::log(0.75) + 5.0 * std::log(0.25))
            .epsilon(1e-14));

  // Identity permutations pool plain column sums; gamma is reported sorted
  // but the rebuilt channel keeps the original column layout.
  const auto pooled = estimate_uc_known(
      table, {Permutation::identity(2), Permutation::identity(2)});
  CHECK(pooled.gamma().probs() == std::vector<double>{0.55, 0.45});
  const ChannelMatrix rebuilt = pooled.channel();
  for (std::size_t x = 0; x < 2; ++x) {
    CHECK(rebuilt.at(x, 0) == doctest::Approx(0.55).epsilon(1e-14));
    CHECK(rebuilt.at(x, 1) == doctest::Approx(0.45).epsilon(1e-14));
  }

  // Single row: gamma is that row, normalized and sorted; the channel
  // reconstruction restores the original cell order.
  const auto single =
      estimate_uc_known(ContingencyTable({{2, 6, 2}}),
                        {Permutation::identity(3)});
  CHECK(single.gamma().probs() == std::vector<double>{0.6, 0.2, 0.2});
  const ChannelMatrix row = single.channel();
  CHECK(row.at(0, 0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(row.at(0, 1) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(row.at(0, 2) == doctest::Approx(0.2).epsilon(1e-14));

  CHECK_THROWS_AS(estimate_uc_known(table, {Permutation::identity(2)}),
                  DimensionMismatchError);
  CHECK_THROWS_AS(estimate_uc_known(table, {Permutation::identity(3),
                                            Permutation::identity(3)}),
                  DimensionMismatchError);
}

TEST_CASE("sorting fit on a 2x2 table") {
  const auto fit = estimate_uc(ContingencyTable({{8, 2}, {3, 7}}));
  CHECK(fit.gamma().probs() == std::vector<double>{0.75, 0.25});
  CHECK(fit.taus()[0].mapping() == std::vector<std::size_t>{0, 1});
  CHECK(fit.taus()[1].mapping() == std::vector<std::size_t>{1, 0});
  CHECK(fit.log_likelihood() ==
        doctest::Approx(15.0 * std::log(0.75) + 5.0 * std::log(0.25))
            .epsilon(1e-14));
}

TEST_CASE("sorting fit on degenerate tables") {
  const auto flat = estimate_uc(ContingencyTable({{5, 5}, {5, 5}}));
  CHECK(flat.gamma().probs() == std::vector<double>{0.5, 0.5});
  CHECK(flat.log_likelihood() ==
        doctest::Approx(20.0 * std::log(0.5)).epsilon(1e-14));

  const auto diag =
      estimate_uc(ContingencyTable({{10, 0, 0}, {0, 10, 0}, {0, 0, 10}}));
  CHECK(diag.gamma().probs() == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(diag.log_likelihood() == doctest::Approx(0.0));
  for (std::size_t x = 0; x < 3; ++x) {
    CHECK(diag.taus()[x](0) == x);  // the diagonal cell carries all the mass
  }

  // Ties keep the lower column index first.
  const auto tied = estimate_uc(ContingencyTable({{3, 3, 2}}));
  CHECK(tied.taus()[0].mapping() == std::vector<std::size_t>{0, 1, 2});

  CHECK_THROWS_AS(estimate_uc(ContingencyTable({{1, 1}, {0, 0}})),
                  EmptyRowError);
}

TEST_CASE("sorting fit reaches the exhaustive optimum") {
  SplitMix64 rng(101);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t nx = 2 + rng.next_below(2);
    const std::size_t ny = 2 + rng.next_below(3);
    const ContingencyTable table = testutil::random_int_table(rng, nx, ny);
    const UcmEstimate fast = estimate_uc(table);
    const UcmEstimate slow = oracle_uc(table, PermutationKind::general);
    REQUIRE(std::abs(fast.log_likelihood() - slow.log_likelihood()) <= 1e-9);
    for (std::size_t y = 0; y < ny; ++y) {
      CHECK(std::abs(fast.gamma()[y] - slow.gamma()[y]) <= 1e-12);
    }
  }
}

TEST_CASE("cyclic fit on a 2x3 table matches the cyclic oracle") {
  const ContingencyTable table({{5, 3, 2}, {2, 5, 3}});
  EstimationConfig config;
  const UcmEstimate fit = estimate_cuc(table, config);
  CHECK(fit.gamma().probs() == std::vector<double>{0.5, 0.3, 0.2});
  CHECK(fit.taus()[0].shift() == 0);
  CHECK(fit.taus()[1].shift() == 1);
  const UcmEstimate oracle = oracle_uc(table, PermutationKind::cyclic);
  CHECK(fit.log_likelihood() ==
        doctest::Approx(oracle.log_likelihood()).epsilon(1e-12));
}

TEST_CASE("cyclic fit on identical rows pools them in place") {
  const ContingencyTable table({{4, 1, 5}, {4, 1, 5}});
  const UcmEstimate fit = estimate_cuc(table, EstimationConfig{});
  CHECK(fit.gamma().probs() == std::vector<double>{0.5, 0.4, 0.1});
  CHECK(fit.taus()[0] == fit.taus()[1]);
  const double expected =
      20.0 * (0.5 * std::log(0.5) + 0.4 * std::log(0.4) + 0.1 * std::log(0.1));
  CHECK(fit.log_likelihood() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("binary outputs make the cyclic and general fits agree") {
  SplitMix64 rng(202);
  EstimationConfig config;
  config.rng_seed = 77;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t nx = 2 + rng.next_below(3);
    const ContingencyTable table = testutil::random_int_table(rng, nx, 2);
    const double uc = estimate_uc(table).log_likelihood();
    const double cuc = estimate_cuc(table, config).log_likelihood();
    CHECK(std::abs(uc - cuc) <= 1e-9);
  }
}

TEST_CASE("cyclic fit traces are non-decreasing and finite") {
  SplitMix64 rng(303);
  EstimationConfig config;
  config.rng_seed = 5;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t nx = 2 + rng.next_below(3);
    const std::size_t ny = 2 + rng.next_below(4);
    const ContingencyTable table = testutil::random_int_table(rng, nx, ny);
    const auto runs = estimate_cuc_runs(table, config);
    REQUIRE(runs.size() == static_cast<std::size_t>(config.cuc_restarts) + 1);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& run : runs) {
      REQUIRE(!run.objective_trace.empty());
      CHECK(run.objective_trace.size() <=
            static_cast<std::size_t>(config.cuc_max_iters));
      for (std::size_t i = 1; i < run.objective_trace.size(); ++i) {
        CHECK(run.objective_trace[i] >= run.objective_trace[i - 1]);
      }
      CHECK(run.estimate.log_likelihood() ==
            doctest::Approx(run.objective_trace.back()));
      best = std::max(best, run.estimate.log_likelihood());
    }
    CHECK(estimate_cuc(table, config).log_likelihood() ==
          doctest::Approx(best));
  }
}

TEST_CASE("cyclic fit is deterministic in the seed") {
  const ContingencyTable table({{9, 2, 4, 1}, {3, 8, 2, 5}, {1, 2, 9, 3}});
  EstimationConfig config;
  config.rng_seed = 42;
  const UcmEstimate a = estimate_cuc(table, config);
  const UcmEstimate b = estimate_cuc(table, config);
  CHECK(a.log_likelihood() == b.log_likelihood());
  CHECK(a.gamma().probs() == b.gamma().probs());
  for (std::size_t x = 0; x < 3; ++x) CHECK(a.taus()[x] == b.taus()[x]);
}

TEST_CASE("exhaustive reference on small tables") {
  const UcmEstimate fit =
      oracle_uc(ContingencyTable({{8, 2}, {3, 7}}), PermutationKind::general);
  CHECK(fit.log_likelihood() ==
        doctest::Approx(15.0 * std::log(0.75) + 5.0 * std::log(0.25))
            .epsilon(1e-14));

  const ContingencyTable row({{4, 3, 2, 1}});
  const double expected = 4 * std::log(0.4) + 3 * std::log(0.3) +
                          2 * std::log(0.2) + 1 * std::log(0.1);
  CHECK(oracle_uc(row, PermutationKind::general).log_likelihood() ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(oracle_uc(row, PermutationKind::cyclic).log_likelihood() ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("exhaustive reference rejects oversized search spaces") {
  CHECK_THROWS_AS(
      oracle_uc(ContingencyTable({std::vector<double>(13, 1.0)}),
                PermutationKind::general),
      TooLargeError);
  CHECK_THROWS_AS(
      oracle_uc(ContingencyTable(
                    std::vector<std::vector<double>>(8, std::vector<double>(12, 1.0))),
                PermutationKind::cyclic),
      TooLargeError);
}

TEST_CASE("model nesting orders the maximized likelihoods") {
  SplitMix64 rng(404);
  EstimationConfig config;
  config.cuc_restarts = 5;
  config.rng_seed = 9;
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t nx = 2 + rng.next_below(3);
    const std::size_t ny = 2 + rng.next_below(3);
    const ContingencyTable table =
        testutil::random_int_table(rng, nx, ny).smoothed(1e-3);
    const double arb = estimate_arbitrary(table).log_likelihood;
    const double uc = estimate_uc(table).log_likelihood();
    const double cuc = estimate_cuc(table, config).log_likelihood();
    CHECK(arb >= uc - 1e-9);
    CHECK(uc >= cuc - 1e-9);
  }
}

TEST_CASE("fitted parameters rebuild a valid uniform channel") {
  SplitMix64 rng(505);
  EstimationConfig config;
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t nx = 2 + rng.next_below(3);
    const std::size_t ny = 2 + rng.next_below(3);
    const ContingencyTable table =
        testutil::random_int_table(rng, nx, ny).smoothed(1e-3);
    CHECK(is_uniform_channel(estimate_uc(table).channel(),
                             PermutationKind::general, 1e-12));
    CHECK(is_uniform_channel(estimate_cuc(table, config).channel(),
                             PermutationKind::cyclic, 1e-12));
  }
}

TEST_CASE("column relabeling leaves the sorting fit unchanged") {
  SplitMix64 rng(606);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t nx = 2 + rng.next_below(3);
    const std::size_t ny = 2 + rng.next_below(3);
    const ContingencyTable table = testutil::random_int_table(rng, nx, ny);
    const UcmEstimate base = estimate_uc(table);
    const UcmEstimate moved = estimate_uc(shuffled_columns(table, rng));
    CHECK(std::abs(base.log_likelihood() - moved.log_likelihood()) <= 1e-9);
    for (std::size_t y = 0; y < ny; ++y) {
      CHECK(std::abs(base.gamma()[y] - moved.gamma()[y]) <= 1e-12);
    }
  }
}

TEST_CASE("a common column rotation leaves the cyclic fit unchanged") {
  SplitMix64 rng(707);
  EstimationConfig config;
  config.rng_seed = 13;
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t nx = 2 + rng.next_below(3);
    const std::size_t ny = 2 + rng.next_below(3);
    const ContingencyTable table = testutil::random_real_table(rng, nx, ny);
    const double base = estimate_cuc(table, config).log_likelihood();
    const std::size_t shift = 1 + rng.next_below(ny - 1);
    const double moved =
        estimate_cuc(shifted_columns(table, shift), config).log_likelihood();
    CHECK(std::abs(base - moved) <= 1e-9);
  }
}
