#pragma once

#include <string>

#include "ucm/core.hpp"
#include "ucm/estimation.hpp"
#include "ucm/testing.hpp"

namespace ucm {

enum class Verdict {
  x_to_y,
  y_to_x,
  undecided_wrong_model,
  undecided_both_possible,
};

std::string to_string(Verdict verdict);

struct DecisionConfig {
  double alpha = 0.05;
  bool forced = false;
  bool x_cyclic = false;
  bool y_cyclic = false;
  EstimationConfig estimation{};
};

/// One direction's evidence: the uniform-channel test plus the fitted null.
struct DirectionDetail {
  TestResult test;
  UcmEstimate estimate;
  double arbitrary_log_likelihood;
};

struct Decision {
  Verdict verdict;
  double p_xy;
  double p_yx;
  double g2_xy;
  double g2_yx;
  DirectionDetail xy;
  DirectionDetail yx;
};

/// The four-outcome decision rule applied to a pair of p-values. In forced
/// mode the direction with the larger p wins; an exact tie goes to X->Y.
Verdict classify(double p_xy, double p_yx, double alpha, bool forced);

/// Runs the uniform-channel test in both directions and applies the decision
/// rule. Zero-count rows/columns are pruned first; the test kind for each
/// direction is cyclic when the effect-side variable is flagged cyclic.
/// Throws DegenerateTableError when fewer than two categories remain on
/// either axis after pruning.
Decision decide(const ContingencyTable& table, const DecisionConfig& config);

}  // namespace ucm
