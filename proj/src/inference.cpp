#include "ucm/inference.hpp"

namespace ucm {

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::x_to_y:
      return "x_to_y";
    case Verdict::y_to_x:
      return "y_to_x";
    case Verdict::undecided_wrong_model:
      return "undecided_wrong_model";
    case Verdict::undecided_both_possible:
      return "undecided_both_possible";
  }
  throw Error("unknown verdict");
}

Verdict classify(double p_xy, double p_yx, double alpha, bool forced) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw Error("alpha must lie strictly between 0 and 1");
  }
  if (forced) {
    return p_xy >= p_yx ? Verdict::x_to_y : Verdict::y_to_x;
  }
  const bool xy_ok = p_xy >= alpha;
  const bool yx_ok = p_yx >= alpha;
  if (xy_ok && !yx_ok) return Verdict::x_to_y;
  if (!xy_ok && yx_ok) return Verdict::y_to_x;
  if (!xy_ok && !yx_ok) return Verdict::undecided_wrong_model;
  return Verdict::undecided_both_possible;
}

Decision decide(const ContingencyTable& table, const DecisionConfig& config) {
  const PrunedTable pruned = prune_zero_support(table);
  if (pruned.table.rows() < 2 || pruned.table.cols() < 2) {
    throw DegenerateTableError(
        "fewer than two categories on one axis after pruning");
  }
  // The effect-side variable picks the channel family for each direction.
  const PermutationKind kind_y = config.y_cyclic ? PermutationKind::cyclic
                                                 : PermutationKind::general;
  const PermutationKind kind_x = config.x_cyclic ? PermutationKind::cyclic
                                                 : PermutationKind::general;
  LrtDetail xy =
      lrt_ucm_detailed(pruned.table, kind_y, config.estimation, "x_to_y");
  LrtDetail yx = lrt_ucm_detailed(pruned.table.transposed(), kind_x,
                                  config.estimation, "y_to_x");
  const Verdict verdict = classify(xy.result.p_value, yx.result.p_value,
                                   config.alpha, config.forced);
  return Decision{
      verdict,
      xy.result.p_value,
      yx.result.p_value,
      xy.result.g2,
      yx.result.g2,
      DirectionDetail{xy.result, std::move(xy.null_estimate),
                      xy.arbitrary_log_likelihood},
      DirectionDetail{yx.result, std::move(yx.null_estimate),
                      yx.arbitrary_log_likelihood},
  };
}

}  // namespace ucm
