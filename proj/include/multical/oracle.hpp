#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "multical/dataset.hpp"
#include "multical/tree.hpp"

namespace multical {
namespace oracle {

// Exact minimum of the squared loss over per-level-set affine corrections of
// `base_discrete`: independent ordinary least squares of y - v_j on (1, g)
// within each level set, minimum-norm on rank deficiency. Returns the
// optimal loss and the achieving patch.
std::pair<double, LevelSetPatch> optimal_patch_loss(const CalibrationDataset& ds,
                                                    const std::vector<double>& base_discrete);

// The constructive single-group patch from the multicalibration lower bound:
// picks the worst group k, sets alpha_j = -mean(pred - y) on each
// (level j, g_k) cell. Returns the patch and the exact squared-loss
// reduction it achieves (strictly greater than mc_error^2 whenever the
// worst group does not cover every row).
std::pair<LevelSetPatch, double> lemma3_patch(const CalibrationDataset& ds,
                                              const std::vector<double>& pred_discrete);

// Literal double-loop enumeration of the worst-group multicalibration
// error. Shares no code with the metrics module.
double exhaustive_mc_error(const std::vector<double>& pred_discrete,
                           const CalibrationDataset& ds);

}  // namespace oracle
}  // namespace multical
