#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "multical/boosting.hpp"
#include "multical/dataset.hpp"
#include "multical/discretize.hpp"
#include "multical/tree.hpp"

namespace multical {

// One cell fix: rows with g_group = 1 currently predicted `level` move to
// d(new_value). Records replay in order.
struct PatchRecord {
    std::size_t group = 0;
    double level = 0.0;
    double new_value = 0.0;
};

struct PatchTable {
    std::vector<PatchRecord> records;
};

// One boosting round of level-set weak learners: trees keyed by the level
// value they were fit on; rows at other levels pass through unchanged.
struct LsRound {
    std::vector<std::pair<double, DepthTwoTree>> level_trees;
};

struct LsBoostModel {
    double learning_rate = 1.0;
    std::vector<LsRound> rounds;
};

struct LinearModel {
    double intercept = 0.0;
    std::vector<double> weights;
    double lambda = 0.0;
};

enum class CalibratorKind { ours, mcboost, lsboost, multiaccurate };

std::string kind_name(CalibratorKind k);
CalibratorKind kind_from_name(const std::string& name);

struct CalibratedModel {
    CalibratorKind kind = CalibratorKind::ours;
    std::optional<Discretizer> discretizer;  // mandatory for mcboost/lsboost
    std::variant<EnsemblePredictor, PatchTable, LsBoostModel, LinearModel> payload;
};

struct McBoostConfig {
    double holdout_fraction = 0.3;
    std::size_t max_rounds = 2000;
    std::uint64_t seed = 0;
};

struct LsBoostConfig {
    std::size_t depth = 2;  // 1 or 2
    double learning_rate = 1.0;
    double subsample = 1.0;
    std::size_t max_rounds = 200;
    double holdout_fraction = 0.3;
    std::size_t min_leaf_count = 1;
    std::uint64_t seed = 0;
};

// The discretization-free calibrator: greedy squared-loss boosting on
// features (f0, g) with targets y - f0; returns a continuous clamped
// predictor with no discretizer attached.
CalibratedModel calibrate_ours(const CalibrationDataset& ds, const BoostConfig& cfg,
                               FitTrace* trace = nullptr);
CalibratedModel calibrate_ours(const CalibrationDataset& ds, const SquareLevConfig& cfg,
                               FitTrace* trace = nullptr);

// Iterative worst-cell patching over the grid: each round moves the
// (group, level) cell with the largest mass-weighted deviation to its
// label mean, then re-discretizes.
CalibratedModel calibrate_mcboost(const CalibrationDataset& ds, const Discretizer& d,
                                  const McBoostConfig& cfg);

// Level-set boosting: per round and per level set, fit a depth-1/2 weak
// learner on group indicators to predict y, then step the level values
// toward it and re-discretize.
CalibratedModel calibrate_lsboost(const CalibrationDataset& ds, const Discretizer& d,
                                  const LsBoostConfig& cfg);

// L1-regularized linear correction on group indicators, fit by cyclic
// coordinate descent with soft thresholding.
CalibratedModel calibrate_multiaccurate(const CalibrationDataset& ds, double lambda);

double predict(const CalibratedModel& model, double f0, const std::uint8_t* g,
               std::size_t num_groups);
std::vector<double> predict_dataset(const CalibratedModel& model, const CalibrationDataset& ds);

}  // namespace multical
