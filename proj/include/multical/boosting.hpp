#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "multical/dataset.hpp"
#include "multical/tree.hpp"

namespace multical {

// Greedy least-squares boosting configuration. The stopping defaults
// (patience 50, cap 5000 trees, 30% internal holdout) are the protocol the
// rest of the toolkit assumes.
struct BoostConfig {
    double learning_rate = 0.1;
    std::size_t max_trees = 5000;
    std::size_t patience = 50;
    double holdout_fraction = 0.3;  // 0 disables early stopping
    double feature_subsample = 1.0;  // fraction of candidate predicates per tree
    std::size_t min_leaf_count = 1;
    std::uint64_t seed = 0;
    std::size_t threshold_bins = 256;
};

// Residual-variance-leveraging booster parameters: stop when the centered
// residual norm drops below n*rho, after t_max rounds, or when the base
// learner's edge falls below epsilon_floor.
struct SquareLevConfig {
    double rho = 1e-12;
    std::size_t t_max = 1000;
    double epsilon_floor = 1e-9;
    std::uint64_t seed = 0;
};

struct FitTraceRecord {
    std::size_t iteration = 0;
    double train_loss = 0.0;
    double holdout_loss = std::numeric_limits<double>::quiet_NaN();
    std::string split;
    // SquareLev-only fields
    double edge = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double variance_before = std::numeric_limits<double>::quiet_NaN();
    double variance_after = std::numeric_limits<double>::quiet_NaN();
};

struct FitTrace {
    std::vector<FitTraceRecord> records;
    std::string stop_reason;
    std::size_t best_iteration = 0;  // retained ensemble size
};

// Fits depth-two trees to the residuals y - prediction by exhaustive greedy
// variance-reduction search over group indicators and base-score thresholds.
// Returns the ensemble truncated at the best internal-holdout iteration.
std::pair<EnsemblePredictor, FitTrace> fit_greedy(const CalibrationDataset& ds,
                                                  const BoostConfig& cfg);

// SquareLev.R: per round, fit one greedy depth-two tree to the centered
// residuals, step by alpha_t = edge * |r~| / |f~|. Each step contracts the
// residual variance by exactly (1 - edge^2).
std::pair<EnsemblePredictor, FitTrace> fit_squarelev(const CalibrationDataset& ds,
                                                     const SquareLevConfig& cfg);

// Ensemble predictions for every row of a dataset.
std::vector<double> predict_rows(const EnsemblePredictor& e, const CalibrationDataset& ds);

}  // namespace multical
