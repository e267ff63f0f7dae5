#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "multical/dataset.hpp"
#include "multical/discretize.hpp"

namespace multical {

struct MulticalibrationResult {
    double max_error = 0.0;
    std::size_t worst_group = 0;
    std::vector<double> per_group;
};

// Mean squared error (1/n) sum (pred_i - y_i)^2.
double squared_loss(const std::vector<double>& pred, const std::vector<double>& labels);

// Worst-group multicalibration error of a finite-range predictor: for each
// group the mass-weighted sum over attained prediction values of the
// absolute mean deviation in the (value, group) cell. Throws if the
// predictor has more than 10000 distinct values (discretize first).
MulticalibrationResult multicalibration_error(const std::vector<double>& pred_discrete,
                                              const CalibrationDataset& ds);

// Mass-weighted worst-group mean deviation, without level-set conditioning.
double multiaccuracy_error(const std::vector<double>& pred, const CalibrationDataset& ds);

// Worst-group binned expected calibration error: equal-width bins on [0,1]
// within each group's member rows; groups enter the max unweighted. Groups
// with no members are skipped.
double worst_group_binned_ece(const std::vector<double>& pred, const CalibrationDataset& ds,
                              std::size_t bins);

// Everything the evaluation protocol reports for one predictor on one
// dataset at one discretization level.
struct EvaluationReport {
    double squared_loss = 0.0;  // of the undiscretized predictions
    double mc_error = 0.0;
    std::size_t worst_group_index = 0;
    std::vector<double> per_group_mc;
    double multiaccuracy_error = 0.0;
    double worst_group_binned_ece = 0.0;
    std::size_t ece_bins = 10;
    std::size_t m = 0;
    std::size_t nonempty_range = 0;
    double epsilon_round = 0.0;  // signed
};

// Evaluates `pred` on `ds` through discretizer `d`: multicalibration on
// d(pred), loss and ECE on the raw predictions.
EvaluationReport evaluate_predictions(const std::vector<double>& pred,
                                      const CalibrationDataset& ds, const Discretizer& d,
                                      std::size_t ece_bins = 10);

}  // namespace multical
