#pragma once

#include <cstddef>
#include <string>

#include "multical/boosting.hpp"
#include "multical/calibrators.hpp"
#include "multical/dataset.hpp"
#include "multical/discretize.hpp"

namespace multical {

// Test-set losses of the base predictor, the calibrated predictor, and the
// calibrated predictor re-calibrated once more. A small epsilon_hat_loss
// means one pass of the post-processor saturates the achievable loss.
struct SaturationReport {
    double loss_f0 = 0.0;
    double loss_fcal = 0.0;
    double loss_second_pass = 0.0;
    double epsilon_hat_loss = 0.0;  // loss_fcal - loss_second_pass, signed
    double threshold = 1e-3;
    bool passes = false;
};

struct BoundCheck {
    double mc_error = 0.0;
    double epsilon_hat_loss = 0.0;
    double epsilon_round = 0.0;
    double bound = 0.0;  // sqrt(max(0,eps_loss) + max(0,eps_round))
    double slack = 0.0;  // finite-sample allowance added on top
    bool satisfied = false;
};

struct AuditResult {
    SaturationReport saturation;
    CalibratedModel first_pass;
    std::vector<double> test_predictions;  // of the first pass, on ds_test
};

// Fits the calibrator on ds_cal, then re-runs it with the calibrated
// outputs as the new base scores, and reports all three losses on ds_test.
AuditResult audit_saturation(const CalibrationDataset& ds_cal, const CalibrationDataset& ds_test,
                             const BoostConfig& cfg, double pass_threshold = 1e-3);

// Checks the multicalibration error of the m-discretized calibrated
// predictor against sqrt(eps_loss + eps_round) plus a finite-sample slack
// of 2*sqrt(ln(2K/delta)/(2n)) at delta = 0.05.
BoundCheck check_theorem1(const CalibrationDataset& ds_test, const CalibratedModel& model,
                          const Discretizer& d, const SaturationReport& saturation);

// Unit-constant asymptotic estimate of the tree count and sample size that
// reach multicalibration error alpha with confidence 1-delta, given weak
// learners of edge at least epsilon_min.
struct SampleComplexity {
    std::size_t num_trees = 0;
    std::size_t num_samples = 0;
    std::string note = "unit-constant asymptotic estimate";
};

SampleComplexity sample_complexity(double alpha, double epsilon_min, std::size_t num_groups,
                                   double delta);

}  // namespace multical
