#include "multical/audit.hpp"

#include <cmath>
#include <stdexcept>

#include "multical/metrics.hpp"

namespace multical {

AuditResult audit_saturation(const CalibrationDataset& ds_cal, const CalibrationDataset& ds_test,
                             const BoostConfig& cfg, double pass_threshold) {
    if (ds_cal.num_groups != ds_test.num_groups)
        throw std::invalid_argument("calibration and test sets disagree on groups");

    AuditResult out;
    out.first_pass = calibrate_ours(ds_cal, cfg);

    const std::vector<double> cal_pred = predict_dataset(out.first_pass, ds_cal);
    out.test_predictions = predict_dataset(out.first_pass, ds_test);

    // second pass: same groups and labels, the first pass output as base
    CalibrationDataset cal2 = ds_cal;
    cal2.base_scores = cal_pred;
    const CalibratedModel second = calibrate_ours(cal2, cfg);

    CalibrationDataset test2 = ds_test;
    test2.base_scores = out.test_predictions;
    const std::vector<double> second_pred = predict_dataset(second, test2);

    SaturationReport& rep = out.saturation;
    rep.loss_f0 = squared_loss(ds_test.base_scores, ds_test.labels);
    rep.loss_fcal = squared_loss(out.test_predictions, ds_test.labels);
    rep.loss_second_pass = squared_loss(second_pred, ds_test.labels);
    rep.epsilon_hat_loss = rep.loss_fcal - rep.loss_second_pass;
    rep.threshold = pass_threshold;
    rep.passes = std::abs(rep.epsilon_hat_loss) < pass_threshold;
    return out;
}

BoundCheck check_theorem1(const CalibrationDataset& ds_test, const CalibratedModel& model,
                          const Discretizer& d, const SaturationReport& saturation) {
    if (model.kind != CalibratorKind::ours)
        throw std::invalid_argument("check_theorem1 expects a continuous (ours) model");

    const std::vector<double> pred = predict_dataset(model, ds_test);
    const std::vector<double> disc= multical::apply(d, pred);

    BoundCheck check;
    check.mc_error = multicalibration_error(disc, ds_test).max_error;
    check.epsilon_hat_loss = saturation.epsilon_hat_loss;
    check.epsilon_round = squared_loss(disc, ds_test.labels) - squared_loss(pred, ds_test.labels);
    check.bound = std::sqrt(std::max(0.0, check.epsilon_hat_loss) +
                            std::max(0.0, check.epsilon_round));
    const double delta = 0.05;
    check.slack = 2.0 * std::sqrt(std::log(2.0 * static_cast<double>(ds_test.num_groups) / delta) /
                                  (2.0 * static_cast<double>(ds_test.n)));
    check.satisfied = check.mc_error <= check.bound + check.slack;
    return check;
}

SampleComplexity sample_complexity(double alpha, double epsilon_min, std::size_t num_groups,
                                   double delta) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    if (!(epsilon_min > 0.0 && epsilon_min <= 1.0))
        throw std::invalid_argument("epsilon_min must be in (0,1]");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
    if (num_groups == 0) throw std::invalid_argument("num_groups must be >= 1");

    SampleComplexity out;
    const double log_inv_alpha = std::log(1.0 / alpha);
    out.num_trees = static_cast<std::size_t>(
        std::ceil(2.0 * log_inv_alpha / (epsilon_min * epsilon_min)));
    const double a4 = std::pow(alpha, -4.0);
    const double e4 = std::pow(epsilon_min, -4.0);
    const double n = a4 * e4 * std::log(static_cast<double>(num_groups)) * log_inv_alpha *
                         log_inv_alpha +
                     a4 * std::log(1.0 / delta);
    out.num_samples = static_cast<std::size_t>(std::ceil(n));
    return out;
}

}  // namespace multical
