#include "multical/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace multical {

namespace {
constexpr std::size_t kMaxDistinctValues = 10000;

std::vector<std::size_t> level_index_of(const std::vector<double>& pred,
                                        std::vector<double>* levels_out) {
    std::vector<double> levels = pred;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    if (levels.size() > kMaxDistinctValues)
        throw std::invalid_argument(
            "predictor has more than 10000 distinct values; discretize before "
            "computing multicalibration error");
    std::vector<std::size_t> idx(pred.size());
    for (std::size_t r = 0; r < pred.size(); ++r) {
        const auto it = std::lower_bound(levels.begin(), levels.end(), pred[r]);
        idx[r] = static_cast<std::size_t>(it - levels.begin());
    }
    if (levels_out) *levels_out = std::move(levels);
    return idx;
}
}  // namespace

double squared_loss(const std::vector<double>& pred, const std::vector<double>& labels) {
    if (pred.size() != labels.size() || pred.empty())
        throw std::invalid_argument("squared_loss: length mismatch or empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - labels[i];
        acc += e * e;
    }
    return acc / static_cast<double>(pred.size());
}

MulticalibrationResult multicalibration_error(const std::vector<double>& pred_discrete,
                                              const CalibrationDataset& ds) {
    if (pred_discrete.size() != ds.n)
        throw std::invalid_argument("multicalibration_error: prediction length mismatch");
    std::vector<double> levels;
    const std::vector<std::size_t> level_of = level_index_of(pred_discrete, &levels);
    const std::size_t num_levels = levels.size();

    MulticalibrationResult res;
    res.per_group.assign(ds.num_groups, 0.0);
    // mass * |mean deviation| per cell collapses to |sum of deviations| / n
    std::vector<double> cell_dev(num_levels);
    for (std::size_t i = 0; i < ds.num_groups; ++i) {
        std::fill(cell_dev.begin(), cell_dev.end(), 0.0);
        const std::uint8_t* col = ds.group_column(i);
        for (std::size_t r = 0; r < ds.n; ++r)
            if (col[r]) cell_dev[level_of[r]] += pred_discrete[r] - ds.labels[r];
        double err = 0.0;
        for (double s : cell_dev) err += std::abs(s);
        res.per_group[i] = err / static_cast<double>(ds.n);
        if (res.per_group[i] > res.max_error) {
            res.max_error = res.per_group[i];
            res.worst_group = i;
        }
    }
    return res;
}

double multiaccuracy_error(const std::vector<double>& pred, const CalibrationDataset& ds) {
    if (pred.size() != ds.n)
        throw std::invalid_argument("multiaccuracy_error: prediction length mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < ds.num_groups; ++i) {
        const std::uint8_t* col = ds.group_column(i);
        double dev = 0.0;
        for (std::size_t r = 0; r < ds.n; ++r)
            if (col[r]) dev += pred[r] - ds.labels[r];
        worst = std::max(worst, std::abs(dev) / static_cast<double>(ds.n));
    }
    return worst;
}

double worst_group_binned_ece(const std::vector<double>& pred, const CalibrationDataset& ds,
                              std::size_t bins) {
    if (pred.size() != ds.n)
        throw std::invalid_argument("worst_group_binned_ece: prediction length mismatch");
    if (bins == 0) throw std::invalid_argument("worst_group_binned_ece: bins must be >= 1");
    std::vector<double> dev(bins);
    double worst = 0.0;
    for (std::size_t i = 0; i < ds.num_groups; ++i) {
        const std::uint8_t* col = ds.group_column(i);
        std::fill(dev.begin(), dev.end(), 0.0);
        std::size_t members = 0;
        for (std::size_t r = 0; r < ds.n; ++r) {
            if (!col[r]) continue;
            ++members;
            std::size_t b = static_cast<std::size_t>(pred[r] * static_cast<double>(bins));
            if (b >= bins) b = bins - 1;
            dev[b] += pred[r] - ds.labels[r];
        }
        if (members == 0) continue;
        double ece = 0.0;
        for (double s : dev) ece += std::abs(s);
        worst = std::max(worst, ece / static_cast<double>(members));
    }
    return worst;
}

EvaluationReport evaluate_predictions(const std::vector<double>& pred,
                                      const CalibrationDataset& ds, const Discretizer& d,
                                      std::size_t ece_bins) {
    EvaluationReport rep;
    const std::vector<double> disc= multical::apply(d, pred);
    rep.squared_loss = squared_loss(pred, ds.labels);
    MulticalibrationResult mc = multicalibration_error(disc, ds);
    rep.mc_error = mc.max_error;
    rep.worst_group_index = mc.worst_group;
    rep.per_group_mc = std::move(mc.per_group);
    rep.multiaccuracy_error = multiaccuracy_error(pred, ds);
    rep.worst_group_binned_ece = worst_group_binned_ece(pred, ds, ece_bins);
    rep.ece_bins = ece_bins;
    rep.m = d.m;
    rep.nonempty_range = nonempty_range_size(d, pred);
    rep.epsilon_round = squared_loss(disc, ds.labels) - rep.squared_loss;
    return rep;
}

}  // namespace multical
