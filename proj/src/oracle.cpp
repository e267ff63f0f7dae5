#include "multical/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace multical {
namespace oracle {

namespace {

// minimum-norm solution of G x = b for symmetric positive semidefinite G
Eigen::VectorXd pseudo_solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > tol) inv[i] = 1.0 / ev[i];
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose() * b;
}

std::vector<double> distinct_sorted(const std::vector<double>& v) {
    std::vector<double> out = v;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

std::pair<double, LevelSetPatch> optimal_patch_loss(const CalibrationDataset& ds,
                                                    const std::vector<double>& base_discrete) {
    if (base_discrete.size() != ds.n)
        throw std::invalid_argument("optimal_patch_loss: base length mismatch");
    const std::size_t K = ds.num_groups;

    LevelSetPatch patch;
    patch.levels = distinct_sorted(base_discrete);
    const std::size_t m = patch.levels.size();
    patch.intercepts.assign(m, 0.0);
    patch.coefficients.assign(m, std::vector<double>(K, 0.0));

    double sse = 0.0;
    std::vector<std::size_t> members;
    for (std::size_t j = 0; j < m; ++j) {
        const double v = patch.levels[j];
        members.clear();
        for (std::size_t r = 0; r < ds.n; ++r)
            if (base_discrete[r] == v) members.push_back(r);
        const std::size_t nj = members.size();

        Eigen::MatrixXd design(nj, K + 1);
        Eigen::VectorXd target(nj);
        for (std::size_t k = 0; k < nj; ++k) {
            const std::size_t r = members[k];
            design(k, 0) = 1.0;
            for (std::size_t i = 0; i < K; ++i)
                design(k, i + 1) = ds.group_member(i, r) ? 1.0 : 0.0;
            target[k] = ds.labels[r] - v;
        }
        const Eigen::VectorXd coef =
            pseudo_solve(design.transpose() * design, design.transpose() * target);
        patch.intercepts[j] = coef[0];
        for (std::size_t i = 0; i < K; ++i) patch.coefficients[j][i] = coef[i + 1];
        sse += (design * coef - target).squaredNorm();
    }
    return {sse / static_cast<double>(ds.n), patch};
}

std::pair<LevelSetPatch, double> lemma3_patch(const CalibrationDataset& ds,
                                              const std::vector<double>& pred_discrete) {
    if (pred_discrete.size() != ds.n)
        throw std::invalid_argument("lemma3_patch: prediction length mismatch");
    const std::size_t K = ds.num_groups;
    const std::vector<double> levels = distinct_sorted(pred_discrete);
    const std::size_t m = levels.size();

    auto level_of = [&](double v) {
        return static_cast<std::size_t>(
            std::lower_bound(levels.begin(), levels.end(), v) - levels.begin());
    };

    // worst group by the same enumeration the error definition uses
    std::size_t worst = 0;
    double worst_err = -1.0;
    std::vector<double> cell_sum(m);
    std::vector<std::size_t> cell_cnt(m);
    for (std::size_t i = 0; i < K; ++i) {
        std::fill(cell_sum.begin(), cell_sum.end(), 0.0);
        for (std::size_t r = 0; r < ds.n; ++r)
            if (ds.group_member(i, r)) cell_sum[level_of(pred_discrete[r])] += pred_discrete[r] - ds.labels[r];
        double err = 0.0;
        for (double s : cell_sum) err += std::abs(s);
        err /= static_cast<double>(ds.n);
        if (err > worst_err) {
            worst_err = err;
            worst = i;
        }
    }

    LevelSetPatch patch;
    patch.levels = levels;
    patch.intercepts.assign(m, 0.0);
    patch.coefficients.assign(m, std::vector<double>(K, 0.0));
    std::fill(cell_sum.begin(), cell_sum.end(), 0.0);
    std::fill(cell_cnt.begin(), cell_cnt.end(), std::size_t{0});
    for (std::size_t r = 0; r < ds.n; ++r) {
        if (!ds.group_member(worst, r)) continue;
        const std::size_t j = level_of(pred_discrete[r]);
        cell_sum[j] += pred_discrete[r] - ds.labels[r];
        cell_cnt[j] += 1;
    }
    for (std::size_t j = 0; j < m; ++j)
        if (cell_cnt[j] > 0)
            patch.coefficients[j][worst] = -cell_sum[j] / static_cast<double>(cell_cnt[j]);

    // exact loss change from applying the patch
    double delta_sse = 0.0;
    for (std::size_t r = 0; r < ds.n; ++r) {
        if (!ds.group_member(worst, r)) continue;
        const std::size_t j = level_of(pred_discrete[r]);
        const double before = pred_discrete[r] - ds.labels[r];
        const double after = before + patch.coefficients[j][worst];
        delta_sse += before * before - after * after;
    }
    return {patch, delta_sse / static_cast<double>(ds.n)};
}

double exhaustive_mc_error(const std::vector<double>& pred_discrete,
                           const CalibrationDataset& ds) {
    if (pred_discrete.size() != ds.n)
        throw std::invalid_argument("exhaustive_mc_error: prediction length mismatch");
    // collect distinct values the naive way
    std::vector<double> values;
    for (double v : pred_discrete) {
        bool seen = false;
        for (double u : values)
            if (u == v) { seen = true; break; }
        if (!seen) values.push_back(v);
    }

    double worst = 0.0;
    for (std::size_t i = 0; i < ds.num_groups; ++i) {
        double err = 0.0;
        for (double v : values) {
            std::size_t count = 0;
            double sum_dev = 0.0;
            for (std::size_t r = 0; r < ds.n; ++r) {
                if (pred_discrete[r] == v && ds.group_member(i, r)) {
                    ++count;
                    sum_dev += pred_discrete[r] - ds.labels[r];
                }
            }
            if (count == 0) continue;
            const double mass = static_cast<double>(count) / static_cast<double>(ds.n);
            const double mean_dev = sum_dev / static_cast<double>(count);
            err += mass * std::abs(mean_dev);
        }
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace oracle
}  // namespace multical
