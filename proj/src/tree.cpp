#include "multical/tree.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace multical {

std::string SplitPredicate::describe() const {
    if (kind == Kind::threshold) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "f0>=%.6g", threshold);
        return buf;
    }
    return "g[" + std::to_string(group) + "]";
}

double tree_predict(const DepthTwoTree& t, double f0, const std::uint8_t* g) {
    if (t.root.contains(f0, g))
        return t.left.contains(f0, g) ? t.leaves[0] : t.leaves[1];
    return t.right.contains(f0, g) ? t.leaves[2] : t.leaves[3];
}

double EnsemblePredictor::raw_sum(double f0, const std::uint8_t* g) const {
    double acc = f0;
    for (const DepthTwoTree& t : trees) acc += tree_predict(t, f0, g);
    return acc;
}

double EnsemblePredictor::predict(double f0, const std::uint8_t* g) const {
    const double v = raw_sum(f0, g);
    if (!clamp) return v;
    return std::min(1.0, std::max(0.0, v));
}

double ensemble_predict(const EnsemblePredictor& e, double f0, const std::uint8_t* g) {
    return e.predict(f0, g);
}

double LevelSetPatch::value(std::size_t level_index, const std::uint8_t* g) const {
    double acc = intercepts[level_index];
    const std::vector<double>& c = coefficients[level_index];
    for (std::size_t i = 0; i < c.size(); ++i)
        if (g[i]) acc += c[i];
    return acc;
}

LevelSetPatch decompose_to_patches(const EnsemblePredictor& e, const std::vector<double>& base,
                                   std::size_t num_groups) {
    LevelSetPatch patch;
    patch.levels = base;
    std::sort(patch.levels.begin(), patch.levels.end());
    patch.levels.erase(std::unique(patch.levels.begin(), patch.levels.end()), patch.levels.end());
    if (patch.levels.empty()) throw std::invalid_argument("decompose_to_patches: empty base");
    for (const DepthTwoTree& t : e.trees)
        for (const SplitPredicate* p : {&t.root, &t.left, &t.right})
            if (p->kind == SplitPredicate::Kind::group && p->group >= num_groups)
                throw std::invalid_argument("decompose_to_patches: group index out of range");

    const std::size_t m = patch.levels.size();
    patch.intercepts.assign(m, 0.0);
    patch.coefficients.assign(m, std::vector<double>(num_groups, 0.0));
    std::vector<std::uint8_t> g(num_groups, 0);
    for (std::size_t j = 0; j < m; ++j) {
        const double v = patch.levels[j];
        std::fill(g.begin(), g.end(), 0);
        double base_value = 0.0;
        for (const DepthTwoTree& t : e.trees) base_value += tree_predict(t, v, g.data());
        patch.intercepts[j] = base_value;
        for (std::size_t i = 0; i < num_groups; ++i) {
            g[i] = 1;
            double with_i = 0.0;
            for (const DepthTwoTree& t : e.trees) with_i += tree_predict(t, v, g.data());
            patch.coefficients[j][i] = with_i - base_value;
            g[i] = 0;
        }
    }
    return patch;
}

EnsemblePredictor ensemble_from_patches(const LevelSetPatch& patch, std::size_t num_groups) {
    EnsemblePredictor e;
    e.clamp = false;
    e.metadata.solver = "patch-construction";
    const std::size_t m = patch.num_levels();
    // telescoping: the tree block gated at level j must contribute
    // h_j - (contribution of blocks 1..j-1), so track the running sums
    double running_intercept = 0.0;
    std::vector<double> running_coef(num_groups, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const double v = patch.levels[j];
        const double want_intercept = patch.intercepts[j] - running_intercept;
        if (want_intercept != 0.0) {
            DepthTwoTree t;
            t.root = SplitPredicate::at_threshold(v);
            t.left = SplitPredicate::on_group(0);
            t.right = SplitPredicate::on_group(0);
            t.leaves[0] = want_intercept;
            t.leaves[1] = want_intercept;
            e.trees.push_back(t);
        }
        running_intercept += want_intercept;
        for (std::size_t i = 0; i < num_groups; ++i) {
            const double want = patch.coefficients[j][i] - running_coef[i];
            if (want != 0.0) {
                DepthTwoTree t;
                t.root = SplitPredicate::at_threshold(v);
                t.left = SplitPredicate::on_group(i);
                t.right = SplitPredicate::on_group(i);
                t.leaves[0] = want;
                e.trees.push_back(t);
            }
            running_coef[i] += want;
        }
    }
    e.metadata.iterations = e.trees.size();
    return e;
}

}  // namespace multical
