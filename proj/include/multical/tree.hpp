#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace multical {

// A split is either a base-score threshold {f0 >= v} or a group indicator
// {g_i = 1}. Threshold comparison is exact (>=) on the stored value.
struct SplitPredicate {
    enum class Kind : std::uint8_t { threshold, group };

    Kind kind = Kind::threshold;
    double threshold = 0.0;
    std::size_t group = 0;

    static SplitPredicate at_threshold(double v) { return {Kind::threshold, v, 0}; }
    static SplitPredicate on_group(std::size_t i) { return {Kind::group, 0.0, i}; }

    bool contains(double f0, const std::uint8_t* g) const {
        return kind == Kind::threshold ? f0 >= threshold : g[group] != 0;
    }
    std::string describe() const;
};

// Depth-two regression tree with four real leaves. `left` is the child
// reached when the root predicate holds. Leaf order: (in root, in child),
// (in root, out child), (out root, in child), (out root, out child).
struct DepthTwoTree {
    SplitPredicate root;
    SplitPredicate left;
    SplitPredicate right;
    double leaves[4] = {0.0, 0.0, 0.0, 0.0};
};

double tree_predict(const DepthTwoTree& t, double f0, const std::uint8_t* g);

struct EnsembleMetadata {
    std::string solver;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
};

// An additive correction on top of the base score: f0 + sum of trees,
// optionally clamped to [0,1]. Immutable once fitted; prediction is pure.
struct EnsemblePredictor {
    std::vector<DepthTwoTree> trees;
    bool clamp = true;
    EnsembleMetadata metadata;

    double raw_sum(double f0, const std::uint8_t* g) const;
    double predict(double f0, const std::uint8_t* g) const;
};

double ensemble_predict(const EnsemblePredictor& e, double f0, const std::uint8_t* g);

// One affine-in-groups correction per level-set value of a finite-range
// predictor: value at (v_j, g) is intercepts[j] + sum_i coef[j][i]*g_i.
struct LevelSetPatch {
    std::vector<double> levels;                   // sorted ascending
    std::vector<double> intercepts;               // per level
    std::vector<std::vector<double>> coefficients;  // per level, K entries

    std::size_t num_levels() const { return levels.size(); }
    double value(std::size_t level_index, const std::uint8_t* g) const;
};

// Rewrites the ensemble as per-level affine corrections over the given
// discretized base scores. The expansion is exact whenever each tree uses
// at most one distinct group in its predicates (the single-group tree
// family); with two distinct groups in a multiplicative position only the
// affine part is captured.
LevelSetPatch decompose_to_patches(const EnsemblePredictor& e, const std::vector<double>& base,
                                   std::size_t num_groups);

// Converse construction: realizes a patch as an ensemble of threshold-rooted
// trees via the telescoping sum over levels.
EnsemblePredictor ensemble_from_patches(const LevelSetPatch& patch, std::size_t num_groups);

}  // namespace multical
