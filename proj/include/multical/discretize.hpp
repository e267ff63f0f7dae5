#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "multical/dataset.hpp"

namespace multical {

// A monotone non-decreasing, right-continuous step map d on [0,1] with at
// most m output values. Cell j is {v : boundaries[j-1] <= v < boundaries[j]},
// so a boundary value itself belongs to the upper cell (this is what makes
// d right-continuous).
struct Discretizer {
    enum class Kind { grid, quantile };

    Kind kind = Kind::grid;
    std::size_t m = 1;
    std::vector<double> boundaries;  // strictly increasing interior cut points
    std::vector<double> outputs;     // one per cell, strictly increasing, in [0,1]

    double operator()(double v) const;

    std::string kind_name() const { return kind == Kind::grid ? "grid" : "quantile"; }
};

// Grid scheme: codomain {1/(2m), 3/(2m), ..., (2m-1)/(2m)}, nearest point,
// ties at cell boundaries resolved upward.
Discretizer make_grid(std::size_t m);

// Quantile scheme: boundaries at empirical quantiles of `scores`, each
// cell's output is the mean of the scores falling in it.
Discretizer make_quantile(std::size_t m, const std::vector<double>& scores);

std::vector<double> apply(const Discretizer& d, const std::vector<double>& scores);

// Signed loss change caused by discretizing: l(d(pred), ds) - l(pred, ds).
// May be negative on finite samples.
double discretization_error(const CalibrationDataset& ds, const std::vector<double>& pred,
                            const Discretizer& d);

// Number of distinct outputs actually attained on `scores` (<= m).
std::size_t nonempty_range_size(const Discretizer& d, const std::vector<double>& scores);

}  // namespace multical
