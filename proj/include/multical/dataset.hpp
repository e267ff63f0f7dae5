#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace multical {

// Raised for malformed or out-of-contract input data (CSV parse errors,
// range violations). The CLI maps it to its data-error exit code.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The sufficient statistic every calibrator sees: base score f0(x) in [0,1],
// binary group memberships g(x), and label y in [0,1]. Immutable after load;
// safe to share across threads. Row order is significant (row indices are
// referenced by reports).
struct CalibrationDataset {
    std::size_t n = 0;
    std::size_t num_groups = 0;
    std::vector<double> base_scores;        // n
    std::vector<std::uint8_t> groups;       // num_groups x n, group-major
    std::vector<double> labels;             // n
    std::vector<std::string> group_names;   // num_groups
    std::vector<std::uint8_t> group_empty;  // per group: no member rows at load time

    bool group_member(std::size_t group, std::size_t row) const {
        return groups[group * n + row] != 0;
    }
    const std::uint8_t* group_column(std::size_t group) const { return groups.data() + group * n; }

    // Validates all invariants; throws DataError on violation.
    void validate() const;
};

// Builds a dataset from parallel columns; groups given group-major
// (groups[i] is the i-th group's indicator over all rows).
CalibrationDataset make_dataset(std::vector<double> base_scores,
                                std::vector<std::vector<std::uint8_t>> groups,
                                std::vector<double> labels,
                                std::vector<std::string> group_names = {});

struct SplitSpec {
    std::uint64_t seed = 0;
    double holdout_fraction = 0.3;  // in (0, 1)
};

// Columns: `y` and `f0` required, every column named `g_*` is a group,
// anything else is ignored (a warning naming the column is appended to
// `warnings` when given). Decimal text only, NaN/Inf rejected.
CalibrationDataset load_csv(const std::string& path, std::vector<std::string>* warnings = nullptr);

void write_csv(const std::string& path, const CalibrationDataset& ds);

// Deterministic row partition into (train, holdout) with sizes
// ceil((1-f)*n) and floor(f*n). Identical (seed, fraction, n) always
// produce the identical partition.
std::pair<CalibrationDataset, CalibrationDataset> split_holdout(const CalibrationDataset& ds,
                                                                const SplitSpec& spec);

// Row subset in the given order.
CalibrationDataset take_rows(const CalibrationDataset& ds, const std::vector<std::size_t>& rows);

}  // namespace multical
