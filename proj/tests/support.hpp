#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "multical/dataset.hpp"
#include "multical/rng.hpp"

namespace testsupport {

// Random discrete-base instance: base scores drawn from a small sorted level
// set, fair-coin-ish group memberships, uniform labels. Every group is
// forced to have at least one member and one non-member row.
inline multical::CalibrationDataset random_instance(std::uint64_t seed, std::size_t n,
                                                    std::size_t num_groups,
                                                    std::size_t num_levels) {
    multical::CounterRng rng(seed, 7);
    std::vector<double> levels(num_levels);
    for (std::size_t j = 0; j < num_levels; ++j)
        levels[j] = rng.uniform(1000 + j);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    std::vector<double> base(n), labels(n);
    std::vector<std::vector<std::uint8_t>> groups(num_groups, std::vector<std::uint8_t>(n));
    for (std::size_t r = 0; r < n; ++r) {
        base[r] = levels[rng.bits(2000 + r) % levels.size()];
        labels[r] = rng.uniform(3000 + r);
        for (std::size_t i = 0; i < num_groups; ++i)
            groups[i][r] = rng.bernoulli(4000 + r * num_groups + i) ? 1 : 0;
    }
    for (std::size_t i = 0; i < num_groups; ++i) {
        groups[i][i % n] = 1;             // at least one member
        groups[i][(i + 1) % n] = 0;       // at least one non-member
    }
    return multical::make_dataset(std::move(base), std::move(groups), std::move(labels));
}

// Instance whose groups are disjoint (each row belongs to at most one), so
// products of two different group indicators vanish on the sample and the
// depth-two tree span equals the per-level affine span exactly.
inline multical::CalibrationDataset disjoint_group_instance(std::uint64_t seed, std::size_t n,
                                                            std::size_t num_groups,
                                                            std::size_t num_levels) {
    multical::CounterRng rng(seed, 11);
    std::vector<double> levels(num_levels);
    for (std::size_t j = 0; j < num_levels; ++j)
        levels[j] = rng.uniform(1000 + j);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    std::vector<double> base(n), labels(n);
    std::vector<std::vector<std::uint8_t>> groups(num_groups, std::vector<std::uint8_t>(n));
    for (std::size_t r = 0; r < n; ++r) {
        base[r] = levels[rng.bits(2000 + r) % levels.size()];
        labels[r] = rng.uniform(3000 + r);
        // slot num_groups means "no group"
        const std::size_t slot = rng.bits(5000 + r) % (num_groups + 1);
        if (slot < num_groups) groups[slot][r] = 1;
    }
    for (std::size_t i = 0; i < num_groups; ++i) {
        bool any = false;
        for (std::size_t r = 0; r < n; ++r) any = any || groups[i][r];
        if (!any) {
            const std::size_t r = (i * 31 + 1) % n;
            for (std::size_t k = 0; k < num_groups; ++k) groups[k][r] = 0;
            groups[i][r] = 1;
        }
    }
    return multical::make_dataset(std::move(base), std::move(groups), std::move(labels));
}

}  // namespace testsupport
