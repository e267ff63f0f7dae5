#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "multical/discretize.hpp"
#include "multical/rng.hpp"
#include "support.hpp"

using namespace multical;

namespace {

// independent oracle: nearest point of the grid {1/(2m), ..., (2m-1)/(2m)},
// ties resolved upward (tie detection tolerates rounding in the grid points)
double nearest_grid_point(std::size_t m, double v) {
    double best = 0.0;
    double best_dist = 1e300;
    for (std::size_t k = 0; k < m; ++k) {  // ascending, so ties keep the upper point
        const double p = static_cast<double>(2 * k + 1) / static_cast<double>(2 * m);
        const double dist = std::abs(v - p);
        if (dist <= best_dist + 1e-12) {
            best_dist = std::min(dist, best_dist);
            best = p;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("grid maps to the nearest codomain point, ties upward") {
    const Discretizer d10 = make_grid(10);
    CHECK(d10(0.52) == doctest::Approx(0.55).epsilon(1e-15));
    CHECK(nearest_grid_point(10, 0.52) == doctest::Approx(0.55));
    CHECK(d10(0.50) == doctest::Approx(0.55).epsilon(1e-15));  // boundary tie goes up
    CHECK(nearest_grid_point(10, 0.50) == doctest::Approx(0.55));

    const Discretizer d1 = make_grid(1);
    CHECK(d1(0.0) == 0.5);
    CHECK(d1(0.37) == 0.5);
    CHECK(d1(1.0) == 0.5);

    CHECK_THROWS_AS(make_grid(0), std::invalid_argument);

    CounterRng rng(5, 0);
    for (std::size_t m : {2, 7, 10, 100})
        for (std::size_t i = 0; i < 500; ++i) {
            const double v = rng.uniform(i);
            CHECK(make_grid(m)(v) == doctest::Approx(nearest_grid_point(m, v)).epsilon(1e-15));
        }
}

TEST_CASE("quantile discretizer splits cells at empirical quantiles") {
    const std::vector<double> scores{0.1, 0.2, 0.8, 0.9};
    const Discretizer d = make_quantile(2, scores);
    CHECK(d(0.1) == doctest::Approx(0.15));
    CHECK(d(0.2) == doctest::Approx(0.15));
    CHECK(d(0.8) == doctest::Approx(0.85));
    CHECK(d(0.9) == doctest::Approx(0.85));

    // m >= #distinct: identity on observed values
    const Discretizer id = make_quantile(10, scores);
    for (double v : scores) CHECK(id(v) == v);

    // m = 1: constant at the mean
    const Discretizer c = make_quantile(1, scores);
    CHECK(c(0.3) == doctest::Approx(0.5));

    CHECK_THROWS_AS(make_quantile(0, scores), std::invalid_argument);
    CHECK_THROWS_AS(make_quantile(2, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("apply is elementwise and bounded by m distinct outputs") {
    const Discretizer d = make_grid(10);
    const std::vector<double> scores{0.0, 0.52, 0.5, 1.0};
    const std::vector<double> out = multical::apply(d, scores);
    REQUIRE(out.size() == 4);
    CHECK(out[0] == doctest::Approx(0.05));
    CHECK(out[1] == doctest::Approx(0.55));
    CHECK(out[2] == doctest::Approx(0.55));
    CHECK(out[3] == doctest::Approx(0.95));

    CounterRng rng(17, 0);
    std::vector<double> big(500);
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = rng.uniform(i);
    for (std::size_t m : {1, 3, 10}) {
        std::set<double> distinct;
        for (double v : multical::apply(make_grid(m), big)) distinct.insert(v);
        CHECK(distinct.size() <= m);
    }
}

TEST_CASE("discretization error examples") {
    // prediction already on the grid: d is the identity there
    {
        std::vector<double> pred{0.05, 0.55, 0.95};
        std::vector<std::vector<std::uint8_t>> g(1, std::vector<std::uint8_t>(3, 1));
        const CalibrationDataset ds = make_dataset({0.5, 0.5, 0.5}, g, {0.0, 1.0, 0.5});
        CHECK(discretization_error(ds, pred, make_grid(10)) == 0.0);
    }
    // single row: (0.55-0.52)^2 - 0 = 9e-4
    {
        std::vector<std::vector<std::uint8_t>> g(1, std::vector<std::uint8_t>(1, 1));
        const CalibrationDataset ds = make_dataset({0.5}, g, {0.52});
        const double err = discretization_error(ds, {0.52}, make_grid(10));
        CHECK(err == doctest::Approx(9e-4).epsilon(1e-9));
    }
    // pred = {0.5, 0.5}, y = {0, 1}: error is (c - 0.5)^2 where c = d(0.5)
    {
        std::vector<std::vector<std::uint8_t>> g(1, std::vector<std::uint8_t>(2, 1));
        const CalibrationDataset ds = make_dataset({0.5, 0.5}, g, {0.0, 1.0});
        for (std::size_t m : {1, 2, 3, 10}) {
            const Discretizer d = make_grid(m);
            const double c = d(0.5);
            CHECK(discretization_error(ds, {0.5, 0.5}, d) ==
                  doctest::Approx((c - 0.5) * (c - 0.5)).epsilon(1e-12));
        }
    }
    // length mismatch
    {
        std::vector<std::vector<std::uint8_t>> g(1, std::vector<std::uint8_t>(2, 1));
        const CalibrationDataset ds = make_dataset({0.5, 0.5}, g, {0.0, 1.0});
        CHECK_THROWS_AS(discretization_error(ds, {0.5}, make_grid(2)), std::invalid_argument);
    }
}

TEST_CASE("nonempty range size counts attained outputs") {
    const Discretizer d = make_grid(10);
    CHECK(nonempty_range_size(d, std::vector<double>(20, 0.5)) == 1);
    std::vector<double> all;
    for (int k = 0; k < 10; ++k) all.push_back(0.05 + 0.1 * k);
    CHECK(nonempty_range_size(d, all) == 10);

    // computed by enumeration for a 20-value input on a fine grid
    const Discretizer d100 = make_grid(100);
    std::vector<double> vals;
    for (int i = 0; i < 20; ++i) vals.push_back(static_cast<double>(i) / 19.0);
    std::set<double> expect;
    for (double v : vals) expect.insert(d100(v));
    CHECK(nonempty_range_size(d100, vals) == expect.size());
}

TEST_CASE("discretizer laws: monotone, right-continuous, idempotent, bounded error") {
    CounterRng rng(23, 0);
    for (std::size_t m : {1, 2, 10, 100}) {
        const Discretizer d = make_grid(m);
        // monotonicity over a dense scan
        double prev = d(0.0);
        for (int i = 1; i <= 4000; ++i) {
            const double v = static_cast<double>(i) / 4000.0;
            const double cur = d(v);
            CHECK(cur >= prev);
            prev = cur;
        }
        // right continuity at every interior boundary
        for (double b : d.boundaries)
            for (double delta : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9})
                CHECK(d(b + delta) == d(b));
        // idempotence
        for (int i = 0; i <= 1000; ++i) {
            const double v = static_cast<double>(i) / 1000.0;
            CHECK(d(d(v)) == d(v));
        }
        // |eps_round| <= (1/(2m)) * (2 + 1/(2m)) on random datasets
        const double bound =
            (1.0 / (2.0 * static_cast<double>(m))) * (2.0 + 1.0 / (2.0 * static_cast<double>(m)));
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const CalibrationDataset ds = testsupport::random_instance(seed, 64, 2, 8);
            std::vector<double> pred(ds.n);
            for (std::size_t r = 0; r < ds.n; ++r) pred[r] = rng.uniform(seed * 1000 + r);
            CHECK(std::abs(discretization_error(ds, pred, d)) <= bound);
        }
    }
    // quantile discretizers obey monotonicity and right continuity too
    std::vector<double> scores(101);
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = rng.uniform(50000 + i);
    for (std::size_t m : {2, 5, 17}) {
        const Discretizer d = make_quantile(m, scores);
        double prev = d(0.0);
        for (int i = 1; i <= 2000; ++i) {
            const double v = static_cast<double>(i) / 2000.0;
            const double cur = d(v);
            CHECK(cur >= prev);
            prev = cur;
        }
        for (double b : d.boundaries)
            for (double delta : {1e-3, 1e-6, 1e-9})
                CHECK(d(b + delta) == d(b));
    }
}
