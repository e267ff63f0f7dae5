#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "multical/metrics.hpp"
#include "multical/synthetic.hpp"
#include "support.hpp"

using namespace multical;

namespace {

// the running 4-row example: constant prediction 0.5, labels 1,1,0,0,
// group 1 = the two mispredicted rows
CalibrationDataset four_row_example() {
    return make_dataset({0.5, 0.5, 0.5, 0.5},
                        {{1, 1, 0, 0}},
                        {1.0, 1.0, 0.0, 0.0});
}

}  // namespace

TEST_CASE("squared loss on the documented examples") {
    CHECK(squared_loss({0.3, 0.7}, {0.3, 0.7}) == 0.0);
    CHECK(squared_loss({0.5, 0.5}, {0.0, 1.0}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(squared_loss({0.2, 0.8, 0.4}, {0.0, 1.0, 1.0}) ==
          doctest::Approx(0.44 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(squared_loss({0.1}, {0.1, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(squared_loss({}, {}), std::invalid_argument);
}

TEST_CASE("multicalibration error enumerates (value, group) cells") {
    // perfectly calibrated: prediction equals the cell mean everywhere
    {
        const CalibrationDataset ds =
            make_dataset({0.5, 0.5, 0.5, 0.5}, {{1, 1, 1, 1}}, {0.2, 0.8, 0.3, 0.7});
        CHECK(multicalibration_error({0.5, 0.5, 0.5, 0.5}, ds).max_error == 0.0);
    }
    // the 4-row example: group-1 term = 0.5 * |0.5 - 1| = 0.25
    {
        const CalibrationDataset ds = four_row_example();
        const MulticalibrationResult res =
            multicalibration_error({0.5, 0.5, 0.5, 0.5}, ds);
        CHECK(res.max_error == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(res.worst_group == 0);
        REQUIRE(res.per_group.size() == 1);
        CHECK(res.per_group[0] == doctest::Approx(0.25));
    }
}

TEST_CASE("multicalibration error of the XOR population optimum is gamma/4") {
    const double gamma = 0.2;
    const CalibrationDataset ds = gen_xor_exhaustive(gamma, 0.5);
    // the depth-two optimum: dyadic linear part plus gamma/2
    std::vector<double> pred(ds.n);
    for (std::size_t r = 0; r < ds.n; ++r) {
        const double linear = 0.5 * ds.group_member(0, r) + 0.25 * ds.group_member(1, r) +
                              0.125 * ds.group_member(2, r);
        pred[r] = (1.0 - gamma) * linear + gamma / 2.0;
    }
    const MulticalibrationResult res = multicalibration_error(pred, ds);
    for (double e : res.per_group) CHECK(e == doctest::Approx(gamma / 4.0).epsilon(1e-12));
    CHECK(res.max_error == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("multiaccuracy error") {
    const CalibrationDataset ds = four_row_example();
    CHECK(multiaccuracy_error({1.0, 1.0, 0.0, 0.0}, ds) == 0.0);  // pred = labels
    CHECK(multiaccuracy_error({0.5, 0.5, 0.5, 0.5}, ds) == doctest::Approx(0.25));
    // equals mc_error for constant predictors
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CalibrationDataset rnd = testsupport::random_instance(seed, 40, 3, 4);
        const std::vector<double> constant(rnd.n, 0.4);
        CHECK(multiaccuracy_error(constant, rnd) ==
              doctest::Approx(multicalibration_error(constant, rnd).max_error).epsilon(1e-12));
    }
}

TEST_CASE("worst-group binned ECE") {
    // pred = labels in {0,1}: zero everywhere
    {
        const CalibrationDataset ds =
            make_dataset({0.5, 0.5, 0.5}, {{1, 1, 1}}, {0.0, 1.0, 1.0});
        CHECK(worst_group_binned_ece({0.0, 1.0, 1.0}, ds, 10) == 0.0);
    }
    // one group, one bin: |mean(pred) - mean(y)|
    {
        const CalibrationDataset ds =
            make_dataset({0.5, 0.5, 0.5}, {{1, 1, 1}}, {0.1, 0.9, 0.5});
        const std::vector<double> pred{0.3, 0.6, 0.9};
        CHECK(worst_group_binned_ece(pred, ds, 1) ==
              doctest::Approx(std::abs(0.6 - 0.5)).epsilon(1e-12));
    }
    // the 4-row example at 10 bins: group-1 rows sit in one bin, gap 0.5
    CHECK(worst_group_binned_ece({0.5, 0.5, 0.5, 0.5}, four_row_example(), 10) ==
          doctest::Approx(0.5));
    CHECK_THROWS_AS(worst_group_binned_ece({0.5}, four_row_example(), 10),
                    std::invalid_argument);
}

TEST_CASE("mc error is at most 1 and the finite-range guard trips") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const CalibrationDataset ds = testsupport::random_instance(seed, 50, 4, 5);
        std::vector<double> pred(ds.n);
        for (std::size_t r = 0; r < ds.n; ++r) pred[r] = ds.base_scores[r];
        CHECK(multicalibration_error(pred, ds).max_error <= 1.0);
    }
    const std::size_t n = 10001;
    std::vector<double> pred(n);
    std::vector<double> labels(n, 0.5);
    std::vector<std::vector<std::uint8_t>> groups(1, std::vector<std::uint8_t>(n, 1));
    for (std::size_t r = 0; r < n; ++r) pred[r] = static_cast<double>(r) / static_cast<double>(n);
    const CalibrationDataset ds = make_dataset(std::vector<double>(n, 0.5), groups, labels);
    CHECK_THROWS_AS(multicalibration_error(pred, ds), std::invalid_argument);
}

TEST_CASE("evaluate_predictions assembles a consistent report") {
    const CalibrationDataset ds = testsupport::random_instance(12, 200, 3, 6);
    std::vector<double> pred(ds.n);
    for (std::size_t r = 0; r < ds.n; ++r) pred[r] = ds.base_scores[r];
    const Discretizer d = make_grid(20);
    const EvaluationReport rep = evaluate_predictions(pred, ds, d, 10);
    CHECK(rep.m == 20);
    CHECK(rep.nonempty_range <= 20);
    CHECK(rep.mc_error == *std::max_element(rep.per_group_mc.begin(), rep.per_group_mc.end()));
    CHECK(rep.squared_loss == doctest::Approx(squared_loss(pred, ds.labels)));
    const std::vector<double> disc = multical::apply(d, pred);
    CHECK(rep.epsilon_round ==
          doctest::Approx(squared_loss(disc, ds.labels) - rep.squared_loss).epsilon(1e-12));
}
