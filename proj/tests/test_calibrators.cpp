#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "multical/calibrators.hpp"
#include "multical/metrics.hpp"
#include "multical/serialize.hpp"
#include "multical/synthetic.hpp"
#include "support.hpp"

using namespace multical;

TEST_CASE("mcboost leaves a calibrated dataset untouched") {
    // labels equal the discretized base exactly: every cell deviation is 0
    const Discretizer d = make_grid(5);
    std::vector<double> f0;
    std::vector<double> y;
    std::vector<std::uint8_t> g;
    for (std::size_t r = 0; r < 40; ++r) {
        f0.push_back(static_cast<double>(r) / 40.0);
        y.push_back(d(f0.back()));
        g.push_back(r % 2);
    }
    const CalibrationDataset ds = make_dataset(f0, {g}, y);
    const CalibratedModel model = calibrate_mcboost(ds, d, McBoostConfig{});
    CHECK(std::get<PatchTable>(model.payload).records.empty());
}

TEST_CASE("mcboost fixes a single miscalibrated cell in one patch") {
    // one level (0.5 at m=5), one group covering everything, labels 0.7
    const std::size_t n = 30;
    const CalibrationDataset ds = make_dataset(
        std::vector<double>(n, 0.45), {std::vector<std::uint8_t>(n, 1)},
        std::vector<double>(n, 0.7));
    const Discretizer d = make_grid(5);
    const CalibratedModel model = calibrate_mcboost(ds, d, McBoostConfig{});
    const PatchTable& table = std::get<PatchTable>(model.payload);
    REQUIRE(table.records.size() == 1);
    CHECK(table.records[0].group == 0);
    CHECK(table.records[0].level == doctest::Approx(0.5));
    CHECK(table.records[0].new_value == doctest::Approx(0.7));
    const std::vector<double> pred = predict_dataset(model, ds);
    for (double p : pred) CHECK(p == doctest::Approx(0.7));
    CHECK(multicalibration_error(pred, ds).max_error == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("mcboost patches strictly decrease the training loss") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const CalibrationDataset ds = testsupport::random_instance(seed, 160, 3, 4);
        McBoostConfig cfg;
        cfg.seed = seed;
        const CalibratedModel model = calibrate_mcboost(ds, make_grid(10), cfg);
        const Discretizer& d = *model.discretizer;

        // replay on the internal training split
        auto [train, hold] = split_holdout(ds, SplitSpec{cfg.seed, cfg.holdout_fraction});
        std::vector<double> p = multical::apply(d, train.base_scores);
        double prev = squared_loss(p, train.labels);
        for (const PatchRecord& rec : std::get<PatchTable>(model.payload).records) {
            for (std::size_t r = 0; r < train.n; ++r)
                if (p[r] == rec.level && train.group_member(rec.group, r))
                    p[r] = d(rec.new_value);
            const double cur = squared_loss(p, train.labels);
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("mcboost requires a grid discretizer and rejects bad fractions") {
    const CalibrationDataset ds = testsupport::random_instance(1, 40, 2, 3);
    const Discretizer q = make_quantile(4, ds.base_scores);
    CHECK_THROWS_AS(calibrate_mcboost(ds, q, McBoostConfig{}), std::invalid_argument);
    McBoostConfig bad;
    bad.holdout_fraction = 0.0;
    CHECK_THROWS_AS(calibrate_mcboost(ds, make_grid(5), bad), std::invalid_argument);
}

TEST_CASE("lsboost at a fixed point retains zero rounds") {
    const Discretizer d = make_grid(5);
    std::vector<double> f0, y;
    std::vector<std::uint8_t> g;
    for (std::size_t r = 0; r < 60; ++r) {
        f0.push_back(static_cast<double>(r) / 60.0);
        y.push_back(d(f0.back()));  // y equals the level value everywhere
        g.push_back(r % 2);
    }
    const CalibrationDataset ds = make_dataset(f0, {g}, y);
    const CalibratedModel model = calibrate_lsboost(ds, d, LsBoostConfig{});
    CHECK(std::get<LsBoostModel>(model.payload).rounds.empty());
}

TEST_CASE("lsboost depth-1 recovers conditional means in one round") {
    // single level set, y = g1, lr = 1: the weak learner output is the
    // group mean, so levels jump to d(0) and d(1)
    const std::size_t n = 80;
    std::vector<double> f0(n, 0.45), y(n);
    std::vector<std::uint8_t> g(n);
    for (std::size_t r = 0; r < n; ++r) {
        g[r] = r % 2;
        y[r] = g[r];
    }
    const CalibrationDataset ds = make_dataset(f0, {g}, y);
    const Discretizer d = make_grid(5);
    LsBoostConfig cfg;
    cfg.depth = 1;
    cfg.learning_rate = 1.0;
    cfg.seed = 4;
    const CalibratedModel model = calibrate_lsboost(ds, d, cfg);
    const std::vector<double> pred = predict_dataset(model, ds);
    for (std::size_t r = 0; r < n; ++r)
        CHECK(pred[r] == doctest::Approx(g[r] ? 0.9 : 0.1));
}

TEST_CASE("lsboost outputs stay in the grid codomain") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const CalibrationDataset ds = testsupport::random_instance(seed, 200, 4, 8);
        const Discretizer d = make_grid(7);
        LsBoostConfig cfg;
        cfg.seed = seed;
        cfg.subsample = 0.7;
        const CalibratedModel model = calibrate_lsboost(ds, d, cfg);
        const std::set<double> codomain(d.outputs.begin(), d.outputs.end());
        for (double p : predict_dataset(model, ds)) CHECK(codomain.count(p) == 1);
    }
}

TEST_CASE("multiaccurate lambda=0 solves the two-cell least squares") {
    const CalibrationDataset ds =
        make_dataset({0.5, 0.5, 0.5, 0.5}, {{1, 1, 0, 0}}, {1.0, 1.0, 0.0, 0.0});
    const CalibratedModel model = calibrate_multiaccurate(ds, 0.0);
    const LinearModel& lm = std::get<LinearModel>(model.payload);
    CHECK(lm.intercept == doctest::Approx(-0.5).epsilon(1e-8));
    CHECK(lm.weights[0] == doctest::Approx(1.0).epsilon(1e-8));
    // predictions: clamp(f0 + b + w*g)
    const std::vector<double> pred = predict_dataset(model, ds);
    CHECK(pred[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(pred[2] == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("multiaccurate shrinks with lambda and dies at lambda -> inf") {
    const CalibrationDataset ds =
        make_dataset({0.5, 0.5, 0.5, 0.5}, {{1, 1, 0, 0}}, {1.0, 1.0, 0.0, 0.0});
    const CalibratedModel small = calibrate_multiaccurate(ds, 1e-2);
    const LinearModel& lm_small = std::get<LinearModel>(small.payload);
    CHECK(std::abs(lm_small.weights[0]) < 1.0);
    CHECK(std::abs(lm_small.weights[0]) > 0.5);

    const CalibratedModel dead = calibrate_multiaccurate(ds, 1e6);
    const LinearModel& lm_dead = std::get<LinearModel>(dead.payload);
    CHECK(lm_dead.weights[0] == 0.0);
    // with w = 0 the intercept is the mean residual
    CHECK(lm_dead.intercept == doctest::Approx(0.0).epsilon(1e-9));

    CHECK_THROWS_AS(calibrate_multiaccurate(ds, -1.0), std::invalid_argument);
}

TEST_CASE("multiaccurate lambda=0 is multiaccurate on its training data") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        // keep the corrected predictions inside [0,1] so the clamp is inert
        CounterRng rng(seed, 41);
        const std::size_t n = 120;
        std::vector<double> f0(n), y(n);
        std::vector<std::vector<std::uint8_t>> groups(3, std::vector<std::uint8_t>(n));
        for (std::size_t r = 0; r < n; ++r) {
            f0[r] = 0.4 + 0.2 * rng.uniform(r);
            y[r] = 0.3 + 0.4 * rng.uniform(n + r);
            for (std::size_t i = 0; i < 3; ++i)
                groups[i][r] = rng.bernoulli(10 * n + r * 3 + i);
        }
        const CalibrationDataset ds = make_dataset(f0, groups, y);
        const CalibratedModel model = calibrate_multiaccurate(ds, 0.0);
        CHECK(multiaccuracy_error(predict_dataset(model, ds), ds) <= 1e-8);
    }
}

TEST_CASE("predict dispatches on the model kind") {
    const std::uint8_t g1[1] = {1};
    const std::uint8_t g0[1] = {0};

    CalibratedModel ours;
    ours.kind = CalibratorKind::ours;
    ours.payload = EnsemblePredictor{};
    CHECK(predict(ours, 0.42, g1, 1) == 0.42);

    CalibratedModel ma;
    ma.kind = CalibratorKind::multiaccurate;
    ma.payload = LinearModel{0.1, {0.2}, 0.0};
    CHECK(predict(ma, 0.5, g1, 1) == doctest::Approx(0.8));
    CHECK(predict(ma, 0.5, g0, 1) == doctest::Approx(0.6));
    CHECK_THROWS_AS(predict(ma, 0.5, g1, 2), std::invalid_argument);

    CalibratedModel mc;
    mc.kind = CalibratorKind::mcboost;
    mc.discretizer = make_grid(5);
    mc.payload = PatchTable{{PatchRecord{0, 0.5, 0.9}}};
    CHECK(predict(mc, 0.45, g1, 1) == doctest::Approx(0.9));
    CHECK(predict(mc, 0.45, g0, 1) == doctest::Approx(0.5));

    CalibratedModel ls;
    ls.kind = CalibratorKind::lsboost;
    ls.discretizer = make_grid(5);
    LsBoostModel payload;
    payload.learning_rate = 1.0;
    DepthTwoTree t;
    t.root = t.left = t.right = SplitPredicate::on_group(0);
    t.leaves[0] = 0.9;
    t.leaves[3] = 0.1;
    payload.rounds.push_back(LsRound{{{0.5, t}}});
    ls.payload = payload;
    CHECK(predict(ls, 0.45, g1, 1) == doctest::Approx(0.9));
    CHECK(predict(ls, 0.45, g0, 1) == doctest::Approx(0.1));
}

TEST_CASE("ensemble predictions check the group arity") {
    CalibratedModel model;
    model.kind = CalibratorKind::ours;
    EnsemblePredictor e;
    DepthTwoTree t;
    t.root = SplitPredicate::on_group(5);
    t.left = t.right = SplitPredicate::at_threshold(0.0);
    e.trees.push_back(t);
    model.payload = e;
    const std::uint8_t g[2] = {1, 0};
    CHECK_THROWS_AS(predict(model, 0.5, g, 2), std::invalid_argument);
    const CalibrationDataset ds = testsupport::random_instance(1, 10, 2, 2);
    CHECK_THROWS_AS(predict_dataset(model, ds), std::invalid_argument);
}

TEST_CASE("all four calibrators are deterministic") {
    const CalibrationDataset ds = testsupport::random_instance(77, 240, 3, 6);
    BoostConfig bc;
    bc.seed = 5;
    bc.feature_subsample = 0.8;
    CHECK(model_to_json(calibrate_ours(ds, bc)) == model_to_json(calibrate_ours(ds, bc)));
    McBoostConfig mc;
    mc.seed = 5;
    CHECK(model_to_json(calibrate_mcboost(ds, make_grid(8), mc)) ==
          model_to_json(calibrate_mcboost(ds, make_grid(8), mc)));
    LsBoostConfig lc;
    lc.seed = 5;
    lc.subsample = 0.6;
    CHECK(model_to_json(calibrate_lsboost(ds, make_grid(8), lc)) ==
          model_to_json(calibrate_lsboost(ds, make_grid(8), lc)));
    CHECK(model_to_json(calibrate_multiaccurate(ds, 1e-4)) ==
          model_to_json(calibrate_multiaccurate(ds, 1e-4)));
}

TEST_CASE("mcboost reduces the multicalibration error on the XOR construction") {
    auto xor_cal = gen_xor(XorSpec{0.2, 8000, 5, 0.5});
    auto xor_test = gen_xor(XorSpec{0.2, 8000, 6, 0.5});
    const Discretizer d = make_grid(10);
    McBoostConfig cfg;
    cfg.seed = 1;
    const CalibratedModel model = calibrate_mcboost(xor_cal.data, d, cfg);
    const double uncal =
        multicalibration_error(multical::apply(d, xor_test.data.base_scores), xor_test.data)
            .max_error;
    const double calibrated =
        multicalibration_error(predict_dataset(model, xor_test.data), xor_test.data).max_error;
    CHECK(calibrated < uncal);
}
