#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "multical/dataset.hpp"
#include "multical/rng.hpp"
#include "support.hpp"

using namespace multical;

namespace {

std::string temp_path(const std::string& name) {
    return std::string("./") + name;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("load_csv parses the documented 3-row file") {
    const std::string path = temp_path("ds_basic.csv");
    write_file(path, "y,f0,g_a\n1,0.5,1\n0,0.5,1\n0,0.2,0\n");
    const CalibrationDataset ds = load_csv(path);
    CHECK(ds.n == 3);
    CHECK(ds.num_groups == 1);
    CHECK(ds.labels == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(ds.base_scores == std::vector<double>{0.5, 0.5, 0.2});
    CHECK(ds.group_member(0, 0));
    CHECK(ds.group_member(0, 1));
    CHECK(!ds.group_member(0, 2));
    CHECK(ds.group_names[0] == "g_a");
    std::remove(path.c_str());
}

TEST_CASE("load_csv rejects out-of-range and non-binary values") {
    const std::string path = temp_path("ds_bad.csv");

    write_file(path, "y,f0,g_a\n0,1.2,1\n");
    CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("base score out of range"), DataError);

    write_file(path, "y,f0,g_a\n0,0.5,2\n");
    CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("group value not binary"), DataError);

    write_file(path, "y,f0,g_a\n1.5,0.5,1\n");
    CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("label out of range"), DataError);

    write_file(path, "y,f0,g_a\nnan,0.5,1\n");
    CHECK_THROWS_AS(load_csv(path), DataError);

    write_file(path, "f0,g_a\n0.5,1\n");
    CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("missing required column 'y'"),
                         DataError);

    write_file(path, "y,g_a\n0.5,1\n");
    CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("missing required column 'f0'"),
                         DataError);

    write_file(path, "");
    CHECK_THROWS_AS(load_csv(path), DataError);

    write_file(path, "y,f0,g_a\n");
    CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains("no data rows"), DataError);
    std::remove(path.c_str());
}

TEST_CASE("load_csv warns on ignored columns and empty groups") {
    const std::string path = temp_path("ds_warn.csv");
    write_file(path, "y,f0,extra,g_a,g_b\n1,0.5,9,1,0\n0,0.5,9,1,0\n");
    std::vector<std::string> warnings;
    const CalibrationDataset ds = load_csv(path, &warnings);
    CHECK(ds.num_groups == 2);
    CHECK(ds.group_empty[1] == 1);
    REQUIRE(warnings.size() == 2);
    CHECK(warnings[0] == "ignoring column 'extra'");
    CHECK(warnings[1] == "group 'g_b' has no member rows");
    std::remove(path.c_str());
}

TEST_CASE("csv round trip is the identity on y, f0 and groups") {
    const std::string path = temp_path("ds_roundtrip.csv");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CalibrationDataset ds = testsupport::random_instance(seed, 37, 3, 5);
        write_csv(path, ds);
        const CalibrationDataset back = load_csv(path);
        REQUIRE(back.n == ds.n);
        for (std::size_t r = 0; r < ds.n; ++r) {
            CHECK(back.labels[r] == doctest::Approx(ds.labels[r]).epsilon(1e-12));
            CHECK(back.base_scores[r] == doctest::Approx(ds.base_scores[r]).epsilon(1e-12));
        }
        CHECK(back.groups == ds.groups);
    }
    std::remove(path.c_str());
}

TEST_CASE("split_holdout sizes and determinism") {
    const CalibrationDataset ds = testsupport::random_instance(3, 10, 2, 3);
    const SplitSpec spec{7, 0.3};
    auto [train, hold] = split_holdout(ds, spec);
    CHECK(train.n == 7);
    CHECK(hold.n == 3);

    auto [train2, hold2] = split_holdout(ds, spec);
    CHECK(train2.base_scores == train.base_scores);
    CHECK(train2.labels == train.labels);
    CHECK(hold2.base_scores == hold.base_scores);

    const CalibrationDataset one = testsupport::random_instance(3, 1, 2, 1);
    CHECK_THROWS_AS(split_holdout(one, spec), std::invalid_argument);
}

TEST_CASE("split_holdout partitions are disjoint and exhaustive") {
    CounterRng rng(99, 0);
    for (std::size_t trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.bits(2 * trial) % 40;
        const std::uint64_t seed = rng.bits(2 * trial + 1);
        // distinct labels identify rows
        std::vector<double> base(n), labels(n);
        std::vector<std::vector<std::uint8_t>> groups(1, std::vector<std::uint8_t>(n, 1));
        for (std::size_t r = 0; r < n; ++r) {
            base[r] = 0.5;
            labels[r] = static_cast<double>(r) / static_cast<double>(n);
        }
        const CalibrationDataset ds = make_dataset(base, groups, labels);
        auto [train, hold] = split_holdout(ds, SplitSpec{seed, 0.3});
        CHECK(train.n + hold.n == n);
        std::set<double> seen;
        for (double v : train.labels) seen.insert(v);
        for (double v : hold.labels) {
            CHECK(seen.count(v) == 0);
            seen.insert(v);
        }
        CHECK(seen.size() == n);
    }
}
