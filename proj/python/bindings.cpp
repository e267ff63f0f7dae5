#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "multical/audit.hpp"
#include "multical/boosting.hpp"
#include "multical/calibrators.hpp"
#include "multical/dataset.hpp"
#include "multical/discretize.hpp"
#include "multical/metrics.hpp"
#include "multical/oracle.hpp"
#include "multical/serialize.hpp"
#include "multical/synthetic.hpp"

namespace py = pybind11;
using namespace multical;

namespace {

std::vector<std::vector<std::uint8_t>> group_rows(const CalibrationDataset& ds) {
    std::vector<std::vector<std::uint8_t>> out(ds.num_groups,
                                               std::vector<std::uint8_t>(ds.n));
    for (std::size_t i = 0; i < ds.num_groups; ++i)
        for (std::size_t r = 0; r < ds.n; ++r) out[i][r] = ds.group_member(i, r);
    return out;
}

}  // namespace

PYBIND11_MODULE(multical, m) {
    m.doc() = "multicalibration post-processing toolkit";

    py::register_exception<DataError>(m, "DataError");

    py::class_<CalibrationDataset>(m, "CalibrationDataset")
        .def(py::init([](std::vector<double> base_scores,
                         std::vector<std::vector<std::uint8_t>> groups,
                         std::vector<double> labels, std::vector<std::string> group_names) {
                 return make_dataset(std::move(base_scores), std::move(groups),
                                     std::move(labels), std::move(group_names));
             }),
             py::arg("base_scores"), py::arg("groups"), py::arg("labels"),
             py::arg("group_names") = std::vector<std::string>{})
        .def_readonly("n", &CalibrationDataset::n)
        .def_readonly("num_groups", &CalibrationDataset::num_groups)
        .def_readonly("base_scores", &CalibrationDataset::base_scores)
        .def_readonly("labels", &CalibrationDataset::labels)
        .def_readonly("group_names", &CalibrationDataset::group_names)
        .def("group_member", &CalibrationDataset::group_member)
        .def("groups", &group_rows, "group indicator rows, one list per group")
        .def("__len__", [](const CalibrationDataset& ds) { return ds.n; });

    m.def("load_csv", [](const std::string& path) { return load_csv(path); }, py::arg("path"));
    m.def("write_csv", &write_csv, py::arg("path"), py::arg("dataset"));
    m.def(
        "split_holdout",
        [](const CalibrationDataset& ds, std::uint64_t seed, double fraction) {
            return split_holdout(ds, SplitSpec{seed, fraction});
        },
        py::arg("dataset"), py::arg("seed"), py::arg("holdout_fraction"));

    py::class_<Discretizer>(m, "Discretizer")
        .def_property_readonly("kind", &Discretizer::kind_name)
        .def_readonly("m", &Discretizer::m)
        .def_readonly("boundaries", &Discretizer::boundaries)
        .def_readonly("outputs", &Discretizer::outputs)
        .def("__call__", [](const Discretizer& d, double v) { return d(v); });
    m.def("make_grid", &make_grid, py::arg("m"));
    m.def("make_quantile", &make_quantile, py::arg("m"), py::arg("scores"));
    m.def("apply", &multical::apply, py::arg("discretizer"), py::arg("scores"));
    m.def("discretization_error", &discretization_error, py::arg("dataset"), py::arg("pred"),
          py::arg("discretizer"));
    m.def("nonempty_range_size", &nonempty_range_size, py::arg("discretizer"),
          py::arg("scores"));

    py::class_<BoostConfig>(m, "BoostConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &BoostConfig::learning_rate)
        .def_readwrite("max_trees", &BoostConfig::max_trees)
        .def_readwrite("patience", &BoostConfig::patience)
        .def_readwrite("holdout_fraction", &BoostConfig::holdout_fraction)
        .def_readwrite("feature_subsample", &BoostConfig::feature_subsample)
        .def_readwrite("min_leaf_count", &BoostConfig::min_leaf_count)
        .def_readwrite("seed", &BoostConfig::seed)
        .def_readwrite("threshold_bins", &BoostConfig::threshold_bins);

    py::class_<SquareLevConfig>(m, "SquareLevConfig")
        .def(py::init<>())
        .def_readwrite("rho", &SquareLevConfig::rho)
        .def_readwrite("t_max", &SquareLevConfig::t_max)
        .def_readwrite("epsilon_floor", &SquareLevConfig::epsilon_floor)
        .def_readwrite("seed", &SquareLevConfig::seed);

    py::class_<McBoostConfig>(m, "McBoostConfig")
        .def(py::init<>())
        .def_readwrite("holdout_fraction", &McBoostConfig::holdout_fraction)
        .def_readwrite("max_rounds", &McBoostConfig::max_rounds)
        .def_readwrite("seed", &McBoostConfig::seed);

    py::class_<LsBoostConfig>(m, "LsBoostConfig")
        .def(py::init<>())
        .def_readwrite("depth", &LsBoostConfig::depth)
        .def_readwrite("learning_rate", &LsBoostConfig::learning_rate)
        .def_readwrite("subsample", &LsBoostConfig::subsample)
        .def_readwrite("max_rounds", &LsBoostConfig::max_rounds)
        .def_readwrite("holdout_fraction", &LsBoostConfig::holdout_fraction)
        .def_readwrite("min_leaf_count", &LsBoostConfig::min_leaf_count)
        .def_readwrite("seed", &LsBoostConfig::seed);

    py::class_<FitTraceRecord>(m, "FitTraceRecord")
        .def_readonly("iteration", &FitTraceRecord::iteration)
        .def_readonly("train_loss", &FitTraceRecord::train_loss)
        .def_readonly("holdout_loss", &FitTraceRecord::holdout_loss)
        .def_readonly("split", &FitTraceRecord::split)
        .def_readonly("edge", &FitTraceRecord::edge)
        .def_readonly("alpha", &FitTraceRecord::alpha)
        .def_readonly("variance_before", &FitTraceRecord::variance_before)
        .def_readonly("variance_after", &FitTraceRecord::variance_after);

    py::class_<FitTrace>(m, "FitTrace")
        .def_readonly("records", &FitTrace::records)
        .def_readonly("stop_reason", &FitTrace::stop_reason)
        .def_readonly("best_iteration", &FitTrace::best_iteration);

    py::class_<CalibratedModel>(m, "CalibratedModel")
        .def_property_readonly("kind",
                               [](const CalibratedModel& mdl) { return kind_name(mdl.kind); })
        .def_property_readonly("discretizer",
                               [](const CalibratedModel& mdl) { return mdl.discretizer; })
        .def(
            "predict",
            [](const CalibratedModel& mdl, double f0, const std::vector<std::uint8_t>& g) {
                return predict(mdl, f0, g.data(), g.size());
            },
            py::arg("f0"), py::arg("groups"))
        .def("predict_dataset", &predict_dataset, py::arg("dataset"))
        .def("to_json", [](const CalibratedModel& mdl) { return model_to_json(mdl); });

    m.def(
        "calibrate_ours",
        [](const CalibrationDataset& ds, const BoostConfig& cfg) {
            FitTrace trace;
            CalibratedModel model = calibrate_ours(ds, cfg, &trace);
            return py::make_tuple(std::move(model), std::move(trace));
        },
        py::arg("dataset"), py::arg("config") = BoostConfig{}, "returns (model, fit trace)");
    m.def(
        "calibrate_ours_squarelev",
        [](const CalibrationDataset& ds, const SquareLevConfig& cfg) {
            FitTrace trace;
            CalibratedModel model = calibrate_ours(ds, cfg, &trace);
            return py::make_tuple(std::move(model), std::move(trace));
        },
        py::arg("dataset"), py::arg("config") = SquareLevConfig{});
    m.def("calibrate_mcboost", &calibrate_mcboost, py::arg("dataset"), py::arg("discretizer"),
          py::arg("config") = McBoostConfig{});
    m.def("calibrate_lsboost", &calibrate_lsboost, py::arg("dataset"), py::arg("discretizer"),
          py::arg("config") = LsBoostConfig{});
    m.def("calibrate_multiaccurate", &calibrate_multiaccurate, py::arg("dataset"),
          py::arg("lambda_"));

    m.def("save_model", &save_model, py::arg("path"), py::arg("model"),
          py::arg("config_json") = "");
    m.def("load_model", &load_model, py::arg("path"));

    m.def("squared_loss", &squared_loss, py::arg("pred"), py::arg("labels"));
    m.def(
        "multicalibration_error",
        [](const std::vector<double>& pred, const CalibrationDataset& ds) {
            const MulticalibrationResult res = multicalibration_error(pred, ds);
            return py::make_tuple(res.max_error, res.worst_group, res.per_group);
        },
        py::arg("pred_discrete"), py::arg("dataset"),
        "returns (max_error, worst_group_index, per_group_errors)");
    m.def("multiaccuracy_error", &multiaccuracy_error, py::arg("pred"), py::arg("dataset"));
    m.def("worst_group_binned_ece", &worst_group_binned_ece, py::arg("pred"),
          py::arg("dataset"), py::arg("bins") = 10);

    py::class_<EvaluationReport>(m, "EvaluationReport")
        .def_readonly("squared_loss", &EvaluationReport::squared_loss)
        .def_readonly("mc_error", &EvaluationReport::mc_error)
        .def_readonly("worst_group_index", &EvaluationReport::worst_group_index)
        .def_readonly("per_group_mc", &EvaluationReport::per_group_mc)
        .def_readonly("multiaccuracy_error", &EvaluationReport::multiaccuracy_error)
        .def_readonly("worst_group_binned_ece", &EvaluationReport::worst_group_binned_ece)
        .def_readonly("ece_bins", &EvaluationReport::ece_bins)
        .def_readonly("m", &EvaluationReport::m)
        .def_readonly("nonempty_range", &EvaluationReport::nonempty_range)
        .def_readonly("epsilon_round", &EvaluationReport::epsilon_round)
        .def(
            "to_json",
            [](const EvaluationReport& rep, const std::string& method) {
                return report_to_json(rep, method);
            },
            py::arg("method") = "");
    m.def("evaluate_predictions", &evaluate_predictions, py::arg("pred"), py::arg("dataset"),
          py::arg("discretizer"), py::arg("ece_bins") = 10);

    py::class_<LevelSetPatch>(m, "LevelSetPatch")
        .def_readonly("levels", &LevelSetPatch::levels)
        .def_readonly("intercepts", &LevelSetPatch::intercepts)
        .def_readonly("coefficients", &LevelSetPatch::coefficients);

    auto oracle_mod = m.def_submodule("oracle", "brute-force ground truth on small instances");
    oracle_mod.def("optimal_patch_loss", &oracle::optimal_patch_loss, py::arg("dataset"),
                   py::arg("base_discrete"));
    oracle_mod.def("lemma3_patch", &oracle::lemma3_patch, py::arg("dataset"),
                   py::arg("pred_discrete"));
    oracle_mod.def("exhaustive_mc_error", &oracle::exhaustive_mc_error,
                   py::arg("pred_discrete"), py::arg("dataset"));

    py::class_<XorSidecar>(m, "XorSidecar")
        .def_readonly("gamma", &XorSidecar::gamma)
        .def_readonly("base_constant", &XorSidecar::base_constant)
        .def_readonly("optimal_loss", &XorSidecar::optimal_loss)
        .def_readonly("per_group_mc_error", &XorSidecar::per_group_mc_error)
        .def_readonly("epsilon_loss", &XorSidecar::epsilon_loss);
    m.def(
        "gen_xor",
        [](double gamma, std::size_t n, std::uint64_t seed, double base_constant) {
            XorResult res = gen_xor(XorSpec{gamma, n, seed, base_constant});
            return py::make_tuple(std::move(res.data), res.sidecar);
        },
        py::arg("gamma"), py::arg("n"), py::arg("seed") = 0, py::arg("base_constant") = 0.5,
        "returns (dataset, analytic sidecar)");
    m.def("gen_xor_exhaustive", &gen_xor_exhaustive, py::arg("gamma"),
          py::arg("base_constant") = 0.5);
    m.def(
        "gen_group_bias",
        [](std::size_t num_groups, std::size_t n, double bias, double noise_sd,
           double level_flip, std::uint64_t seed) {
            GroupBiasSpec spec;
            spec.num_groups = num_groups;
            spec.n = n;
            spec.noise_sd = noise_sd;
            spec.level_flip = level_flip;
            spec.seed = seed;
            broadcast_bias(spec, bias);
            return gen_group_bias(spec);
        },
        py::arg("num_groups"), py::arg("n"), py::arg("bias"), py::arg("noise_sd") = 0.02,
        py::arg("level_flip") = 0.5, py::arg("seed") = 0);

    py::class_<SaturationReport>(m, "SaturationReport")
        .def_readonly("loss_f0", &SaturationReport::loss_f0)
        .def_readonly("loss_fcal", &SaturationReport::loss_fcal)
        .def_readonly("loss_second_pass", &SaturationReport::loss_second_pass)
        .def_readonly("epsilon_hat_loss", &SaturationReport::epsilon_hat_loss)
        .def_readonly("threshold", &SaturationReport::threshold)
        .def_readonly("passes", &SaturationReport::passes);
    py::class_<BoundCheck>(m, "BoundCheck")
        .def_readonly("mc_error", &BoundCheck::mc_error)
        .def_readonly("epsilon_hat_loss", &BoundCheck::epsilon_hat_loss)
        .def_readonly("epsilon_round", &BoundCheck::epsilon_round)
        .def_readonly("bound", &BoundCheck::bound)
        .def_readonly("slack", &BoundCheck::slack)
        .def_readonly("satisfied", &BoundCheck::satisfied);
    m.def(
        "audit_saturation",
        [](const CalibrationDataset& cal, const CalibrationDataset& test,
           const BoostConfig& cfg, double threshold) {
            AuditResult res = audit_saturation(cal, test, cfg, threshold);
            return py::make_tuple(res.saturation, std::move(res.first_pass),
                                  std::move(res.test_predictions));
        },
        py::arg("ds_cal"), py::arg("ds_test"), py::arg("config") = BoostConfig{},
        py::arg("pass_threshold") = 1e-3,
        "returns (SaturationReport, first-pass model, test predictions)");
    m.def("check_theorem1", &check_theorem1, py::arg("ds_test"), py::arg("model"),
          py::arg("discretizer"), py::arg("saturation"));

    py::class_<SampleComplexity>(m, "SampleComplexity")
        .def_readonly("num_trees", &SampleComplexity::num_trees)
        .def_readonly("num_samples", &SampleComplexity::num_samples)
        .def_readonly("note", &SampleComplexity::note);
    m.def("sample_complexity", &sample_complexity, py::arg("alpha"), py::arg("epsilon_min"),
          py::arg("num_groups"), py::arg("delta"));
}
