#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "multical/audit.hpp"
#include "multical/boosting.hpp"
#include "multical/calibrators.hpp"
#include "multical/dataset.hpp"
#include "multical/discretize.hpp"
#include "multical/metrics.hpp"
#include "multical/oracle.hpp"
#include "multical/serialize.hpp"
#include "multical/synthetic.hpp"

namespace {

using namespace multical;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t worker_count(std::size_t jobs) {
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("MULTICAL_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<std::size_t>(cap) < n) n = static_cast<std::size_t>(cap);
    }
    return std::min(n, std::max<std::size_t>(1, jobs));
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

CalibrationDataset load_input(const std::string& path) {
    std::vector<std::string> warnings;
    CalibrationDataset ds = load_csv(path, &warnings);
    print_warnings(warnings);
    return ds;
}

// ---------------------------------------------------------------- gen

struct GenXorArgs {
    double gamma = 0.0;
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    double base = 0.5;
    std::string out;
};

int run_gen_xor(const GenXorArgs& a) {
    XorResult res = gen_xor(XorSpec{a.gamma, a.n, a.seed, a.base});
    write_csv(a.out, res.data);
    JsonWriter w;
    w.begin_object();
    w.key("generator").value("xor");
    w.key("gamma").value(res.sidecar.gamma);
    w.key("n").value_uint(a.n);
    w.key("seed").value_uint(a.seed);
    w.key("base_constant").value(res.sidecar.base_constant);
    w.key("optimal_loss").value(res.sidecar.optimal_loss);
    w.key("per_group_mc_error").value(res.sidecar.per_group_mc_error);
    w.key("epsilon_loss").value(res.sidecar.epsilon_loss);
    w.end_object();
    write_text_file(a.out + ".sidecar.json", w.str() + "\n");
    std::cout << "wrote " << a.out << ": " << res.data.n << " rows, " << res.data.num_groups
              << " groups (sidecar " << a.out << ".sidecar.json)\n";
    return 0;
}

struct GenGroupBiasArgs {
    std::size_t k = 4;
    std::size_t n = 1000;
    double bias = 0.0;
    double noise_sd = 0.02;
    double level_flip = 0.5;
    std::uint64_t seed = 0;
    std::string out;
};

int run_gen_group_bias(const GenGroupBiasArgs& a) {
    GroupBiasSpec spec;
    spec.num_groups = a.k;
    spec.n = a.n;
    spec.noise_sd = a.noise_sd;
    spec.level_flip = a.level_flip;
    spec.seed = a.seed;
    broadcast_bias(spec, a.bias);
    CalibrationDataset ds = gen_group_bias(spec);
    write_csv(a.out, ds);
    std::cout << "wrote " << a.out << ": " << ds.n << " rows, " << ds.num_groups << " groups\n";
    return 0;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
    std::string method;
    std::string in;
    std::string out;
    std::string trace_path;
    std::uint64_t seed = 0;
    // ours
    double lr = 0.1;
    double subsample = 1.0;
    std::size_t max_trees = 5000;
    std::size_t patience = 50;
    double holdout = 0.3;
    std::size_t min_leaf = 1;
    std::size_t threshold_bins = 256;
    std::string solver = "greedy";
    double rho = 1e-12;
    std::size_t t_max = 1000;
    double epsilon_floor = 1e-9;
    // grid calibrators
    std::size_t m = 0;
    bool m_given = false;
    std::size_t depth = 2;
    std::size_t max_rounds = 0;
    bool lr_given = false;
    // multiaccurate
    double lambda = 0.0;
};

std::string ours_config_json(const BoostConfig& cfg, const std::string& solver) {
    JsonWriter w;
    w.begin_object();
    w.key("method").value("ours");
    w.key("solver").value(solver);
    w.key("learning_rate").value(cfg.learning_rate);
    w.key("max_trees").value_uint(cfg.max_trees);
    w.key("patience").value_uint(cfg.patience);
    w.key("holdout_fraction").value(cfg.holdout_fraction);
    w.key("feature_subsample").value(cfg.feature_subsample);
    w.key("min_leaf_count").value_uint(cfg.min_leaf_count);
    w.key("threshold_bins").value_uint(cfg.threshold_bins);
    w.key("seed").value_uint(cfg.seed);
    w.end_object();
    return w.str();
}

int run_calibrate(const CalibrateArgs& a) {
    const CalibrationDataset ds = load_input(a.in);
    CalibratedModel model;
    std::string config_json;
    FitTrace trace;

    if (a.method == "ours") {
        if (a.m_given)
            throw UsageError("--m with ours is rejected: ours is discretization-free");
        if (a.solver == "greedy") {
            BoostConfig cfg;
            cfg.learning_rate = a.lr_given ? a.lr : 0.1;
            cfg.max_trees = a.max_trees;
            cfg.patience = a.patience;
            cfg.holdout_fraction = a.holdout;
            cfg.feature_subsample = a.subsample;
            cfg.min_leaf_count = a.min_leaf;
            cfg.seed = a.seed;
            cfg.threshold_bins = a.threshold_bins;
            model = calibrate_ours(ds, cfg, &trace);
            config_json = ours_config_json(cfg, "greedy");
        } else if (a.solver == "squarelev") {
            SquareLevConfig cfg;
            cfg.rho = a.rho;
            cfg.t_max = a.t_max;
            cfg.epsilon_floor = a.epsilon_floor;
            cfg.seed = a.seed;
            model = calibrate_ours(ds, cfg, &trace);
            JsonWriter w;
            w.begin_object();
            w.key("method").value("ours");
            w.key("solver").value("squarelev");
            w.key("rho").value(cfg.rho);
            w.key("t_max").value_uint(cfg.t_max);
            w.key("epsilon_floor").value(cfg.epsilon_floor);
            w.key("seed").value_uint(cfg.seed);
            w.end_object();
            config_json = w.str();
        } else {
            throw UsageError("unknown solver: " + a.solver);
        }
    } else if (a.method == "mcboost") {
        if (!a.m_given) throw UsageError("mcboost requires --m");
        McBoostConfig cfg;
        cfg.holdout_fraction = a.holdout;
        cfg.max_rounds = a.max_rounds ? a.max_rounds : 2000;
        cfg.seed = a.seed;
        model = calibrate_mcboost(ds, make_grid(a.m), cfg);
        JsonWriter w;
        w.begin_object();
        w.key("method").value("mcboost");
        w.key("m").value_uint(a.m);
        w.key("holdout_fraction").value(cfg.holdout_fraction);
        w.key("max_rounds").value_uint(cfg.max_rounds);
        w.key("seed").value_uint(cfg.seed);
        w.end_object();
        config_json = w.str();
    } else if (a.method == "lsboost") {
        if (!a.m_given) throw UsageError("lsboost requires --m");
        LsBoostConfig cfg;
        cfg.depth = a.depth;
        cfg.learning_rate = a.lr_given ? a.lr : 1.0;
        cfg.subsample = a.subsample;
        cfg.max_rounds = a.max_rounds ? a.max_rounds : 200;
        cfg.holdout_fraction = a.holdout;
        cfg.min_leaf_count = a.min_leaf;
        cfg.seed = a.seed;
        model = calibrate_lsboost(ds, make_grid(a.m), cfg);
        JsonWriter w;
        w.begin_object();
        w.key("method").value("lsboost");
        w.key("m").value_uint(a.m);
        w.key("depth").value_uint(cfg.depth);
        w.key("learning_rate").value(cfg.learning_rate);
        w.key("subsample").value(cfg.subsample);
        w.key("max_rounds").value_uint(cfg.max_rounds);
        w.key("holdout_fraction").value(cfg.holdout_fraction);
        w.key("min_leaf_count").value_uint(cfg.min_leaf_count);
        w.key("seed").value_uint(cfg.seed);
        w.end_object();
        config_json = w.str();
    } else if (a.method == "multiaccurate") {
        model = calibrate_multiaccurate(ds, a.lambda);
        JsonWriter w;
        w.begin_object();
        w.key("method").value("multiaccurate");
        w.key("lambda").value(a.lambda);
        w.key("seed").value_uint(a.seed);
        w.end_object();
        config_json = w.str();
    } else {
        throw UsageError("unknown method: " + a.method);
    }

    save_model(a.out, model, config_json);
    if (!a.trace_path.empty()) write_text_file(a.trace_path, trace_to_jsonl(trace));
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string model_path;
    std::string in;
    std::string out;
    std::string json_out;
    std::string m_sweep = "10,20,30,50,75,100";
    std::size_t bins = 10;
};

std::vector<std::size_t> parse_m_sweep(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const long v = std::strtol(item.c_str(), nullptr, 10);
        if (v < 1) throw UsageError("invalid m in sweep: " + item);
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw UsageError("empty m sweep");
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int run_evaluate(const EvaluateArgs& a) {
    const CalibrationDataset ds = load_input(a.in);
    const CalibratedModel model = load_model(a.model_path);
    const std::vector<std::size_t> sweep = parse_m_sweep(a.m_sweep);
    const std::string method = kind_name(model.kind);
    const std::vector<double> pred = predict_dataset(model, ds);

    std::vector<EvaluationReport> reports;
    if (model.discretizer) {
        const std::size_t native = model.discretizer->m;
        for (std::size_t m : sweep)
            if (m != native)
                std::cerr << "warning: " << method << " model is calibrated at m=" << native
                          << "; skipping m=" << m << "\n";
        reports.push_back(evaluate_predictions(pred, ds, *model.discretizer, a.bins));
    } else {
        for (std::size_t m : sweep)
            reports.push_back(evaluate_predictions(pred, ds, make_grid(m), a.bins));
    }
    std::sort(reports.begin(), reports.end(),
              [](const EvaluationReport& x, const EvaluationReport& y) { return x.m < y.m; });

    std::string csv = report_csv_header() + "\n";
    for (const EvaluationReport& rep : reports) csv += report_to_csv_row(rep, method) + "\n";
    write_text_file(a.out, csv);

    if (!a.json_out.empty()) {
        std::string json = "{\"method\":\"" + method + "\",\"reports\":[";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            if (i) json += ',';
            json += report_to_json(reports[i], method);
        }
        json += "]}\n";
        write_text_file(a.json_out, json);
    }
    for (const EvaluationReport& rep : reports)
        std::cout << method << " m=" << rep.m << " range=" << rep.nonempty_range
                  << " mc_error=" << format_double(rep.mc_error)
                  << " loss=" << format_double(rep.squared_loss) << "\n";
    return 0;
}

// ---------------------------------------------------------------- audit

struct AuditArgs {
    std::string cal;
    std::string test;
    std::string out;
    std::size_t m = 20;
    double threshold = 1e-3;
    std::uint64_t seed = 0;
    double lr = 0.1;
    double subsample = 1.0;
    std::size_t max_trees = 5000;
    std::size_t patience = 50;
    double holdout = 0.3;
    std::size_t min_leaf = 1;
    std::size_t threshold_bins = 256;
};

int run_audit(const AuditArgs& a) {
    const CalibrationDataset cal = load_input(a.cal);
    const CalibrationDataset test = load_input(a.test);
    BoostConfig cfg;
    cfg.learning_rate = a.lr;
    cfg.feature_subsample = a.subsample;
    cfg.max_trees = a.max_trees;
    cfg.patience = a.patience;
    cfg.holdout_fraction = a.holdout;
    cfg.min_leaf_count = a.min_leaf;
    cfg.threshold_bins = a.threshold_bins;
    cfg.seed = a.seed;

    const AuditResult res = audit_saturation(cal, test, cfg, a.threshold);
    const BoundCheck check = check_theorem1(test, res.first_pass, make_grid(a.m), res.saturation);

    std::printf("%-12s %-12s %-12s %-14s %-8s\n", "loss(f0)", "loss(fcal)", "loss(2nd)",
                "eps_hat_loss", "passes");
    std::printf("%-12.6g %-12.6g %-12.6g %-14.6g %-8s\n", res.saturation.loss_f0,
                res.saturation.loss_fcal, res.saturation.loss_second_pass,
                res.saturation.epsilon_hat_loss, res.saturation.passes ? "yes" : "no");
    std::printf("theorem-1 check at m=%zu: mc_error=%.6g bound=%.6g slack=%.6g satisfied=%s\n",
                a.m, check.mc_error, check.bound, check.slack,
                check.satisfied ? "yes" : "no");
    if (!a.out.empty())
        write_text_file(a.out, saturation_to_json(res.saturation, &check) + "\n");
    return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    std::string method;
    std::string in;
    std::string out;
    std::string best_out;
    std::size_t folds = 10;
    std::size_t m = 20;
    bool m_given = false;
    std::uint64_t seed = 0;
};

struct GridPoint {
    std::string description;  // CSV fragment, matches header
    std::string config_json;
    std::function<double(const CalibrationDataset&, const CalibrationDataset&, std::uint64_t)>
        objective;  // fit on cal, return objective on val
};

int run_sweep(const SweepArgs& a) {
    const CalibrationDataset ds = load_input(a.in);
    if (a.folds < 1) throw UsageError("--folds must be >= 1");

    std::vector<GridPoint> grid;
    std::string param_header;
    const std::vector<double> lr_grid = {0.01, 0.0316, 0.1, 0.316, 1.0};
    std::vector<double> subsample_grid;
    for (int i = 1; i <= 10; ++i) subsample_grid.push_back(static_cast<double>(i) / 10.0);

    if (a.method == "ours") {
        param_header = "learning_rate,subsample";
        for (double lr : lr_grid)
            for (double sub : subsample_grid) {
                GridPoint p;
                p.description = format_double(lr) + "," + format_double(sub);
                BoostConfig proto;
                proto.learning_rate = lr;
                proto.feature_subsample = sub;
                p.config_json = ours_config_json(proto, "greedy");
                p.objective = [lr, sub](const CalibrationDataset& cal,
                                        const CalibrationDataset& val, std::uint64_t seed) {
                    BoostConfig cfg;
                    cfg.learning_rate = lr;
                    cfg.feature_subsample = sub;
                    cfg.seed = seed;
                    const CalibratedModel model = calibrate_ours(cal, cfg);
                    return squared_loss(predict_dataset(model, val), val.labels);
                };
                grid.push_back(std::move(p));
            }
    } else if (a.method == "lsboost") {
        if (!a.m_given) throw UsageError("sweep lsboost requires --m");
        param_header = "depth,learning_rate,subsample";
        const std::size_t m = a.m;
        for (std::size_t depth : {std::size_t{1}, std::size_t{2}})
            for (double lr : {0.1, 0.3, 1.0})
                for (double sub : subsample_grid) {
                    GridPoint p;
                    p.description = std::to_string(depth) + "," + format_double(lr) + "," +
                                    format_double(sub);
                    JsonWriter w;
                    w.begin_object();
                    w.key("method").value("lsboost");
                    w.key("m").value_uint(m);
                    w.key("depth").value_uint(depth);
                    w.key("learning_rate").value(lr);
                    w.key("subsample").value(sub);
                    w.end_object();
                    p.config_json = w.str();
                    p.objective = [depth, lr, sub, m](const CalibrationDataset& cal,
                                                      const CalibrationDataset& val,
                                                      std::uint64_t seed) {
                        LsBoostConfig cfg;
                        cfg.depth = depth;
                        cfg.learning_rate = lr;
                        cfg.subsample = sub;
                        cfg.seed = seed;
                        const CalibratedModel model = calibrate_lsboost(cal, make_grid(m), cfg);
                        return multicalibration_error(predict_dataset(model, val), val).max_error;
                    };
                    grid.push_back(std::move(p));
                }
    } else if (a.method == "mcboost") {
        if (!a.m_given) throw UsageError("sweep mcboost requires --m");
        param_header = "holdout_fraction";
        const std::size_t m = a.m;
        for (double holdout : {0.1, 0.2, 0.3, 0.4, 0.5}) {
            GridPoint p;
            p.description = format_double(holdout);
            JsonWriter w;
            w.begin_object();
            w.key("method").value("mcboost");
            w.key("m").value_uint(m);
            w.key("holdout_fraction").value(holdout);
            w.end_object();
            p.config_json = w.str();
            p.objective = [holdout, m](const CalibrationDataset& cal,
                                       const CalibrationDataset& val, std::uint64_t seed) {
                McBoostConfig cfg;
                cfg.holdout_fraction = holdout;
                cfg.seed = seed;
                const CalibratedModel model = calibrate_mcboost(cal, make_grid(m), cfg);
                return multicalibration_error(predict_dataset(model, val), val).max_error;
            };
            grid.push_back(std::move(p));
        }
    } else if (a.method == "multiaccurate") {
        param_header = "lambda";
        for (double lambda : {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
            GridPoint p;
            p.description = format_double(lambda);
            JsonWriter w;
            w.begin_object();
            w.key("method").value("multiaccurate");
            w.key("lambda").value(lambda);
            w.end_object();
            p.config_json = w.str();
            p.objective = [lambda](const CalibrationDataset& cal, const CalibrationDataset& val,
                                   std::uint64_t) {
                const CalibratedModel model = calibrate_multiaccurate(cal, lambda);
                return squared_loss(predict_dataset(model, val), val.labels);
            };
            grid.push_back(std::move(p));
        }
    } else {
        throw UsageError("unknown method: " + a.method);
    }

    // fold splits are shared across grid points
    std::vector<std::pair<CalibrationDataset, CalibrationDataset>> folds;
    for (std::size_t f = 0; f < a.folds; ++f)
        folds.push_back(split_holdout(ds, SplitSpec{a.seed + f, 0.5}));

    std::vector<double> mean_objective(grid.size(), 0.0);
    const std::size_t workers = worker_count(grid.size());
    std::atomic<std::size_t> next{0};
    auto run_jobs = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) break;
            double acc = 0.0;
            for (std::size_t f = 0; f < a.folds; ++f)
                acc += grid[i].objective(folds[f].first, folds[f].second, a.seed + f);
            mean_objective[i] = acc / static_cast<double>(a.folds);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run_jobs);
    run_jobs();
    for (auto& th : pool) th.join();

    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return mean_objective[x] < mean_objective[y];
    });

    std::string csv = "rank," + param_header + ",mean_objective\n";
    for (std::size_t r = 0; r < order.size(); ++r)
        csv += std::to_string(r + 1) + "," + grid[order[r]].description + "," +
               format_double(mean_objective[order[r]]) + "\n";
    write_text_file(a.out, csv);
    if (!a.best_out.empty())
        write_text_file(a.best_out, grid[order.front()].config_json + "\n");
    std::cout << "swept " << grid.size() << " configurations over " << a.folds
              << " folds; best " << param_header << " = " << grid[order.front()].description
              << " (objective " << format_double(mean_objective[order.front()]) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multicalibration post-processing toolkit"};
    app.require_subcommand(1);

    // gen
    CLI::App* gen = app.add_subcommand("gen", "generate synthetic datasets");
    gen->require_subcommand(1);
    GenXorArgs xa;
    CLI::App* gen_xor_cmd = gen->add_subcommand("xor", "three-group XOR construction");
    gen_xor_cmd->add_option("--gamma", xa.gamma, "XOR mixing weight in (0,1)")->required();
    gen_xor_cmd->add_option("--n", xa.n, "rows");
    gen_xor_cmd->add_option("--seed", xa.seed, "seed");
    gen_xor_cmd->add_option("--base", xa.base, "constant base score");
    gen_xor_cmd->add_option("-o,--out", xa.out, "output CSV")->required();

    GenGroupBiasArgs ga;
    CLI::App* gen_gb_cmd = gen->add_subcommand("group-bias", "groupwise-biased base scores");
    gen_gb_cmd->add_option("--k", ga.k, "number of groups")->required();
    gen_gb_cmd->add_option("--n", ga.n, "rows");
    gen_gb_cmd->add_option("--bias", ga.bias, "bias magnitude")->required();
    gen_gb_cmd->add_option("--noise-sd", ga.noise_sd, "label noise sd");
    gen_gb_cmd->add_option("--level-flip", ga.level_flip, "level-dependent bias fraction");
    gen_gb_cmd->add_option("--seed", ga.seed, "seed");
    gen_gb_cmd->add_option("-o,--out", ga.out, "output CSV")->required();

    // calibrate
    CalibrateArgs ca;
    CLI::App* cal = app.add_subcommand("calibrate", "fit a calibrator on a CSV dataset");
    cal->add_option("method", ca.method, "ours | mcboost | lsboost | multiaccurate")->required();
    cal->add_option("--in", ca.in, "calibration CSV")->required();
    cal->add_option("-o,--out", ca.out, "model JSON output")->required();
    cal->add_option("--trace", ca.trace_path, "fit trace JSONL output");
    cal->add_option("--seed", ca.seed, "seed");
    auto* lr_opt = cal->add_option("--lr", ca.lr, "learning rate");
    cal->add_option("--subsample", ca.subsample, "predicate subsample ratio");
    cal->add_option("--max-trees", ca.max_trees, "tree cap (ours)");
    cal->add_option("--patience", ca.patience, "early-stop patience (ours)");
    cal->add_option("--holdout", ca.holdout, "internal holdout fraction");
    cal->add_option("--min-leaf", ca.min_leaf, "minimum rows per leaf");
    cal->add_option("--threshold-bins", ca.threshold_bins, "threshold candidate cap");
    cal->add_option("--solver", ca.solver, "greedy | squarelev (ours)");
    cal->add_option("--rho", ca.rho, "variance floor (squarelev)");
    cal->add_option("--t-max", ca.t_max, "round cap (squarelev)");
    cal->add_option("--epsilon-floor", ca.epsilon_floor, "edge floor (squarelev)");
    auto* m_opt = cal->add_option("--m", ca.m, "grid size (mcboost/lsboost)");
    cal->add_option("--depth", ca.depth, "weak learner depth (lsboost)");
    cal->add_option("--max-rounds", ca.max_rounds, "round cap (mcboost/lsboost)");
    cal->add_option("--lambda", ca.lambda, "l1 strength (multiaccurate)");

    // evaluate
    EvaluateArgs ea;
    CLI::App* ev = app.add_subcommand("evaluate", "evaluate a model on a CSV dataset");
    ev->add_option("--model", ea.model_path, "model JSON")->required();
    ev->add_option("--in", ea.in, "test CSV")->required();
    ev->add_option("-o,--out", ea.out, "report CSV output")->required();
    ev->add_option("--json", ea.json_out, "full report JSON output");
    ev->add_option("--m-sweep", ea.m_sweep, "comma-separated grid sizes");
    ev->add_option("--bins", ea.bins, "ECE bin count");

    // audit
    AuditArgs aa;
    CLI::App* au = app.add_subcommand("audit", "loss-saturation audit and bound check");
    au->add_option("--cal", aa.cal, "calibration CSV")->required();
    au->add_option("--test", aa.test, "test CSV")->required();
    au->add_option("-o,--out", aa.out, "report JSON output");
    au->add_option("--m", aa.m, "grid size for the bound check");
    au->add_option("--threshold", aa.threshold, "saturation pass threshold");
    au->add_option("--seed", aa.seed, "seed");
    au->add_option("--lr", aa.lr, "learning rate");
    au->add_option("--subsample", aa.subsample, "predicate subsample ratio");
    au->add_option("--max-trees", aa.max_trees, "tree cap");
    au->add_option("--patience", aa.patience, "early-stop patience");
    au->add_option("--holdout", aa.holdout, "internal holdout fraction");
    au->add_option("--min-leaf", aa.min_leaf, "minimum rows per leaf");
    au->add_option("--threshold-bins", aa.threshold_bins, "threshold candidate cap");

    // sweep
    SweepArgs sa;
    CLI::App* sw = app.add_subcommand("sweep", "hyperparameter sweep with re-splits");
    sw->add_option("method", sa.method, "ours | mcboost | lsboost | multiaccurate")->required();
    sw->add_option("--in", sa.in, "calibration CSV")->required();
    sw->add_option("-o,--out", sa.out, "ranked CSV output")->required();
    sw->add_option("--best", sa.best_out, "winning config JSON output");
    sw->add_option("--folds", sa.folds, "number of re-splits");
    auto* sweep_m_opt = sw->add_option("--m", sa.m, "target grid size (mcboost/lsboost)");
    sw->add_option("--seed", sa.seed, "seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (gen_xor_cmd->parsed()) return run_gen_xor(xa);
        if (gen_gb_cmd->parsed()) return run_gen_group_bias(ga);
        if (cal->parsed()) {
            ca.m_given = m_opt->count() > 0;
            ca.lr_given = lr_opt->count() > 0;
            return run_calibrate(ca);
        }
        if (ev->parsed()) return run_evaluate(ea);
        if (au->parsed()) return run_audit(aa);
        if (sw->parsed()) {
            sa.m_given = sweep_m_opt->count() > 0;
            return run_sweep(sa);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
