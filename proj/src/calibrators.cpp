#include "multical/calibrators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "detail/split_search.hpp"
#include "multical/metrics.hpp"
#include "multical/rng.hpp"

namespace multical {

namespace {

std::vector<std::size_t> subsample_groups(std::size_t num_groups, double fraction,
                                          std::uint64_t seed, std::uint64_t stream) {
    std::vector<std::size_t> all(num_groups);
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (fraction >= 1.0 || num_groups <= 1) return all;
    const std::size_t keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(num_groups))));
    StreamRng rng(seed, stream);
    for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(num_groups - i));
        std::swap(all[i], all[j]);
    }
    all.resize(keep);
    std::sort(all.begin(), all.end());
    return all;
}

void require_grid(const Discretizer& d, const char* who) {
    if (d.kind != Discretizer::Kind::grid)
        throw std::invalid_argument(std::string(who) + " requires a grid discretizer");
}

}  // namespace

std::string kind_name(CalibratorKind k) {
    switch (k) {
        case CalibratorKind::ours: return "ours";
        case CalibratorKind::mcboost: return "mcboost";
        case CalibratorKind::lsboost: return "lsboost";
        case CalibratorKind::multiaccurate: return "multiaccurate";
    }
    return "unknown";
}

CalibratorKind kind_from_name(const std::string& name) {
    if (name == "ours") return CalibratorKind::ours;
    if (name == "mcboost") return CalibratorKind::mcboost;
    if (name == "lsboost") return CalibratorKind::lsboost;
    if (name == "multiaccurate") return CalibratorKind::multiaccurate;
    throw std::invalid_argument("unknown calibrator kind: " + name);
}

CalibratedModel calibrate_ours(const CalibrationDataset& ds, const BoostConfig& cfg,
                               FitTrace* trace) {
    auto [model, tr] = fit_greedy(ds, cfg);
    if (trace) *trace = std::move(tr);
    CalibratedModel out;
    out.kind = CalibratorKind::ours;
    out.payload = std::move(model);
    return out;
}

CalibratedModel calibrate_ours(const CalibrationDataset& ds, const SquareLevConfig& cfg,
                               FitTrace* trace) {
    auto [model, tr] = fit_squarelev(ds, cfg);
    if (trace) *trace = std::move(tr);
    CalibratedModel out;
    out.kind = CalibratorKind::ours;
    out.payload = std::move(model);
    return out;
}

CalibratedModel calibrate_mcboost(const CalibrationDataset& ds, const Discretizer& d,
                                  const McBoostConfig& cfg) {
    require_grid(d, "mcboost");
    if (!(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction < 1.0))
        throw std::invalid_argument("mcboost holdout fraction must be in (0,1)");
    auto [train, hold] = split_holdout(ds, SplitSpec{cfg.seed, cfg.holdout_fraction});
    if (train.n == 0 || hold.n == 0) throw std::invalid_argument("mcboost split has empty part");

    const std::size_t K = ds.num_groups;
    const std::vector<double>& levels = d.outputs;
    const std::size_t m = levels.size();
    auto level_index = [&](double v) {
        return static_cast<std::size_t>(
            std::lower_bound(levels.begin(), levels.end(), v) - levels.begin());
    };

    std::vector<double> p_train= multical::apply(d, train.base_scores);
    std::vector<double> p_hold= multical::apply(d, hold.base_scores);

    PatchTable table;
    double best_hold_mc = multicalibration_error(p_hold, hold).max_error;
    std::size_t best_round = 0;
    std::size_t since_best = 0;
    const std::size_t pass_size = K * m;

    std::vector<double> dev(K * m), ysum(K * m);
    std::vector<std::size_t> cnt(K * m);
    for (std::size_t round = 1; round <= cfg.max_rounds; ++round) {
        std::fill(dev.begin(), dev.end(), 0.0);
        std::fill(ysum.begin(), ysum.end(), 0.0);
        std::fill(cnt.begin(), cnt.end(), std::size_t{0});
        for (std::size_t r = 0; r < train.n; ++r) {
            const std::size_t j = level_index(p_train[r]);
            for (std::size_t i = 0; i < K; ++i) {
                if (!train.group_member(i, r)) continue;
                dev[i * m + j] += p_train[r] - train.labels[r];
                ysum[i * m + j] += train.labels[r];
                cnt[i * m + j] += 1;
            }
        }
        // score = Pr[cell] * |mean dev| = |sum dev| / n; cells whose label
        // mean re-discretizes back onto the current level cannot move
        std::size_t best_cell = 0;
        double best_score = 0.0;
        for (std::size_t c = 0; c < K * m; ++c) {
            if (cnt[c] == 0) continue;
            const double score = std::abs(dev[c]);
            if (score > best_score && d(ysum[c] / static_cast<double>(cnt[c])) != levels[c % m]) {
                best_score = score;
                best_cell = c;
            }
        }
        if (best_score == 0.0) break;  // every movable cell is calibrated

        const std::size_t gi = best_cell / m;
        const std::size_t lj = best_cell % m;
        PatchRecord rec{gi, levels[lj], ysum[best_cell] / static_cast<double>(cnt[best_cell])};
        const double patched = d(rec.new_value);
        for (std::size_t r = 0; r < train.n; ++r)
            if (p_train[r] == rec.level && train.group_member(gi, r)) p_train[r] = patched;
        for (std::size_t r = 0; r < hold.n; ++r)
            if (p_hold[r] == rec.level && hold.group_member(gi, r)) p_hold[r] = patched;
        table.records.push_back(rec);

        const double hold_mc = multicalibration_error(p_hold, hold).max_error;
        if (hold_mc < best_hold_mc) {
            best_hold_mc = hold_mc;
            best_round = round;
            since_best = 0;
        } else if (++since_best >= pass_size) {
            break;
        }
    }
    table.records.resize(best_round);

    CalibratedModel out;
    out.kind = CalibratorKind::mcboost;
    out.discretizer = d;
    out.payload = std::move(table);
    return out;
}

CalibratedModel calibrate_lsboost(const CalibrationDataset& ds, const Discretizer& d,
                                  const LsBoostConfig& cfg) {
    require_grid(d, "lsboost");
    if (cfg.depth != 1 && cfg.depth != 2)
        throw std::invalid_argument("lsboost depth must be 1 or 2");
    if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0))
        throw std::invalid_argument("lsboost learning rate must be in (0,1]");
    if (!(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction < 1.0))
        throw std::invalid_argument("lsboost holdout fraction must be in (0,1)");
    auto [train, hold] = split_holdout(ds, SplitSpec{cfg.seed, cfg.holdout_fraction});
    if (train.n == 0 || hold.n == 0) throw std::invalid_argument("lsboost split has empty part");

    // weak learners see group predicates only
    detail::DepthTwoSearch search(train, {});
    const std::vector<int> no_thresholds;

    std::vector<double> q_train= multical::apply(d, train.base_scores);
    std::vector<double> q_hold= multical::apply(d, hold.base_scores);

    LsBoostModel model;
    model.learning_rate = cfg.learning_rate;
    double best_hold_loss = squared_loss(q_hold, hold.labels);
    std::size_t best_round = 0;

    for (std::size_t round = 1; round <= cfg.max_rounds; ++round) {
        // partition train rows by current level
        std::vector<double> level_values = q_train;
        std::sort(level_values.begin(), level_values.end());
        level_values.erase(std::unique(level_values.begin(), level_values.end()),
                           level_values.end());
        LsRound round_rec;
        for (std::size_t lj = 0; lj < level_values.size(); ++lj) {
            const double v = level_values[lj];
            std::vector<std::uint32_t> rows;
            for (std::size_t r = 0; r < train.n; ++r)
                if (q_train[r] == v) rows.push_back(static_cast<std::uint32_t>(r));
            if (rows.size() < cfg.min_leaf_count) continue;
            const std::vector<std::size_t> cand = subsample_groups(
                train.num_groups, cfg.subsample, cfg.seed, round * 131071u + lj);
            detail::SearchResult res =
                search.search(rows, train.labels, no_thresholds, cand, /*min_leaf=*/1,
                              /*allow_children=*/cfg.depth == 2);
            DepthTwoTree tree;
            if (res.found) {
                tree = search.to_tree(res, 1.0);
            } else {
                // constant learner: the level-set label mean
                double sum = 0.0;
                for (std::uint32_t r : rows) sum += train.labels[r];
                tree.root = tree.left = tree.right = SplitPredicate::at_threshold(0.0);
                tree.leaves[0] = sum / static_cast<double>(rows.size());
            }
            round_rec.level_trees.emplace_back(v, tree);
        }
        if (round_rec.level_trees.empty()) break;

        // p <- d(p + lr*(h - p)); rows match trees on the round-start
        // assignment, so update against a snapshot
        std::vector<std::uint8_t> g(train.num_groups);
        const std::vector<double> snap_train = q_train;
        for (const auto& [v, tree] : round_rec.level_trees) {
            for (std::size_t r = 0; r < train.n; ++r) {
                if (snap_train[r] != v) continue;
                for (std::size_t i = 0; i < train.num_groups; ++i)
                    g[i] = train.groups[i * train.n + r];
                const double h = tree_predict(tree, train.base_scores[r], g.data());
                q_train[r] = d(snap_train[r] + cfg.learning_rate * (h - snap_train[r]));
            }
        }
        const std::vector<double> snap_hold = q_hold;
        for (const auto& [v, tree] : round_rec.level_trees) {
            for (std::size_t r = 0; r < hold.n; ++r) {
                if (snap_hold[r] != v) continue;
                for (std::size_t i = 0; i < hold.num_groups; ++i)
                    g[i] = hold.groups[i * hold.n + r];
                const double h = tree_predict(tree, hold.base_scores[r], g.data());
                q_hold[r] = d(snap_hold[r] + cfg.learning_rate * (h - snap_hold[r]));
            }
        }
        model.rounds.push_back(std::move(round_rec));

        const double hold_loss = squared_loss(q_hold, hold.labels);
        if (hold_loss < best_hold_loss) {
            best_hold_loss = hold_loss;
            best_round = round;
        } else {
            break;  // patience: one full round
        }
    }
    model.rounds.resize(best_round);

    CalibratedModel out;
    out.kind = CalibratorKind::lsboost;
    out.discretizer = d;
    out.payload = std::move(model);
    return out;
}

CalibratedModel calibrate_multiaccurate(const CalibrationDataset& ds, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    const std::size_t n = ds.n;
    const std::size_t K = ds.num_groups;

    std::vector<double> e(n);  // current fit residual r - b - w.g
    for (std::size_t r = 0; r < n; ++r) e[r] = ds.labels[r] - ds.base_scores[r];
    double b = 0.0;
    std::vector<double> w(K, 0.0);
    std::vector<double> z(K, 0.0);  // group frequencies
    for (std::size_t i = 0; i < K; ++i) {
        const std::uint8_t* col = ds.group_column(i);
        std::size_t c = 0;
        for (std::size_t r = 0; r < n; ++r) c += col[r];
        z[i] = static_cast<double>(c) / static_cast<double>(n);
    }

    const double tol = 1e-10;
    for (std::size_t sweep = 0; sweep < 10000; ++sweep) {
        double max_change = 0.0;
        double mean_e = 0.0;
        for (double x : e) mean_e += x;
        mean_e /= static_cast<double>(n);
        b += mean_e;
        for (double& x : e) x -= mean_e;
        max_change = std::max(max_change, std::abs(mean_e));

        for (std::size_t i = 0; i < K; ++i) {
            if (z[i] == 0.0) continue;
            const std::uint8_t* col = ds.group_column(i);
            double dot = 0.0;
            for (std::size_t r = 0; r < n; ++r)
                if (col[r]) dot += e[r];
            const double u = dot / static_cast<double>(n) + w[i] * z[i];
            const double thr = lambda / 2.0;
            double wi = 0.0;
            if (u > thr) wi = (u - thr) / z[i];
            else if (u < -thr) wi = (u + thr) / z[i];
            const double delta = wi - w[i];
            if (delta != 0.0) {
                for (std::size_t r = 0; r < n; ++r)
                    if (col[r]) e[r] -= delta;
                w[i] = wi;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        if (max_change < tol) break;
    }

    CalibratedModel out;
    out.kind = CalibratorKind::multiaccurate;
    out.payload = LinearModel{b, std::move(w), lambda};
    return out;
}

namespace {
void ensure_group_arity(const EnsemblePredictor& e, std::size_t num_groups) {
    for (const DepthTwoTree& t : e.trees)
        for (const SplitPredicate* p : {&t.root, &t.left, &t.right})
            if (p->kind == SplitPredicate::Kind::group && p->group >= num_groups)
                throw std::invalid_argument("group arity mismatch");
}
}  // namespace

double predict(const CalibratedModel& model, double f0, const std::uint8_t* g,
               std::size_t num_groups) {
    switch (model.kind) {
        case CalibratorKind::ours: {
            const EnsemblePredictor& e = std::get<EnsemblePredictor>(model.payload);
            ensure_group_arity(e, num_groups);
            return e.predict(f0, g);
        }
        case CalibratorKind::multiaccurate: {
            const LinearModel& lm = std::get<LinearModel>(model.payload);
            if (lm.weights.size() != num_groups)
                throw std::invalid_argument("group arity mismatch");
            double v = f0 + lm.intercept;
            for (std::size_t i = 0; i < num_groups; ++i)
                if (g[i]) v += lm.weights[i];
            return std::min(1.0, std::max(0.0, v));
        }
        case CalibratorKind::mcboost: {
            if (!model.discretizer) throw std::invalid_argument("mcboost model lacks discretizer");
            const Discretizer& d = *model.discretizer;
            double q = d(f0);
            for (const PatchRecord& rec : std::get<PatchTable>(model.payload).records) {
                if (rec.group >= num_groups) throw std::invalid_argument("group arity mismatch");
                if (q == rec.level && g[rec.group]) q = d(rec.new_value);
            }
            return q;
        }
        case CalibratorKind::lsboost: {
            if (!model.discretizer) throw std::invalid_argument("lsboost model lacks discretizer");
            const Discretizer& d = *model.discretizer;
            const LsBoostModel& ls = std::get<LsBoostModel>(model.payload);
            double q = d(f0);
            for (const LsRound& round : ls.rounds) {
                for (const auto& [v, tree] : round.level_trees) {
                    if (q != v) continue;
                    const double h = tree_predict(tree, f0, g);
                    q = d(q + ls.learning_rate * (h - q));
                    break;
                }
            }
            return q;
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<double> predict_dataset(const CalibratedModel& model, const CalibrationDataset& ds) {
    if (model.kind == CalibratorKind::ours) {
        // arity checked once, then the ensemble applies row by row
        const EnsemblePredictor& e = std::get<EnsemblePredictor>(model.payload);
        ensure_group_arity(e, ds.num_groups);
        return predict_rows(e, ds);
    }
    std::vector<double> out(ds.n);
    std::vector<std::uint8_t> g(ds.num_groups);
    for (std::size_t r = 0; r < ds.n; ++r) {
        for (std::size_t i = 0; i < ds.num_groups; ++i) g[i] = ds.groups[i * ds.n + r];
        out[r] = predict(model, ds.base_scores[r], g.data(), ds.num_groups);
    }
    return out;
}

}  // namespace multical
