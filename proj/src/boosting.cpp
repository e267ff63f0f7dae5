#include "multical/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "detail/split_search.hpp"
#include "multical/rng.hpp"

namespace multical {

namespace {

using detail::DepthTwoSearch;
using detail::SearchResult;
using detail::SplitRef;

struct Candidates {
    std::vector<int> thresholds;
    std::vector<std::size_t> groups;
};

Candidates subsample_candidates(std::size_t num_thresholds, std::size_t num_groups,
                                double fraction, std::uint64_t seed, std::uint64_t round) {
    Candidates out;
    const std::size_t total = num_thresholds + num_groups;
    if (fraction >= 1.0 || total <= 1) {
        out.thresholds.resize(num_thresholds);
        std::iota(out.thresholds.begin(), out.thresholds.end(), 0);
        out.groups.resize(num_groups);
        std::iota(out.groups.begin(), out.groups.end(), std::size_t{0});
        return out;
    }
    const std::size_t keep =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total))));
    std::vector<std::size_t> pool(total);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    StreamRng rng(seed, 0xfea7u ^ round * 0x9e37u);
    for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(total - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(keep);
    std::sort(pool.begin(), pool.end());
    for (std::size_t c : pool) {
        if (c < num_thresholds) out.thresholds.push_back(static_cast<int>(c));
        else out.groups.push_back(c - num_thresholds);
    }
    return out;
}

std::string describe(const DepthTwoSearch& search, const SearchResult& res) {
    auto one = [&](const SplitRef& s) {
        return search.predicate_of(s).describe();
    };
    return one(res.root) + " / " + one(res.left) + " | " + one(res.right);
}

double mean_sq(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> predict_rows(const EnsemblePredictor& e, const CalibrationDataset& ds) {
    std::vector<double> out(ds.n);
    std::vector<std::uint8_t> g(ds.num_groups);
    for (std::size_t r = 0; r < ds.n; ++r) {
        for (std::size_t i = 0; i < ds.num_groups; ++i) g[i] = ds.groups[i * ds.n + r];
        out[r] = e.predict(ds.base_scores[r], g.data());
    }
    return out;
}

std::pair<EnsemblePredictor, FitTrace> fit_greedy(const CalibrationDataset& ds,
                                                  const BoostConfig& cfg) {
    if (ds.n < 2) throw std::invalid_argument("fit_greedy needs at least 2 rows");
    if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
    if (!(cfg.holdout_fraction >= 0.0 && cfg.holdout_fraction < 1.0))
        throw std::invalid_argument("holdout fraction must be in [0,1)");
    if (!(cfg.feature_subsample > 0.0 && cfg.feature_subsample <= 1.0))
        throw std::invalid_argument("feature subsample must be in (0,1]");
    if (cfg.threshold_bins == 0) throw std::invalid_argument("threshold_bins must be >= 1");

    CalibrationDataset train;
    CalibrationDataset holdout;
    const bool use_holdout =
        cfg.holdout_fraction > 0.0 &&
        static_cast<std::size_t>(std::floor(cfg.holdout_fraction * static_cast<double>(ds.n))) >= 1;
    if (use_holdout) {
        auto parts = split_holdout(ds, SplitSpec{cfg.seed, cfg.holdout_fraction});
        train = std::move(parts.first);
        holdout = std::move(parts.second);
    } else {
        train = ds;
    }

    EnsemblePredictor model;
    model.clamp = true;
    model.metadata.solver = "greedy";
    model.metadata.seed = cfg.seed;
    FitTrace trace;

    const std::size_t n = train.n;
    std::vector<double> residual(n);
    for (std::size_t r = 0; r < n; ++r) residual[r] = train.labels[r] - train.base_scores[r];

    const double rmin = *std::min_element(residual.begin(), residual.end());
    const double rmax = *std::max_element(residual.begin(), residual.end());
    if (rmin == rmax) {
        trace.stop_reason = "zero variance";
        return {model, trace};
    }

    DepthTwoSearch search(train, detail::build_thresholds(train.base_scores, cfg.threshold_bins));
    const std::size_t num_thr = search.thresholds().size();
    std::vector<std::uint32_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0u);

    std::vector<double> holdout_pred = holdout.base_scores;  // running, unclamped
    std::vector<std::uint8_t> gbuf(ds.num_groups);
    auto holdout_loss = [&]() {
        double acc = 0.0;
        for (std::size_t r = 0; r < holdout.n; ++r) {
            const double e = holdout_pred[r] - holdout.labels[r];
            acc += e * e;
        }
        return acc / static_cast<double>(holdout.n);
    };

    double best_holdout = use_holdout ? holdout_loss() : 0.0;
    std::size_t best_iter = 0;
    std::size_t since_best = 0;
    trace.stop_reason = "max_trees";

    for (std::size_t iter = 1; iter <= cfg.max_trees; ++iter) {
        const Candidates cand = subsample_candidates(num_thr, train.num_groups,
                                                     cfg.feature_subsample, cfg.seed, iter);
        SearchResult res =
            search.search(all_rows, residual, cand.thresholds, cand.groups, cfg.min_leaf_count,
                          /*allow_children=*/true);
        DepthTwoTree tree;
        if (res.found) {
            tree = search.to_tree(res, cfg.learning_rate);
        } else {
            // nothing splits, but the class still contains constants
            double total = 0.0;
            for (double v : residual) total += v;
            if (total == 0.0) {
                trace.stop_reason = "no improving split";
                break;
            }
            res.root = res.left = res.right = SplitRef{false, -1};
            tree.root = tree.left = tree.right = SplitPredicate::at_threshold(0.0);
            tree.leaves[0] = cfg.learning_rate * total / static_cast<double>(n);
        }

        model.trees.push_back(tree);
        for (std::size_t r = 0; r < n; ++r) {
            const int leaf = search.in_split(res.root, r)
                                 ? (search.in_split(res.left, r) ? 0 : 1)
                                 : (search.in_split(res.right, r) ? 2 : 3);
            residual[r] -= tree.leaves[leaf];
        }

        FitTraceRecord rec;
        rec.iteration = iter;
        rec.train_loss = mean_sq(residual);
        rec.split = describe(search, res);

        if (use_holdout) {
            for (std::size_t r = 0; r < holdout.n; ++r) {
                for (std::size_t i = 0; i < holdout.num_groups; ++i)
                    gbuf[i] = holdout.groups[i * holdout.n + r];
                holdout_pred[r] += tree_predict(tree, holdout.base_scores[r], gbuf.data());
            }
            const double hloss = holdout_loss();
            rec.holdout_loss = hloss;
            trace.records.push_back(std::move(rec));
            if (hloss < best_holdout) {
                best_holdout = hloss;
                best_iter = iter;
                since_best = 0;
            } else if (++since_best >= cfg.patience) {
                trace.stop_reason = "patience";
                break;
            }
        } else {
            trace.records.push_back(std::move(rec));
            best_iter = iter;
        }
    }

    model.trees.resize(best_iter);
    model.metadata.iterations = best_iter;
    trace.best_iteration = best_iter;
    return {model, trace};
}

std::pair<EnsemblePredictor, FitTrace> fit_squarelev(const CalibrationDataset& ds,
                                                     const SquareLevConfig& cfg) {
    if (ds.n < 2) throw std::invalid_argument("fit_squarelev needs at least 2 rows");
    if (cfg.rho < 0.0) throw std::invalid_argument("rho must be >= 0");

    EnsemblePredictor model;
    model.clamp = true;
    model.metadata.solver = "squarelev";
    model.metadata.seed = cfg.seed;
    FitTrace trace;

    const std::size_t n = ds.n;
    std::vector<double> residual(n);
    for (std::size_t r = 0; r < n; ++r) residual[r] = ds.labels[r] - ds.base_scores[r];

    DepthTwoSearch search(ds, detail::build_thresholds(ds.base_scores, 256));
    const std::size_t num_thr = search.thresholds().size();
    std::vector<int> cand_thr(num_thr);
    std::iota(cand_thr.begin(), cand_thr.end(), 0);
    std::vector<std::size_t> cand_groups(ds.num_groups);
    std::iota(cand_groups.begin(), cand_groups.end(), std::size_t{0});
    std::vector<std::uint32_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0u);

    std::vector<double> centered(n), out(n);
    auto centered_norm_sq = [&](const std::vector<double>& v, std::vector<double>* c) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double d = v[i] - mean;
            if (c) (*c)[i] = d;
            acc += d * d;
        }
        return acc;
    };

    trace.stop_reason = "t_max";
    for (std::size_t t = 1; t <= cfg.t_max; ++t) {
        const double rnorm_sq = centered_norm_sq(residual, &centered);
        if (rnorm_sq < cfg.rho * static_cast<double>(n) || rnorm_sq == 0.0) {
            trace.stop_reason = "variance floor";
            break;
        }
        SearchResult res = search.search(all_rows, centered, cand_thr, cand_groups,
                                         /*min_leaf=*/1, /*allow_children=*/true);
        if (!res.found) {
            trace.stop_reason = "zero edge";
            break;
        }
        const DepthTwoTree base_tree = search.to_tree(res, 1.0);
        for (std::size_t r = 0; r < n; ++r) {
            const int leaf = search.in_split(res.root, r)
                                 ? (search.in_split(res.left, r) ? 0 : 1)
                                 : (search.in_split(res.right, r) ? 2 : 3);
            out[r] = base_tree.leaves[leaf];
        }
        std::vector<double> fc(n);
        const double fnorm_sq = centered_norm_sq(out, &fc);
        if (fnorm_sq == 0.0) {
            trace.stop_reason = "zero edge";
            break;
        }
        double dot = 0.0;
        for (std::size_t r = 0; r < n; ++r) dot += centered[r] * fc[r];
        const double edge = dot / (std::sqrt(rnorm_sq) * std::sqrt(fnorm_sq));
        if (std::abs(edge) < cfg.epsilon_floor) {
            trace.stop_reason = "edge below floor";
            break;
        }
        const double alpha = edge * std::sqrt(rnorm_sq) / std::sqrt(fnorm_sq);

        DepthTwoTree scaled = base_tree;
        for (double& leaf : scaled.leaves) leaf *= alpha;
        model.trees.push_back(scaled);
        for (std::size_t r = 0; r < n; ++r) residual[r] -= alpha * out[r];

        FitTraceRecord rec;
        rec.iteration = t;
        rec.train_loss = mean_sq(residual);
        rec.split = describe(search, res);
        rec.edge = edge;
        rec.alpha = alpha;
        rec.variance_before = rnorm_sq / static_cast<double>(n);
        rec.variance_after = centered_norm_sq(residual, nullptr) / static_cast<double>(n);
        trace.records.push_back(std::move(rec));
    }

    model.metadata.iterations = model.trees.size();
    trace.best_iteration = model.trees.size();
    return {model, trace};
}

}  // namespace multical
