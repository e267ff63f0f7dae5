#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "multical/dataset.hpp"
#include "multical/tree.hpp"

namespace multical {
namespace detail {

// Candidate split reference. Threshold candidates are indices into the
// shared threshold list; index -1 is the always-true predicate (threshold
// 0), used for an unsplit child side.
struct SplitRef {
    bool is_group = false;
    int index = -1;
};

struct CellStats {
    std::size_t cnt = 0;
    double sum = 0.0;
};

struct SearchResult {
    bool found = false;
    SplitRef root, left, right;
    double total_score = 0.0;  // sum over the four leaf cells of sum^2/cnt
    CellStats cells[4];        // leaf order as in DepthTwoTree
};

// Exact depth-two least-squares split search over threshold and group
// predicates. Scores are sufficient-statistic based (count and target sum
// per cell), so the chosen triple attains the same SSE as exhaustive
// enumeration of all (root, left, right) candidate triples.
class DepthTwoSearch {
public:
    DepthTwoSearch(const CalibrationDataset& ds, std::vector<double> thresholds)
        : ds_(&ds), thresholds_(std::move(thresholds)) {
        bin_of_.resize(ds.n);
        for (std::size_t r = 0; r < ds.n; ++r) {
            const auto it =
                std::upper_bound(thresholds_.begin(), thresholds_.end(), ds.base_scores[r]);
            bin_of_[r] = static_cast<std::uint32_t>(it - thresholds_.begin());
        }
    }

    const std::vector<double>& thresholds() const { return thresholds_; }
    double threshold_value(int idx) const { return idx < 0 ? 0.0 : thresholds_[idx]; }

    bool in_split(const SplitRef& s, std::size_t row) const {
        if (s.is_group) return ds_->group_member(static_cast<std::size_t>(s.index), row);
        return s.index < 0 || bin_of_[row] >= static_cast<std::uint32_t>(s.index) + 1;
    }

    int leaf_of(const SearchResult& t, std::size_t row) const {
        if (in_split(t.root, row)) return in_split(t.left, row) ? 0 : 1;
        return in_split(t.right, row) ? 2 : 3;
    }

    SplitPredicate predicate_of(const SplitRef& s) const {
        if (s.is_group) return SplitPredicate::on_group(static_cast<std::size_t>(s.index));
        return SplitPredicate::at_threshold(threshold_value(s.index));
    }

    DepthTwoTree to_tree(const SearchResult& res, double scale) const {
        DepthTwoTree t;
        t.root = predicate_of(res.root);
        t.left = predicate_of(res.left);
        t.right = predicate_of(res.right);
        for (int c = 0; c < 4; ++c)
            t.leaves[c] = res.cells[c].cnt
                              ? scale * res.cells[c].sum / static_cast<double>(res.cells[c].cnt)
                              : 0.0;
        return t;
    }

    // rows: subset of dataset row indices; targets: per dataset row.
    // cand_thr: sorted threshold indices; cand_groups: sorted group indices.
    // Tie-break is by evaluation order (thresholds ascending before groups
    // ascending, at root and within each side), first strict improvement.
    SearchResult search(const std::vector<std::uint32_t>& rows, const std::vector<double>& targets,
                        const std::vector<int>& cand_thr,
                        const std::vector<std::size_t>& cand_groups, std::size_t min_leaf,
                        bool allow_children) {
        const std::size_t nb = thresholds_.size() + 1;
        const std::size_t G = cand_groups.size();
        prefix_cnt_.assign(nb + 1, 0);
        prefix_sum_.assign(nb + 1, 0.0);
        gprefix_cnt_.assign(G * (nb + 1), 0);
        gprefix_sum_.assign(G * (nb + 1), 0.0);
        pair_cnt_.assign(G * G, 0);
        pair_sum_.assign(G * G, 0.0);
        active_.reserve(G);

        for (const std::uint32_t r : rows) {
            const std::size_t b = bin_of_[r];
            const double t = targets[r];
            prefix_cnt_[b + 1] += 1;
            prefix_sum_[b + 1] += t;
            active_.clear();
            for (std::size_t gi = 0; gi < G; ++gi) {
                if (!ds_->group_member(cand_groups[gi], r)) continue;
                active_.push_back(gi);
                gprefix_cnt_[gi * (nb + 1) + b + 1] += 1;
                gprefix_sum_[gi * (nb + 1) + b + 1] += t;
            }
            for (const std::size_t a : active_)
                for (const std::size_t b2 : active_) {
                    pair_cnt_[a * G + b2] += 1;
                    pair_sum_[a * G + b2] += t;
                }
        }
        for (std::size_t b = 0; b < nb; ++b) {
            prefix_cnt_[b + 1] += prefix_cnt_[b];
            prefix_sum_[b + 1] += prefix_sum_[b];
        }
        for (std::size_t gi = 0; gi < G; ++gi) {
            std::size_t* pc = gprefix_cnt_.data() + gi * (nb + 1);
            double* ps = gprefix_sum_.data() + gi * (nb + 1);
            for (std::size_t b = 0; b < nb; ++b) {
                pc[b + 1] += pc[b];
                ps[b + 1] += ps[b];
            }
        }

        const CellStats total{prefix_cnt_[nb], prefix_sum_[nb]};

        SearchResult best;
        min_leaf_ = std::max<std::size_t>(min_leaf, 1);
        G_ = G;
        nb_ = nb;
        cand_thr_ = &cand_thr;
        cand_groups_ = &cand_groups;
        allow_children_ = allow_children;

        // roots: thresholds ascending, then groups ascending
        for (const int c : cand_thr) {
            const CellStats in = bin_range(static_cast<std::size_t>(c) + 1, nb - 1);
            const CellStats out = bin_range(0, static_cast<std::size_t>(c));
            consider_root(SplitRef{false, c}, in, out, RangeSide{static_cast<std::size_t>(c) + 1, nb - 1},
                          RangeSide{0, static_cast<std::size_t>(c)}, best);
        }
        for (std::size_t gi = 0; gi < G; ++gi) {
            const CellStats in{pair_cnt_[gi * G + gi], pair_sum_[gi * G + gi]};
            const CellStats out{total.cnt - in.cnt, total.sum - in.sum};
            consider_root_group(gi, in, out, best);
        }
        return best;
    }

private:
    struct RangeSide {
        std::size_t lo, hi;  // inclusive bin range
    };
    struct ChildBest {
        double score = -1.0;
        SplitRef ref;
        CellStats in, out;
    };

    static double term(const CellStats& c) {
        return c.cnt ? c.sum * c.sum / static_cast<double>(c.cnt) : 0.0;
    }
    bool cells_ok(const CellStats& a, const CellStats& b) const {
        return (a.cnt == 0 || a.cnt >= min_leaf_) && (b.cnt == 0 || b.cnt >= min_leaf_);
    }

    CellStats bin_range(std::size_t lo, std::size_t hi) const {  // inclusive, empty if lo > hi
        if (lo > hi) return {};
        return {prefix_cnt_[hi + 1] - prefix_cnt_[lo], prefix_sum_[hi + 1] - prefix_sum_[lo]};
    }
    CellStats gbin_range(std::size_t gi, std::size_t lo, std::size_t hi) const {
        if (lo > hi) return {};
        const std::size_t* pc = gprefix_cnt_.data() + gi * (nb_ + 1);
        const double* ps = gprefix_sum_.data() + gi * (nb_ + 1);
        return {pc[hi + 1] - pc[lo], ps[hi + 1] - ps[lo]};
    }

    void propose(ChildBest& best, const SplitRef& ref, const CellStats& in,
                 const CellStats& out) const {
        if (!cells_ok(in, out)) return;
        const double sc = term(in) + term(out);
        if (sc > best.score) best = ChildBest{sc, ref, in, out};
    }

    // best child split of a side that is a contiguous bin range
    ChildBest side_best_range(const RangeSide& side, const CellStats& stats) const {
        ChildBest best;
        propose(best, SplitRef{false, -1}, stats, CellStats{});  // unsplit fallback
        if (!allow_children_) return best;
        for (const int d : *cand_thr_) {
            const std::size_t du = static_cast<std::size_t>(d);
            if (du < side.lo || du + 1 > side.hi) continue;
            const CellStats in = bin_range(du + 1, side.hi);
            propose(best, SplitRef{false, d}, in,
                    CellStats{stats.cnt - in.cnt, stats.sum - in.sum});
        }
        for (std::size_t gi = 0; gi < G_; ++gi) {
            const CellStats in = gbin_range(gi, side.lo, side.hi);
            propose(best, SplitRef{true, static_cast<int>((*cand_groups_)[gi])}, in,
                    CellStats{stats.cnt - in.cnt, stats.sum - in.sum});
        }
        return best;
    }

    // best child split of the member side (member=true) or complement side
    // of root group gi
    ChildBest side_best_group(std::size_t gi, bool member, const CellStats& stats) const {
        ChildBest best;
        propose(best, SplitRef{false, -1}, stats, CellStats{});
        if (!allow_children_) return best;
        for (const int d : *cand_thr_) {
            const std::size_t du = static_cast<std::size_t>(d);
            if (du + 1 > nb_ - 1) continue;
            CellStats in = gbin_range(gi, du + 1, nb_ - 1);
            if (!member) {
                const CellStats all = bin_range(du + 1, nb_ - 1);
                in = CellStats{all.cnt - in.cnt, all.sum - in.sum};
            }
            propose(best, SplitRef{false, d}, in,
                    CellStats{stats.cnt - in.cnt, stats.sum - in.sum});
        }
        for (std::size_t gj = 0; gj < G_; ++gj) {
            CellStats in{pair_cnt_[gi * G_ + gj], pair_sum_[gi * G_ + gj]};
            if (!member)
                in = CellStats{pair_cnt_[gj * G_ + gj] - in.cnt, pair_sum_[gj * G_ + gj] - in.sum};
            propose(best, SplitRef{true, static_cast<int>((*cand_groups_)[gj])}, in,
                    CellStats{stats.cnt - in.cnt, stats.sum - in.sum});
        }
        return best;
    }

    void adopt(const SplitRef& root, const ChildBest& in_best, const ChildBest& out_best,
               SearchResult& best) const {
        const double total = in_best.score + out_best.score;
        if (total <= best.total_score && best.found) return;
        if (!best.found && total <= 0.0) return;
        SearchResult r;
        r.found = true;
        r.root = root;
        r.left = in_best.ref;
        r.right = out_best.ref;
        r.total_score = total;
        r.cells[0] = in_best.in;
        r.cells[1] = in_best.out;
        r.cells[2] = out_best.in;
        r.cells[3] = out_best.out;
        best = r;
    }

    void consider_root(const SplitRef& root, const CellStats& in, const CellStats& out,
                       const RangeSide& in_side, const RangeSide& out_side,
                       SearchResult& best) const {
        if (in.cnt < min_leaf_ || out.cnt < min_leaf_) return;
        adopt(root, side_best_range(in_side, in), side_best_range(out_side, out), best);
    }

    void consider_root_group(std::size_t gi, const CellStats& in, const CellStats& out,
                             SearchResult& best) const {
        if (in.cnt < min_leaf_ || out.cnt < min_leaf_) return;
        adopt(SplitRef{true, static_cast<int>((*cand_groups_)[gi])}, side_best_group(gi, true, in),
              side_best_group(gi, false, out), best);
    }

    const CalibrationDataset* ds_;
    std::vector<double> thresholds_;
    std::vector<std::uint32_t> bin_of_;

    // per-search workspace
    std::vector<std::size_t> prefix_cnt_;
    std::vector<double> prefix_sum_;
    std::vector<std::size_t> gprefix_cnt_;
    std::vector<double> gprefix_sum_;
    std::vector<std::size_t> pair_cnt_;
    std::vector<double> pair_sum_;
    std::vector<std::size_t> active_;
    std::size_t min_leaf_ = 1;
    std::size_t G_ = 0;
    std::size_t nb_ = 0;
    const std::vector<int>* cand_thr_ = nullptr;
    const std::vector<std::size_t>* cand_groups_ = nullptr;
    bool allow_children_ = true;
};

// Candidate thresholds for a base-score column: midpoints between
// consecutive distinct values, falling back to a quantile histogram capped
// at `max_bins` when there are more distinct values than bins.
inline std::vector<double> build_thresholds(const std::vector<double>& scores,
                                            std::size_t max_bins) {
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> cuts;
    if (distinct.size() <= max_bins) {
        cuts = std::move(distinct);
    } else {
        const std::size_t n = sorted.size();
        for (std::size_t k = 1; k < max_bins; ++k) {
            const double q = sorted[(k * n) / max_bins];
            if (cuts.empty() || q > cuts.back()) cuts.push_back(q);
        }
        if (!cuts.empty() && cuts.front() <= sorted.front()) cuts.erase(cuts.begin());
        cuts.insert(cuts.begin(), sorted.front());
    }
    std::vector<double> thresholds;
    thresholds.reserve(cuts.size());
    for (std::size_t i = 1; i < cuts.size(); ++i)
        thresholds.push_back(0.5 * (cuts[i - 1] + cuts[i]));
    return thresholds;
}

}  // namespace detail
}  // namespace multical
