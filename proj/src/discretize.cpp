#include "multical/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace multical {

double Discretizer::operator()(double v) const {
    // index of the first boundary > v; boundary values map to the upper cell
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), v);
    return outputs[static_cast<std::size_t>(it - boundaries.begin())];
}

Discretizer make_grid(std::size_t m) {
    if (m == 0) throw std::invalid_argument("grid discretizer needs m >= 1");
    Discretizer d;
    d.kind = Discretizer::Kind::grid;
    d.m = m;
    d.outputs.reserve(m);
    for (std::size_t k = 0; k < m; ++k)
        d.outputs.push_back(static_cast<double>(2 * k + 1) / static_cast<double>(2 * m));
    d.boundaries.reserve(m - 1);
    for (std::size_t k = 1; k < m; ++k)
        d.boundaries.push_back(static_cast<double>(k) / static_cast<double>(m));
    return d;
}

Discretizer make_quantile(std::size_t m, const std::vector<double>& scores) {
    if (m == 0) throw std::invalid_argument("quantile discretizer needs m >= 1");
    if (scores.empty()) throw std::invalid_argument("quantile discretizer needs scores");
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    Discretizer d;
    d.kind = Discretizer::Kind::quantile;
    d.m = m;
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() <= m) {
        // every observed value gets its own cell: d is the identity on them
        d.boundaries.assign(distinct.begin() + 1, distinct.end());
    } else {
        // cut the sorted sample into m near-equal chunks; chunk k starts at
        // the k/m quantile, duplicates collapse
        for (std::size_t k = 1; k < m; ++k) {
            const std::size_t idx = (k * n) / m;
            if (idx >= n) break;
            const double b = sorted[idx];
            if (d.boundaries.empty() || b > d.boundaries.back()) d.boundaries.push_back(b);
        }
        // drop a leading boundary equal to the minimum: its lower cell would be empty
        if (!d.boundaries.empty() && d.boundaries.front() <= sorted.front())
            d.boundaries.erase(d.boundaries.begin());
    }

    const std::size_t cells = d.boundaries.size() + 1;
    std::vector<double> sum(cells, 0.0);
    std::vector<std::size_t> cnt(cells, 0);
    for (double v : sorted) {
        const auto it = std::upper_bound(d.boundaries.begin(), d.boundaries.end(), v);
        const std::size_t c = static_cast<std::size_t>(it - d.boundaries.begin());
        sum[c] += v;
        cnt[c] += 1;
    }
    d.outputs.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        // every cell contains at least its lower boundary value
        d.outputs[c] = sum[c] / static_cast<double>(cnt[c]);
    }
    return d;
}

std::vector<double> apply(const Discretizer& d, const std::vector<double>& scores) {
    std::vector<double> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = d(scores[i]);
    return out;
}

double discretization_error(const CalibrationDataset& ds, const std::vector<double>& pred,
                            const Discretizer& d) {
    if (pred.size() != ds.n) throw std::invalid_argument("prediction length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double a = d(pred[i]) - ds.labels[i];
        const double b = pred[i] - ds.labels[i];
        acc += a * a - b * b;
    }
    return acc / static_cast<double>(pred.size());
}

std::size_t nonempty_range_size(const Discretizer& d, const std::vector<double>& scores) {
    std::vector<double> vals= multical::apply(d, scores);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return vals.size();
}

}  // namespace multical
