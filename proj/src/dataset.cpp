#include "multical/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "multical/rng.hpp"

namespace multical {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_number(const std::string& text, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r')) --last;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw DataError("row " + std::to_string(row) + ", column " + column +
                        ": not a number: '" + text + "'");
    }
    if (!std::isfinite(value)) {
        throw DataError("row " + std::to_string(row) + ", column " + column +
                        ": non-finite value");
    }
    return value;
}

}  // namespace

void CalibrationDataset::validate() const {
    if (n < 1) throw DataError("dataset has no rows");
    if (num_groups < 1) throw DataError("dataset has no groups");
    if (base_scores.size() != n || labels.size() != n || groups.size() != num_groups * n)
        throw DataError("dataset column sizes disagree");
    for (std::size_t r = 0; r < n; ++r) {
        if (!(base_scores[r] >= 0.0 && base_scores[r] <= 1.0))
            throw DataError("base score out of range at row " + std::to_string(r));
        if (!(labels[r] >= 0.0 && labels[r] <= 1.0))
            throw DataError("label out of range at row " + std::to_string(r));
    }
    for (std::uint8_t v : groups)
        if (v != 0 && v != 1) throw DataError("group value not binary");
}

CalibrationDataset make_dataset(std::vector<double> base_scores,
                                std::vector<std::vector<std::uint8_t>> groups,
                                std::vector<double> labels,
                                std::vector<std::string> group_names) {
    CalibrationDataset ds;
    ds.n = base_scores.size();
    ds.num_groups = groups.size();
    ds.base_scores = std::move(base_scores);
    ds.labels = std::move(labels);
    ds.groups.reserve(ds.num_groups * ds.n);
    for (const auto& g : groups) {
        if (g.size() != ds.n) throw DataError("group column size mismatch");
        ds.groups.insert(ds.groups.end(), g.begin(), g.end());
    }
    if (group_names.empty()) {
        for (std::size_t i = 0; i < ds.num_groups; ++i)
            group_names.push_back("g_" + std::to_string(i));
    }
    ds.group_names = std::move(group_names);
    ds.group_empty.assign(ds.num_groups, 1);
    for (std::size_t i = 0; i < ds.num_groups; ++i)
        for (std::size_t r = 0; r < ds.n; ++r)
            if (ds.group_member(i, r)) { ds.group_empty[i] = 0; break; }
    ds.validate();
    return ds;
}

CalibrationDataset load_csv(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split_line(line);
    int y_col = -1, f0_col = -1;
    std::vector<int> group_cols;
    std::vector<std::string> group_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "y") y_col = static_cast<int>(c);
        else if (header[c] == "f0") f0_col = static_cast<int>(c);
        else if (header[c].rfind("g_", 0) == 0) {
            group_cols.push_back(static_cast<int>(c));
            group_names.push_back(header[c]);
        } else if (warnings) {
            warnings->push_back("ignoring column '" + header[c] + "'");
        }
    }
    if (y_col < 0) throw DataError("missing required column 'y'");
    if (f0_col < 0) throw DataError("missing required column 'f0'");
    if (group_cols.empty()) throw DataError("no group columns (prefix 'g_') found");

    CalibrationDataset ds;
    ds.num_groups = group_cols.size();
    ds.group_names = group_names;
    std::vector<std::vector<std::uint8_t>> cols(ds.num_groups);

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size())
            throw DataError("row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        const double y = parse_number(fields[y_col], row, "y");
        if (y < 0.0 || y > 1.0)
            throw DataError("label out of range at row " + std::to_string(row));
        const double f0 = parse_number(fields[f0_col], row, "f0");
        if (f0 < 0.0 || f0 > 1.0)
            throw DataError("base score out of range at row " + std::to_string(row));
        ds.labels.push_back(y);
        ds.base_scores.push_back(f0);
        for (std::size_t i = 0; i < group_cols.size(); ++i) {
            const double g = parse_number(fields[group_cols[i]], row, header[group_cols[i]]);
            if (g != 0.0 && g != 1.0)
                throw DataError("group value not binary at row " + std::to_string(row) +
                                ", column " + header[group_cols[i]]);
            cols[i].push_back(g == 1.0 ? 1 : 0);
        }
    }
    if (row == 0) throw DataError("no data rows in " + path);
    ds.n = row;
    ds.groups.reserve(ds.num_groups * ds.n);
    for (const auto& col : cols) ds.groups.insert(ds.groups.end(), col.begin(), col.end());
    ds.group_empty.assign(ds.num_groups, 1);
    for (std::size_t i = 0; i < ds.num_groups; ++i) {
        for (std::size_t r = 0; r < ds.n; ++r)
            if (ds.group_member(i, r)) { ds.group_empty[i] = 0; break; }
        if (ds.group_empty[i] && warnings)
            warnings->push_back("group '" + ds.group_names[i] + "' has no member rows");
    }
    ds.validate();
    return ds;
}

void write_csv(const std::string& path, const CalibrationDataset& ds) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << "y,f0";
    for (const auto& name : ds.group_names) out << ',' << name;
    out << '\n';
    char buf[64];
    for (std::size_t r = 0; r < ds.n; ++r) {
        std::snprintf(buf, sizeof(buf), "%.17g", ds.labels[r]);
        out << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", ds.base_scores[r]);
        out << ',' << buf;
        for (std::size_t i = 0; i < ds.num_groups; ++i)
            out << ',' << (ds.group_member(i, r) ? '1' : '0');
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

CalibrationDataset take_rows(const CalibrationDataset& ds, const std::vector<std::size_t>& rows) {
    CalibrationDataset out;
    out.n = rows.size();
    out.num_groups = ds.num_groups;
    out.group_names = ds.group_names;
    out.base_scores.reserve(out.n);
    out.labels.reserve(out.n);
    for (std::size_t r : rows) {
        out.base_scores.push_back(ds.base_scores[r]);
        out.labels.push_back(ds.labels[r]);
    }
    out.groups.resize(out.num_groups * out.n);
    for (std::size_t i = 0; i < out.num_groups; ++i) {
        const std::uint8_t* col = ds.group_column(i);
        for (std::size_t k = 0; k < rows.size(); ++k) out.groups[i * out.n + k] = col[rows[k]];
    }
    out.group_empty.assign(out.num_groups, 1);
    for (std::size_t i = 0; i < out.num_groups; ++i)
        for (std::size_t r = 0; r < out.n; ++r)
            if (out.group_member(i, r)) { out.group_empty[i] = 0; break; }
    return out;
}

std::pair<CalibrationDataset, CalibrationDataset> split_holdout(const CalibrationDataset& ds,
                                                                const SplitSpec& spec) {
    if (ds.n < 2) throw std::invalid_argument("split_holdout needs at least 2 rows");
    if (!(spec.holdout_fraction > 0.0 && spec.holdout_fraction < 1.0))
        throw std::invalid_argument("holdout fraction must be in (0,1)");
    const std::size_t n_holdout =
        static_cast<std::size_t>(std::floor(spec.holdout_fraction * static_cast<double>(ds.n)));
    std::vector<std::size_t> order(ds.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    StreamRng rng(spec.seed, /*stream=*/0x51u);
    rng.shuffle(order.data(), order.size());
    std::vector<std::size_t> holdout(order.begin(), order.begin() + n_holdout);
    std::vector<std::size_t> train(order.begin() + n_holdout, order.end());
    // keep original row order within each part
    std::sort(train.begin(), train.end());
    std::sort(holdout.begin(), holdout.end());
    return {take_rows(ds, train), take_rows(ds, holdout)};
}

}  // namespace multical
