#include "multical/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace multical {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void JsonWriter::separate() {
    if (after_key_) {
        after_key_ = false;
        return;
    }
    if (!first_.empty()) {
        if (!first_.back()) out_ += ',';
        first_.back() = false;
    }
}

JsonWriter& JsonWriter::begin_object() {
    separate();
    out_ += '{';
    first_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    out_ += '}';
    first_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::begin_array() {
    separate();
    out_ += '[';
    first_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    out_ += ']';
    first_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
    separate();
    out_ += '"';
    out_ += k;
    out_ += "\":";
    after_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(double v) {
    separate();
    out_ += format_double(v);
    return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
    separate();
    out_ += '"';
    for (char c : v) {
        if (c == '"' || c == '\\') out_ += '\\';
        out_ += c;
    }
    out_ += '"';
    return *this;
}

JsonWriter& JsonWriter::value(const char* v) { return value(std::string(v)); }

JsonWriter& JsonWriter::value(bool v) {
    separate();
    out_ += v ? "true" : "false";
    return *this;
}

JsonWriter& JsonWriter::value_uint(std::uint64_t v) {
    separate();
    out_ += std::to_string(v);
    return *this;
}

JsonWriter& JsonWriter::null() {
    separate();
    out_ += "null";
    return *this;
}

JsonWriter& JsonWriter::raw(const std::string& json) {
    separate();
    out_ += json;
    return *this;
}

namespace {

using nlohmann::json;

void write_predicate(JsonWriter& w, const SplitPredicate& p) {
    w.begin_object();
    if (p.kind == SplitPredicate::Kind::threshold) {
        w.key("kind").value("threshold");
        w.key("v").value(p.threshold);
    } else {
        w.key("kind").value("group");
        w.key("i").value_uint(p.group);
    }
    w.end_object();
}

SplitPredicate read_predicate(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "threshold") return SplitPredicate::at_threshold(j.at("v").get<double>());
    if (kind == "group") return SplitPredicate::on_group(j.at("i").get<std::size_t>());
    throw DataError("unknown predicate kind: " + kind);
}

void write_tree(JsonWriter& w, const DepthTwoTree& t) {
    w.begin_object();
    w.key("root");
    write_predicate(w, t.root);
    w.key("left");
    write_predicate(w, t.left);
    w.key("right");
    write_predicate(w, t.right);
    w.key("leaves").begin_array();
    for (double leaf : t.leaves) w.value(leaf);
    w.end_array();
    w.end_object();
}

DepthTwoTree read_tree(const json& j) {
    DepthTwoTree t;
    t.root = read_predicate(j.at("root"));
    t.left = read_predicate(j.at("left"));
    t.right = read_predicate(j.at("right"));
    const auto& leaves = j.at("leaves");
    if (leaves.size() != 4) throw DataError("tree must have 4 leaves");
    for (int i = 0; i < 4; ++i) t.leaves[i] = leaves[i].get<double>();
    return t;
}

void write_ensemble(JsonWriter& w, const EnsemblePredictor& e) {
    w.begin_object();
    w.key("base").value("external");
    w.key("clamp").value(e.clamp);
    w.key("trees").begin_array();
    for (const DepthTwoTree& t : e.trees) write_tree(w, t);
    w.end_array();
    w.key("metadata").begin_object();
    w.key("solver").value(e.metadata.solver);
    w.key("iterations").value_uint(e.metadata.iterations);
    w.key("seed").value_uint(e.metadata.seed);
    w.end_object();
    w.end_object();
}

EnsemblePredictor read_ensemble(const json& j) {
    EnsemblePredictor e;
    e.clamp = j.at("clamp").get<bool>();
    for (const auto& t : j.at("trees")) e.trees.push_back(read_tree(t));
    if (j.contains("metadata")) {
        const auto& m = j.at("metadata");
        e.metadata.solver = m.value("solver", "");
        e.metadata.iterations = m.value("iterations", std::uint64_t{0});
        e.metadata.seed = m.value("seed", std::uint64_t{0});
    }
    return e;
}

}  // namespace

std::string discretizer_to_json(const Discretizer& d) {
    JsonWriter w;
    w.begin_object();
    w.key("kind").value(d.kind_name());
    w.key("m").value_uint(d.m);
    w.key("boundaries").begin_array();
    for (double b : d.boundaries) w.value(b);
    w.end_array();
    w.key("outputs").begin_array();
    for (double o : d.outputs) w.value(o);
    w.end_array();
    w.end_object();
    return w.str();
}

namespace {
Discretizer discretizer_from_parsed(const json& j) {
    Discretizer d;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "grid") d.kind = Discretizer::Kind::grid;
    else if (kind == "quantile") d.kind = Discretizer::Kind::quantile;
    else throw DataError("unknown discretizer kind: " + kind);
    d.m = j.at("m").get<std::size_t>();
    d.boundaries = j.at("boundaries").get<std::vector<double>>();
    d.outputs = j.at("outputs").get<std::vector<double>>();
    return d;
}
}  // namespace

Discretizer discretizer_from_json(const std::string& text) {
    return discretizer_from_parsed(json::parse(text));
}

std::string model_to_json(const CalibratedModel& model, const std::string& config_json) {
    JsonWriter w;
    w.begin_object();
    w.key("kind").value(kind_name(model.kind));
    w.key("config");
    if (config_json.empty()) w.null();
    else w.raw(config_json);
    w.key("discretizer");
    if (model.discretizer) w.raw(discretizer_to_json(*model.discretizer));
    else w.null();
    w.key("payload");
    switch (model.kind) {
        case CalibratorKind::ours:
            write_ensemble(w, std::get<EnsemblePredictor>(model.payload));
            break;
        case CalibratorKind::mcboost: {
            const PatchTable& t = std::get<PatchTable>(model.payload);
            w.begin_object();
            w.key("records").begin_array();
            for (const PatchRecord& r : t.records) {
                w.begin_object();
                w.key("group").value_uint(r.group);
                w.key("level").value(r.level);
                w.key("new_value").value(r.new_value);
                w.end_object();
            }
            w.end_array();
            w.end_object();
            break;
        }
        case CalibratorKind::lsboost: {
            const LsBoostModel& ls = std::get<LsBoostModel>(model.payload);
            w.begin_object();
            w.key("learning_rate").value(ls.learning_rate);
            w.key("rounds").begin_array();
            for (const LsRound& round : ls.rounds) {
                w.begin_array();
                for (const auto& [level, tree] : round.level_trees) {
                    w.begin_object();
                    w.key("level").value(level);
                    w.key("tree");
                    write_tree(w, tree);
                    w.end_object();
                }
                w.end_array();
            }
            w.end_array();
            w.end_object();
            break;
        }
        case CalibratorKind::multiaccurate: {
            const LinearModel& lm = std::get<LinearModel>(model.payload);
            w.begin_object();
            w.key("intercept").value(lm.intercept);
            w.key("weights").begin_array();
            for (double x : lm.weights) w.value(x);
            w.end_array();
            w.key("lambda").value(lm.lambda);
            w.end_object();
            break;
        }
    }
    w.end_object();
    return w.str();
}

CalibratedModel model_from_json(const std::string& text) {
    const json j = json::parse(text);
    CalibratedModel model;
    model.kind = kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("discretizer") && !j.at("discretizer").is_null())
        model.discretizer = discretizer_from_parsed(j.at("discretizer"));
    const json& p = j.at("payload");
    switch (model.kind) {
        case CalibratorKind::ours:
            model.payload = read_ensemble(p);
            break;
        case CalibratorKind::mcboost: {
            PatchTable t;
            for (const auto& r : p.at("records"))
                t.records.push_back(PatchRecord{r.at("group").get<std::size_t>(),
                                                r.at("level").get<double>(),
                                                r.at("new_value").get<double>()});
            model.payload = std::move(t);
            break;
        }
        case CalibratorKind::lsboost: {
            LsBoostModel ls;
            ls.learning_rate = p.at("learning_rate").get<double>();
            for (const auto& round : p.at("rounds")) {
                LsRound rec;
                for (const auto& entry : round)
                    rec.level_trees.emplace_back(entry.at("level").get<double>(),
                                                 read_tree(entry.at("tree")));
                ls.rounds.push_back(std::move(rec));
            }
            model.payload = std::move(ls);
            break;
        }
        case CalibratorKind::multiaccurate: {
            LinearModel lm;
            lm.intercept = p.at("intercept").get<double>();
            lm.weights = p.at("weights").get<std::vector<double>>();
            lm.lambda = p.at("lambda").get<double>();
            model.payload = std::move(lm);
            break;
        }
    }
    if ((model.kind == CalibratorKind::mcboost || model.kind == CalibratorKind::lsboost) &&
        !model.discretizer)
        throw DataError("model kind requires a discretizer");
    return model;
}

void save_model(const std::string& path, const CalibratedModel& model,
                const std::string& config_json) {
    write_text_file(path, model_to_json(model, config_json) + "\n");
}

CalibratedModel load_model(const std::string& path) {
    return model_from_json(read_text_file(path));
}

std::string report_to_json(const EvaluationReport& rep, const std::string& method) {
    JsonWriter w;
    w.begin_object();
    w.key("method").value(method);
    w.key("m").value_uint(rep.m);
    w.key("nonempty_range").value_uint(rep.nonempty_range);
    w.key("squared_loss").value(rep.squared_loss);
    w.key("mc_error").value(rep.mc_error);
    w.key("worst_group_index").value_uint(rep.worst_group_index);
    w.key("per_group_mc").begin_array();
    for (double x : rep.per_group_mc) w.value(x);
    w.end_array();
    w.key("multiaccuracy_error").value(rep.multiaccuracy_error);
    w.key("worst_group_binned_ece").value(rep.worst_group_binned_ece);
    w.key("ece_bins").value_uint(rep.ece_bins);
    w.key("epsilon_round").value(rep.epsilon_round);
    w.end_object();
    return w.str();
}

std::string report_csv_header() {
    return "method,m,nonempty_range,mc_error,squared_loss,epsilon_round,"
           "worst_group_binned_ece,multiaccuracy_error";
}

std::string report_to_csv_row(const EvaluationReport& rep, const std::string& method) {
    std::string row = method;
    row += ',' + std::to_string(rep.m);
    row += ',' + std::to_string(rep.nonempty_range);
    row += ',' + format_double(rep.mc_error);
    row += ',' + format_double(rep.squared_loss);
    row += ',' + format_double(rep.epsilon_round);
    row += ',' + format_double(rep.worst_group_binned_ece);
    row += ',' + format_double(rep.multiaccuracy_error);
    return row;
}

std::string trace_to_jsonl(const FitTrace& trace) {
    std::string out;
    for (const FitTraceRecord& rec : trace.records) {
        JsonWriter w;
        w.begin_object();
        w.key("iteration").value_uint(rec.iteration);
        w.key("train_loss").value(rec.train_loss);
        if (!std::isnan(rec.holdout_loss)) w.key("holdout_loss").value(rec.holdout_loss);
        w.key("split").value(rec.split);
        if (!std::isnan(rec.edge)) {
            w.key("edge").value(rec.edge);
            w.key("alpha").value(rec.alpha);
            w.key("variance_before").value(rec.variance_before);
            w.key("variance_after").value(rec.variance_after);
        }
        w.end_object();
        out += w.str();
        out += '\n';
    }
    JsonWriter w;
    w.begin_object();
    w.key("stop_reason").value(trace.stop_reason);
    w.key("best_iteration").value_uint(trace.best_iteration);
    w.end_object();
    out += w.str();
    out += '\n';
    return out;
}

std::string saturation_to_json(const SaturationReport& rep, const BoundCheck* check) {
    JsonWriter w;
    w.begin_object();
    w.key("loss_f0").value(rep.loss_f0);
    w.key("loss_fcal").value(rep.loss_fcal);
    w.key("loss_second_pass").value(rep.loss_second_pass);
    w.key("epsilon_hat_loss").value(rep.epsilon_hat_loss);
    w.key("threshold").value(rep.threshold);
    w.key("passes").value(rep.passes);
    if (check) {
        w.key("bound_check").begin_object();
        w.key("mc_error").value(check->mc_error);
        w.key("epsilon_hat_loss").value(check->epsilon_hat_loss);
        w.key("epsilon_round").value(check->epsilon_round);
        w.key("bound").value(check->bound);
        w.key("slack").value(check->slack);
        w.key("satisfied").value(check->satisfied);
        w.end_object();
    }
    w.end_object();
    return w.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace multical
