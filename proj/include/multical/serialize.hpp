#pragma once

#include <string>
#include <vector>

#include "multical/audit.hpp"
#include "multical/boosting.hpp"
#include "multical/calibrators.hpp"
#include "multical/discretize.hpp"
#include "multical/metrics.hpp"

namespace multical {

// Minimal JSON emitter with fixed field order and doubles rendered at 17
// significant digits, so written models reload bit-faithfully and reruns
// produce byte-identical files.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const std::string& k);
    JsonWriter& value(double v);
    JsonWriter& value(const std::string& v);
    JsonWriter& value(const char* v);
    JsonWriter& value(bool v);
    JsonWriter& value_uint(std::uint64_t v);
    JsonWriter& null();
    JsonWriter& raw(const std::string& json);

    const std::string& str() const { return out_; }

private:
    void separate();
    std::string out_;
    std::vector<bool> first_;
    bool after_key_ = false;
};

std::string format_double(double v);

std::string discretizer_to_json(const Discretizer& d);
Discretizer discretizer_from_json(const std::string& json);

// Model envelope: {"kind": ..., "config": ..., "discretizer": ..., "payload": ...}
std::string model_to_json(const CalibratedModel& model, const std::string& config_json = "");
CalibratedModel model_from_json(const std::string& json);
void save_model(const std::string& path, const CalibratedModel& model,
                const std::string& config_json = "");
CalibratedModel load_model(const std::string& path);

std::string report_to_json(const EvaluationReport& rep, const std::string& method);
std::string report_csv_header();
std::string report_to_csv_row(const EvaluationReport& rep, const std::string& method);

// One JSON object per line, then a summary line with the stop reason.
std::string trace_to_jsonl(const FitTrace& trace);

std::string saturation_to_json(const SaturationReport& rep, const BoundCheck* check = nullptr);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace multical
