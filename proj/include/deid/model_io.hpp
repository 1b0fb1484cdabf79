#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "deid/crf.hpp"
#include "deid/error.hpp"
#include "deid/version.hpp"

namespace deid {

namespace detail {

/// Hex-float text keeps every bit of the double, so a reloaded model decodes
/// identically to the saved one.
inline std::string encode_weight(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline double decode_weight(const nlohmann::ordered_json& j) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw CorruptModel("weight must be a hex-float string or number");
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw CorruptModel("unparseable weight \"" + s + "\"");
    return v;
}

}  // namespace detail

inline void save_model(const CrfModel& model, const std::string& path) {
    using json = nlohmann::ordered_json;
    json j;
    j["version"] = kModelFormatVersion;
    j["labels"] = model.labels;
    j["features"] = model.feature_table.names();
    const std::size_t L = model.num_labels();
    json emission = json::array();
    for (std::size_t f = 0; f < model.num_features(); ++f) {
        json row = json::array();
        for (std::size_t y = 0; y < L; ++y) row.push_back(detail::encode_weight(model.emission[f * L + y]));
        emission.push_back(std::move(row));
    }
    j["emission"] = std::move(emission);
    json transition = json::array();
    for (std::size_t p = 0; p < L; ++p) {
        json row = json::array();
        for (std::size_t y = 0; y < L; ++y) row.push_back(detail::encode_weight(model.transition[p * L + y]));
        transition.push_back(std::move(row));
    }
    j["transition"] = std::move(transition);
    j["meta"] = {{"l2_lambda", detail::encode_weight(model.meta.l2_lambda)},
                 {"iterations", model.meta.iterations},
                 {"final_objective", detail::encode_weight(model.meta.final_objective)},
                 {"stopping_reason", model.meta.stopping_reason},
                 {"merged_context", model.meta.merged_context}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << j.dump(1) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline CrfModel load_model(const std::string& path) {
    using json = nlohmann::ordered_json;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw CorruptModel(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("version") || !j["version"].is_number_integer())
        throw CorruptModel("missing version field");
    const int version = j["version"].get<int>();
    if (version != kModelFormatVersion) throw VersionMismatch(version, kModelFormatVersion);
    for (const char* key : {"labels", "features", "emission", "transition"})
        if (!j.contains(key) || !j[key].is_array()) throw CorruptModel(std::string("missing array \"") + key + "\"");

    CrfModel model;
    for (const json& l : j["labels"]) {
        if (!l.is_string()) throw CorruptModel("labels must be strings");
        model.labels.push_back(l.get<std::string>());
    }
    if (model.labels.empty()) throw CorruptModel("empty label set");
    std::vector<std::string> names;
    for (const json& n : j["features"]) {
        if (!n.is_string()) throw CorruptModel("feature names must be strings");
        names.push_back(n.get<std::string>());
    }
    model.feature_table = FeatureTable::from_names(std::move(names));

    const std::size_t L = model.labels.size();
    const std::size_t F = model.feature_table.size();
    if (j["emission"].size() != F) throw CorruptModel("emission row count != feature count");
    model.emission.reserve(F * L);
    for (const json& row : j["emission"]) {
        if (!row.is_array() || row.size() != L) throw CorruptModel("emission row width != label count");
        for (const json& v : row) model.emission.push_back(detail::decode_weight(v));
    }
    if (j["transition"].size() != L) throw CorruptModel("transition row count != label count");
    model.transition.reserve(L * L);
    for (const json& row : j["transition"]) {
        if (!row.is_array() || row.size() != L) throw CorruptModel("transition row width != label count");
        for (const json& v : row) model.transition.push_back(detail::decode_weight(v));
    }
    if (j.contains("meta") && j["meta"].is_object()) {
        const json& meta = j["meta"];
        if (meta.contains("l2_lambda")) model.meta.l2_lambda = detail::decode_weight(meta["l2_lambda"]);
        if (meta.contains("iterations") && meta["iterations"].is_number_integer())
            model.meta.iterations = meta["iterations"].get<int>();
        if (meta.contains("final_objective")) model.meta.final_objective = detail::decode_weight(meta["final_objective"]);
        if (meta.contains("stopping_reason") && meta["stopping_reason"].is_string())
            model.meta.stopping_reason = meta["stopping_reason"].get<std::string>();
        if (meta.contains("merged_context") && meta["merged_context"].is_boolean())
            model.meta.merged_context = meta["merged_context"].get<bool>();
    }
    for (double w : model.emission)
        if (!std::isfinite(w)) throw CorruptModel("non-finite emission weight");
    for (double w : model.transition)
        if (!std::isfinite(w)) throw CorruptModel("non-finite transition weight");
    return model;
}

}  // namespace deid
