#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deid/error.hpp"
#include "deid/note.hpp"

namespace deid {

using json = nlohmann::ordered_json;

namespace detail {

inline json note_to_json(const Note& note) {
    json j;
    j["note_id"] = note.note_id;
    j["category"] = note.category;
    j["lines"] = note.lines;
    json spans = json::array();
    for (const PhiSpan& s : note.phi_spans) {
        json js;
        js["line"] = s.line_index;
        js["begin"] = s.begin;
        js["end"] = s.end;
        js["type"] = std::string(category_name(s.category));
        if (!s.inner.empty()) js["inner"] = s.inner;
        spans.push_back(std::move(js));
    }
    j["phi"] = std::move(spans);
    return j;
}

inline Note note_from_json(const json& j, std::size_t line_number) {
    auto fail = [line_number](const std::string& what) -> SchemaError { return SchemaError(line_number, what); };
    if (!j.is_object()) throw fail("record is not a JSON object");
    if (!j.contains("note_id") || !j["note_id"].is_string()) throw fail("missing or non-string \"note_id\"");
    if (!j.contains("category") || !j["category"].is_string()) throw fail("missing or non-string \"category\"");
    if (!j.contains("lines") || !j["lines"].is_array()) throw fail("missing or non-array \"lines\"");
    if (!j.contains("phi") || !j["phi"].is_array()) throw fail("missing or non-array \"phi\"");
    Note note;
    note.note_id = j["note_id"].get<std::string>();
    note.category = j["category"].get<std::string>();
    for (const json& l : j["lines"]) {
        if (!l.is_string()) throw fail("\"lines\" entries must be strings");
        note.lines.push_back(l.get<std::string>());
    }
    for (const json& js : j["phi"]) {
        if (!js.is_object()) throw fail("\"phi\" entries must be objects");
        for (const char* key : {"line", "begin", "end"})
            if (!js.contains(key) || !js[key].is_number_unsigned()) throw fail(std::string("span needs unsigned \"") + key + "\"");
        if (!js.contains("type") || !js["type"].is_string()) throw fail("span needs string \"type\"");
        PhiSpan s;
        s.line_index = js["line"].get<std::size_t>();
        s.begin = js["begin"].get<std::size_t>();
        s.end = js["end"].get<std::size_t>();
        const std::string type = js["type"].get<std::string>();
        const std::optional<PhiCategory> cat = parse_category(type);
        if (!cat) throw fail("unknown span type \"" + type + "\"");
        s.category = *cat;
        if (js.contains("inner")) {
            if (!js["inner"].is_string()) throw fail("span \"inner\" must be a string");
            s.inner = js["inner"].get<std::string>();
        }
        note.phi_spans.push_back(std::move(s));
    }
    if (const std::optional<std::string> bad = note_invariant_violation(note)) throw fail(*bad);
    return note;
}

}  // namespace detail

/// JSON Lines, one note per line: {"note_id", "category", "lines", "phi"}.
inline void write_corpus(const std::vector<Note>& notes, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const Note& note : notes) out << detail::note_to_json(note).dump() << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline std::vector<Note> read_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<Note> notes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
        }
        notes.push_back(detail::note_from_json(j, line_no));
    }
    return notes;
}

}  // namespace deid
