#pragma once

#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "deid/error.hpp"
#include "deid/note.hpp"
#include "deid/text.hpp"

namespace deid {

/// Ordered classification rules for placeholder inner text. Each pattern is a
/// case-insensitive regex applied with regex_search, so a plain word acts as
/// a substring rule. First match wins.
class CategoryMapping {
public:
    void add_rule(const std::string& pattern, PhiCategory category) {
        rules_.push_back(Rule{pattern, std::regex(pattern, std::regex::ECMAScript | std::regex::icase), category});
    }

    std::optional<PhiCategory> classify(const std::string& inner) const {
        for (const Rule& r : rules_)
            if (std::regex_search(inner, r.re)) return r.category;
        return std::nullopt;
    }

    std::size_t rule_count() const { return rules_.size(); }

    /// Built-in table; data/category_mapping.tsv ships the same rules.
    static CategoryMapping defaults() {
        CategoryMapping m;
        m.add_rule("hospital", PhiCategory::Hospital);
        m.add_rule("name", PhiCategory::PatientName);
        m.add_rule("initial", PhiCategory::PatientName);
        m.add_rule("location", PhiCategory::Location);
        m.add_rule("state", PhiCategory::Location);
        m.add_rule("country", PhiCategory::Location);
        m.add_rule("address", PhiCategory::Location);
        m.add_rule("street", PhiCategory::Location);
        m.add_rule("university", PhiCategory::Location);
        m.add_rule(R"(^[0-9]{4}-[0-9]{1,2}-[0-9]{1,2}$)", PhiCategory::Date);
        m.add_rule(R"(^[0-9]{1,2}-[0-9]{1,2}$)", PhiCategory::Date);
        m.add_rule(R"(^[0-9]{1,2}/[0-9]{1,2}(/[0-9]{2,4})?$)", PhiCategory::Date);
        m.add_rule("date", PhiCategory::Date);
        m.add_rule("month", PhiCategory::Date);
        m.add_rule("year", PhiCategory::Date);
        m.add_rule("day", PhiCategory::Date);
        m.add_rule("holiday", PhiCategory::Date);
        m.add_rule(R"(^[0-9]+$)", PhiCategory::Id);
        m.add_rule("identifier", PhiCategory::Id);
        m.add_rule("number", PhiCategory::Id);
        m.add_rule("numeric", PhiCategory::Id);
        m.add_rule("telephone", PhiCategory::Id);
        m.add_rule("fax", PhiCategory::Id);
        m.add_rule("pager", PhiCategory::Id);
        m.add_rule("ssn", PhiCategory::Id);
        m.add_rule("social security", PhiCategory::Id);
        return m;
    }

    /// File format: "PATTERN<TAB>CATEGORY" per line, applied top-down;
    /// "#" starts a comment; blank lines ignored.
    static CategoryMapping load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open mapping file: " + path);
        CategoryMapping m;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            const std::size_t tab = line.find('\t');
            if (tab == std::string::npos)
                throw SchemaError(line_no, "mapping rule needs PATTERN<TAB>CATEGORY");
            const std::string pattern = line.substr(0, tab);
            const std::string cat_name = line.substr(tab + 1);
            const std::optional<PhiCategory> cat = parse_category(cat_name);
            if (!cat) throw SchemaError(line_no, "unknown category \"" + cat_name + "\"");
            m.add_rule(pattern, *cat);
        }
        return m;
    }

private:
    struct Rule {
        std::string pattern;
        std::regex re;
        PhiCategory category;
    };
    std::vector<Rule> rules_;
};

struct ParseWarning {
    std::size_t line_index = 0;
    std::string inner;
    PhiCategory assigned = PhiCategory::Id;
};

namespace detail {

inline std::string sentinel_text(PhiCategory category, std::size_t ordinal) {
    return "PHI_" + std::string(category_name(category)) + "_" + std::to_string(ordinal);
}

}  // namespace detail

/// Parse MIMIC-style "[**...**]" markers out of raw text. Each placeholder is
/// replaced by a single-token sentinel "PHI_<CATEGORY>_<k>" and covered by a
/// PhiSpan recording its category and original inner text. In strict mode an
/// unclassifiable inner text raises UnmappedPlaceholder; in lenient mode it
/// is classified ID and reported through `warnings`.
inline Note parse_placeholders(std::string_view raw_text, const CategoryMapping& mapping, bool strict = true,
                               std::vector<ParseWarning>* warnings = nullptr) {
    Note note;
    std::size_t ordinal = 0;
    std::size_t line_start = 0;
    std::size_t line_index = 0;
    while (line_start <= raw_text.size()) {
        std::size_t nl = raw_text.find('\n', line_start);
        std::string_view raw_line = raw_text.substr(
            line_start, nl == std::string_view::npos ? std::string_view::npos : nl - line_start);
        if (!raw_line.empty() && raw_line.back() == '\r') raw_line.remove_suffix(1);

        std::string out_line;
        std::size_t cursor = 0;  // byte position in raw_line
        std::size_t out_scalars = 0;
        while (true) {
            std::size_t open = raw_line.find("[**", cursor);
            if (open == std::string_view::npos) {
                out_line.append(raw_line.substr(cursor));
                break;
            }
            const std::size_t close = raw_line.find("**]", open + 3);
            if (close == std::string_view::npos)
                throw MalformedPlaceholder(line_index, utf8::length(raw_line.substr(0, open)));
            // Shortest form: re-anchor to the last opener fully before the closer.
            const std::size_t last_open = raw_line.rfind("[**", close - 3);
            if (last_open != std::string_view::npos && last_open > open) open = last_open;

            const std::string_view before = raw_line.substr(cursor, open - cursor);
            out_line.append(before);
            out_scalars += utf8::length(before);

            const std::string inner(raw_line.substr(open + 3, close - (open + 3)));
            std::optional<PhiCategory> category = mapping.classify(inner);
            if (!category) {
                if (strict) throw UnmappedPlaceholder(inner);
                category = PhiCategory::Id;
                if (warnings) warnings->push_back(ParseWarning{line_index, inner, *category});
            }
            const std::string sentinel = detail::sentinel_text(*category, ordinal);
            PhiSpan span;
            span.line_index = line_index;
            span.begin = out_scalars;
            span.end = out_scalars + sentinel.size();  // sentinel is ASCII
            span.category = *category;
            span.inner = inner;
            note.phi_spans.push_back(std::move(span));
            out_line.append(sentinel);
            out_scalars += sentinel.size();
            ++ordinal;
            cursor = close + 3;
        }
        note.lines.push_back(std::move(out_line));
        ++line_index;
        if (nl == std::string_view::npos) break;
        line_start = nl + 1;
    }
    return note;
}

/// Apply placeholder parsing to an existing raw note, keeping its identity.
inline Note parse_note(const Note& raw, const CategoryMapping& mapping, bool strict = true,
                       std::vector<ParseWarning>* warnings = nullptr) {
    std::ostringstream joined;
    for (std::size_t i = 0; i < raw.lines.size(); ++i) {
        if (i) joined << '\n';
        joined << raw.lines[i];
    }
    Note parsed = parse_placeholders(joined.str(), mapping, strict, warnings);
    parsed.note_id = raw.note_id;
    parsed.category = raw.category;
    return parsed;
}

}  // namespace deid
