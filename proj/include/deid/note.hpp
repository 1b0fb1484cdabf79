#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deid/text.hpp"

namespace deid {

/// The five PHI categories handled by the pipeline.
enum class PhiCategory { PatientName, Hospital, Location, Date, Id };

inline constexpr std::size_t kNumPhiCategories = 5;

/// Tag label set: O first (index 0), then the PHI categories in fixed order.
inline constexpr std::size_t kNumLabels = kNumPhiCategories + 1;
inline constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "O", "PATIENT_NAME", "HOSPITAL", "LOCATION", "DATE", "ID"};

inline constexpr int kLabelO = 0;

inline constexpr int label_of(PhiCategory c) { return static_cast<int>(c) + 1; }

inline constexpr std::string_view category_name(PhiCategory c) { return kLabelNames[label_of(c)]; }

inline std::optional<PhiCategory> parse_category(std::string_view name) {
    for (std::size_t i = 1; i < kNumLabels; ++i)
        if (kLabelNames[i] == name) return static_cast<PhiCategory>(i - 1);
    return std::nullopt;
}

inline std::optional<int> parse_label(std::string_view name) {
    for (std::size_t i = 0; i < kNumLabels; ++i)
        if (kLabelNames[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

inline std::vector<std::string> standard_labels() {
    return std::vector<std::string>(kLabelNames.begin(), kLabelNames.end());
}

/// A PHI annotation over one line of a note. Offsets count Unicode scalars.
/// `inner` optionally preserves the original placeholder inner text (used by
/// the surrogate consistency mode); empty when unknown.
struct PhiSpan {
    std::size_t line_index = 0;
    std::size_t begin = 0;  // inclusive
    std::size_t end = 0;    // exclusive
    PhiCategory category = PhiCategory::Id;
    std::string inner;

    friend bool operator==(const PhiSpan&, const PhiSpan&) = default;
};

/// One clinical document with standoff PHI spans, non-overlapping and sorted
/// by (line_index, begin).
struct Note {
    std::string note_id;
    std::string category;  // note type, e.g. "Discharge summary"
    std::vector<std::string> lines;
    std::vector<PhiSpan> phi_spans;

    friend bool operator==(const Note&, const Note&) = default;
};

/// Per-line token lists concatenated in line order; context windows read
/// across line boundaries downstream, so this is the unit of sequence.
inline std::vector<Token> token_stream(const Note& note) {
    std::vector<Token> stream;
    for (std::size_t li = 0; li < note.lines.size(); ++li) {
        std::vector<Token> ts = tokenize(note.lines[li], li);
        stream.insert(stream.end(), std::make_move_iterator(ts.begin()), std::make_move_iterator(ts.end()));
    }
    return stream;
}

/// Token labels from span overlap: a token overlapping a span carries that
/// span's category (first overlapping span wins), all others O.
inline std::vector<int> derive_token_labels(const Note& note) {
    std::vector<int> labels;
    std::size_t span_cursor = 0;
    for (std::size_t li = 0; li < note.lines.size(); ++li) {
        while (span_cursor < note.phi_spans.size() && note.phi_spans[span_cursor].line_index < li) ++span_cursor;
        std::size_t s = span_cursor;
        for (const Token& t : tokenize(note.lines[li], li)) {
            while (s < note.phi_spans.size() && note.phi_spans[s].line_index == li && note.phi_spans[s].end <= t.begin)
                ++s;
            int label = kLabelO;
            if (s < note.phi_spans.size() && note.phi_spans[s].line_index == li && note.phi_spans[s].begin < t.end)
                label = label_of(note.phi_spans[s].category);
            labels.push_back(label);
        }
    }
    return labels;
}

/// Structural check used by corpus readers; returns a description of the
/// first violated invariant, or nullopt when the note is well-formed.
inline std::optional<std::string> note_invariant_violation(const Note& note) {
    std::vector<std::size_t> line_lengths;
    line_lengths.reserve(note.lines.size());
    for (const std::string& line : note.lines) line_lengths.push_back(utf8::length(line));
    const PhiSpan* prev = nullptr;
    for (const PhiSpan& s : note.phi_spans) {
        if (s.begin >= s.end) return "span begin must be < end";
        if (s.line_index >= note.lines.size()) return "span line_index out of range";
        if (s.end > line_lengths[s.line_index]) return "span extends past end of line";
        if (prev) {
            if (s.line_index < prev->line_index ||
                (s.line_index == prev->line_index && s.begin < prev->end))
                return "spans must be sorted by (line, begin) and non-overlapping";
        }
        prev = &s;
    }
    return std::nullopt;
}

}  // namespace deid
