#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "deid/error.hpp"
#include "deid/lexicon.hpp"
#include "deid/note.hpp"
#include "deid/rng.hpp"
#include "deid/text.hpp"

namespace deid {

/// Reproducibility contract for a synthesis run: identical (seed, corpus,
/// lexicons, plan) gives an identical output corpus.
struct SurrogatePlan {
    std::uint64_t seed = 0;
    /// Reuse one surrogate for spans whose original placeholder inner texts
    /// are identical within a note. Off by default.
    bool consistency_mode = false;
    int date_year_min = 1990;
    int date_year_max = 2014;
    int id_max_digits = 7;
};

/// A synthetically identified note plus its gold token labels, one label per
/// token of the note's token stream.
struct LabeledNote {
    Note note;
    std::vector<int> token_labels;

    friend bool operator==(const LabeledNote&, const LabeledNote&) = default;
};

inline LabeledNote make_labeled(Note note) {
    LabeledNote ln;
    ln.token_labels = derive_token_labels(note);
    ln.note = std::move(note);
    return ln;
}

namespace detail {

inline int days_in_month(int year, int month) {
    static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) return 29;
    return kDays[month - 1];
}

}  // namespace detail

/// Sample one surrogate surface for a PHI category.
///   PATIENT_NAME  "<First> <Surname>", first-name list male/female with
///                 probability 1/2 each, names weight-proportional
///   HOSPITAL      one draw from the hospital lexicon
///   DATE          "YYYY-M-D", unpadded, calendar-valid
///   ID            1..7 digit decimal string
///   LOCATION      one draw from the city list, else the literal "Boston"
inline std::string make_surrogate(PhiCategory category, const LexiconSet& lexicons, SplitMix64& rng,
                                  const SurrogatePlan& plan = {}) {
    switch (category) {
        case PhiCategory::PatientName: {
            if (!lexicons.male_first || !lexicons.female_first || !lexicons.surnames)
                throw MissingLexicon(std::string(category_name(category)));
            const bool male = rng.next_below(2) == 0;
            const std::string& first = (male ? *lexicons.male_first : *lexicons.female_first).sample(rng);
            const std::string& last = lexicons.surnames->sample(rng);
            return first + " " + last;
        }
        case PhiCategory::Hospital: {
            if (!lexicons.hospitals) throw MissingLexicon(std::string(category_name(category)));
            return lexicons.hospitals->sample(rng);
        }
        case PhiCategory::Date: {
            const int year = static_cast<int>(rng.next_in(plan.date_year_min, plan.date_year_max));
            const int month = static_cast<int>(rng.next_in(1, 12));
            const int day = static_cast<int>(rng.next_in(1, detail::days_in_month(year, month)));
            return std::to_string(year) + "-" + std::to_string(month) + "-" + std::to_string(day);
        }
        case PhiCategory::Id: {
            const std::size_t digits = static_cast<std::size_t>(rng.next_in(1, plan.id_max_digits));
            std::string id;
            id.reserve(digits);
            for (std::size_t i = 0; i < digits; ++i) id.push_back(static_cast<char>('0' + rng.next_below(10)));
            return id;
        }
        case PhiCategory::Location: {
            if (lexicons.cities) return lexicons.cities->sample(rng);
            return "Boston";
        }
    }
    throw IndexOutOfRange("unknown PHI category");
}

/// Replace every sentinel span with a sampled surrogate, shifting later
/// offsets on the same line, and recompute gold token labels. Spans keep
/// their categories; the `inner` provenance field is cleared on output.
inline LabeledNote synthesize_note(const Note& note, const SurrogatePlan& plan, const LexiconSet& lexicons) {
    SplitMix64 rng = note_stream(plan.seed, note.note_id);
    Note out = note;
    std::map<std::string, std::string> reuse;  // inner text -> surrogate
    std::ptrdiff_t shift = 0;
    std::size_t current_line = static_cast<std::size_t>(-1);
    for (PhiSpan& span : out.phi_spans) {
        if (span.line_index != current_line) {
            current_line = span.line_index;
            shift = 0;
        }
        std::string surrogate;
        if (plan.consistency_mode && !span.inner.empty()) {
            if (const auto it = reuse.find(span.inner); it != reuse.end()) {
                surrogate = it->second;
            } else {
                surrogate = make_surrogate(span.category, lexicons, rng, plan);
                reuse.emplace(span.inner, surrogate);
            }
        } else {
            surrogate = make_surrogate(span.category, lexicons, rng, plan);
        }
        const std::size_t begin = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(span.begin) + shift);
        const std::size_t end = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(span.end) + shift);
        const std::size_t surrogate_len = utf8::length(surrogate);
        out.lines[span.line_index] = utf8::splice(out.lines[span.line_index], begin, end, surrogate);
        span.begin = begin;
        span.end = begin + surrogate_len;
        shift += static_cast<std::ptrdiff_t>(surrogate_len) - static_cast<std::ptrdiff_t>(end - begin);
        span.inner.clear();
    }
    return make_labeled(std::move(out));
}

/// Per-note RNG streams are derived from (seed, note_id), so input order
/// does not affect any note's output; notes may be processed in parallel.
inline std::vector<LabeledNote> synthesize_corpus(std::span<const Note> notes, const SurrogatePlan& plan,
                                                  const LexiconSet& lexicons) {
    std::vector<LabeledNote> out;
    out.reserve(notes.size());
    for (const Note& note : notes) out.push_back(synthesize_note(note, plan, lexicons));
    return out;
}

}  // namespace deid
