#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "deid/error.hpp"
#include "deid/lexicon.hpp"
#include "deid/note.hpp"
#include "deid/text.hpp"
#include "deid/vocab.hpp"

namespace deid {

/// Sorted active feature indices for one token; all features are binary.
using FeatureVector = std::vector<std::uint32_t>;

inline constexpr std::string_view kPadSurface = "<PAD>";

/// Named feature -> dense index. Grows during the training pass; once frozen
/// no new features are added and unknown names simply drop out.
class FeatureTable {
public:
    std::uint32_t add_or_get(const std::string& name) {
        const auto [it, inserted] = index_.emplace(name, static_cast<std::uint32_t>(names_.size()));
        if (inserted) names_.push_back(name);
        return it->second;
    }

    std::optional<std::uint32_t> lookup(const std::string& name) const {
        const auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }
    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    static FeatureTable from_names(std::vector<std::string> names) {
        FeatureTable t;
        for (std::size_t i = 0; i < names.size(); ++i) t.index_.emplace(names[i], static_cast<std::uint32_t>(i));
        t.names_ = std::move(names);
        t.frozen_ = true;
        return t;
    }

private:
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<std::string> names_;
    bool frozen_ = false;
};

/// Word-membership sets for the four dictionary flags. Multi-word surfaces
/// contribute each of their word tokens, case-folded; punctuation-only and
/// digit-only tokens are skipped.
struct Dictionaries {
    std::unordered_set<std::string> male;
    std::unordered_set<std::string> female;
    std::unordered_set<std::string> surname;
    std::unordered_set<std::string> hospital;

    static void add_words(std::unordered_set<std::string>& set, const Lexicon& lex) {
        for (const LexiconEntry& e : lex.entries()) {
            for (const Token& t : tokenize(e.surface)) {
                const bool has_letter = std::any_of(t.text.begin(), t.text.end(), [](unsigned char c) {
                    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c >= 0x80;
                });
                if (has_letter) set.insert(to_lower(t.text));
            }
        }
    }

    static Dictionaries from_lexicons(const LexiconSet& lexicons) {
        Dictionaries d;
        if (lexicons.male_first) add_words(d.male, *lexicons.male_first);
        if (lexicons.female_first) add_words(d.female, *lexicons.female_first);
        if (lexicons.surnames) add_words(d.surname, *lexicons.surnames);
        if (lexicons.hospitals) add_words(d.hospital, *lexicons.hospitals);
        return d;
    }

    /// Gazetteer directory: male.tsv, female.tsv, surnames.tsv,
    /// hospitals.tsv, one surface per line (weights ignored). A missing file
    /// leaves that set empty.
    static Dictionaries load_dir(const std::string& dir) {
        Dictionaries d;
        bool any = false;
        auto try_load = [&](const char* file, std::unordered_set<std::string>& set, LexiconKind kind) {
            const std::string path = dir + "/" + file;
            if (!std::ifstream(path)) return;
            add_words(set, Lexicon::load(path, kind));
            any = true;
        };
        try_load("male.tsv", d.male, LexiconKind::MaleFirst);
        try_load("female.tsv", d.female, LexiconKind::FemaleFirst);
        try_load("surnames.tsv", d.surname, LexiconKind::Surname);
        try_load("hospitals.tsv", d.hospital, LexiconKind::Hospital);
        if (!any) throw IoError("no dictionary files found under " + dir);
        return d;
    }
};

struct ExtractOptions {
    /// Merge the positional context families PREV1..3/NEXT1..3 into single
    /// PREV/NEXT families (the alternative reading of the context features).
    bool merged_context = false;
};

namespace detail {

inline const char* prev_family(std::size_t k, bool merged) {
    static constexpr const char* kPositional[] = {"PREV1:", "PREV2:", "PREV3:"};
    return merged ? "PREV:" : kPositional[k - 1];
}

inline const char* next_family(std::size_t k, bool merged) {
    static constexpr const char* kPositional[] = {"NEXT1:", "NEXT2:", "NEXT3:"};
    return merged ? "NEXT:" : kPositional[k - 1];
}

template <typename Emit>
inline void token_features(const std::vector<Token>& stream, std::size_t i, const Vocabulary* vocab,
                           const Dictionaries& dicts, const ExtractOptions& options, Emit&& emit) {
    const std::string& w = stream[i].text;
    if (!vocab || vocab->contains(w)) emit("CUR:" + w);
    for (std::size_t k = 1; k <= 3; ++k) {
        const std::string& prev = i >= k ? stream[i - k].text : std::string(kPadSurface);
        emit(detail::prev_family(k, options.merged_context) + prev);
        const std::string& next = i + k < stream.size() ? stream[i + k].text : std::string(kPadSurface);
        emit(detail::next_family(k, options.merged_context) + next);
    }
    const std::string folded = to_lower(w);
    if (dicts.male.contains(folded)) emit("DICT_MALE");
    if (dicts.female.contains(folded)) emit("DICT_FEMALE");
    if (dicts.surname.contains(folded)) emit("DICT_SURNAME");
    if (dicts.hospital.contains(folded)) emit("DICT_HOSPITAL");
}

inline void finish(FeatureVector& fv) {
    std::sort(fv.begin(), fv.end());
    fv.erase(std::unique(fv.begin(), fv.end()), fv.end());
}

}  // namespace detail

/// Training-pass extraction: registers new features in `table` as they are
/// seen. The vocabulary gates the CUR family. Context windows are computed
/// over the note-level token stream, so they cross line boundaries; only the
/// start and end of the note are padded.
inline std::vector<FeatureVector> extract_training(const Note& note, const Vocabulary& vocab,
                                                   const Dictionaries& dicts, FeatureTable& table,
                                                   const ExtractOptions& options = {}) {
    if (table.frozen()) throw FrozenTableViolation();
    const std::vector<Token> stream = token_stream(note);
    std::vector<FeatureVector> out(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        FeatureVector& fv = out[i];
        detail::token_features(stream, i, &vocab, dicts, options,
                               [&](const std::string& name) { fv.push_back(table.add_or_get(name)); });
        detail::finish(fv);
    }
    return out;
}

/// Test-time extraction against a fixed table: unknown feature names are
/// dropped, so the table never grows and out-of-vocabulary CUR features
/// simply do not fire.
inline std::vector<FeatureVector> extract_frozen(const Note& note, const Dictionaries& dicts,
                                                 const FeatureTable& table, const ExtractOptions& options = {}) {
    const std::vector<Token> stream = token_stream(note);
    std::vector<FeatureVector> out(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        FeatureVector& fv = out[i];
        detail::token_features(stream, i, nullptr, dicts, options, [&](const std::string& name) {
            if (const std::optional<std::uint32_t> idx = table.lookup(name)) fv.push_back(*idx);
        });
        detail::finish(fv);
    }
    return out;
}

}  // namespace deid
