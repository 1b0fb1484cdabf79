#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "deid/error.hpp"
#include "deid/rng.hpp"

namespace deid {

enum class LexiconKind { MaleFirst, FemaleFirst, Surname, Hospital, City };

struct LexiconEntry {
    std::string surface;
    double weight = 1.0;
};

/// Weighted surrogate vocabulary. Entries keep input order; sampling draws
/// entry i with probability weight_i / sum(weights).
class Lexicon {
public:
    static Lexicon from_entries(std::vector<LexiconEntry> entries, LexiconKind kind, const std::string& where = "") {
        if (entries.empty()) throw EmptyLexicon(where.empty() ? "<inline>" : where);
        Lexicon lex;
        lex.kind_ = kind;
        lex.entries_ = std::move(entries);
        std::unordered_set<std::string> seen;
        double total = 0.0;
        for (std::size_t i = 0; i < lex.entries_.size(); ++i) {
            const LexiconEntry& e = lex.entries_[i];
            if (!(e.weight > 0.0))
                throw NonPositiveWeight(i + 1, "weight must be > 0 for \"" + e.surface + "\"");
            if (!seen.insert(e.surface).second) throw DuplicateSurface(i + 1, e.surface);
            total += e.weight;
            lex.cumulative_.push_back(total);
        }
        lex.total_weight_ = total;
        return lex;
    }

    /// TSV loader: "surface<TAB>weight" per line, weight optional (1.0).
    static Lexicon load(const std::string& path, LexiconKind kind) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open lexicon file: " + path);
        std::vector<LexiconEntry> entries;
        std::unordered_set<std::string> seen;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            LexiconEntry entry;
            const std::size_t tab = line.find('\t');
            if (tab == std::string::npos) {
                entry.surface = line;
            } else {
                entry.surface = line.substr(0, tab);
                const std::string weight_text = line.substr(tab + 1);
                char* end = nullptr;
                entry.weight = std::strtod(weight_text.c_str(), &end);
                if (end == weight_text.c_str() || *end != '\0')
                    throw NonPositiveWeight(line_no, "unparseable weight \"" + weight_text + "\"");
            }
            if (!(entry.weight > 0.0) || !std::isfinite(entry.weight))
                throw NonPositiveWeight(line_no, "weight must be > 0, got \"" + line.substr(tab + 1) + "\"");
            if (!seen.insert(entry.surface).second) throw DuplicateSurface(line_no, entry.surface);
            entries.push_back(std::move(entry));
        }
        if (entries.empty()) throw EmptyLexicon(path);
        Lexicon lex;
        lex.kind_ = kind;
        lex.entries_ = std::move(entries);
        double total = 0.0;
        for (const LexiconEntry& e : lex.entries_) {
            total += e.weight;
            lex.cumulative_.push_back(total);
        }
        lex.total_weight_ = total;
        return lex;
    }

    const std::string& sample(SplitMix64& rng) const {
        const double u = rng.next_double() * total_weight_;
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const std::size_t i = it == cumulative_.end() ? cumulative_.size() - 1 : std::size_t(it - cumulative_.begin());
        return entries_[i].surface;
    }

    const std::vector<LexiconEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    LexiconKind kind() const { return kind_; }
    double total_weight() const { return total_weight_; }

private:
    Lexicon() = default;
    std::vector<LexiconEntry> entries_;
    std::vector<double> cumulative_;
    double total_weight_ = 0.0;
    LexiconKind kind_ = LexiconKind::Hospital;
};

/// The lexicons a surrogate run may need. Fixed file names under one
/// directory: male_first.tsv, female_first.tsv, surnames.tsv, hospitals.tsv,
/// hospital_cities.tsv (the last one optional, used for LOCATION).
struct LexiconSet {
    std::optional<Lexicon> male_first;
    std::optional<Lexicon> female_first;
    std::optional<Lexicon> surnames;
    std::optional<Lexicon> hospitals;
    std::optional<Lexicon> cities;

    static LexiconSet load_dir(const std::string& dir) {
        auto try_load = [&dir](const char* file, LexiconKind kind) -> std::optional<Lexicon> {
            const std::string path = dir + "/" + file;
            if (!std::ifstream(path)) return std::nullopt;
            return Lexicon::load(path, kind);
        };
        LexiconSet set;
        set.male_first = try_load("male_first.tsv", LexiconKind::MaleFirst);
        set.female_first = try_load("female_first.tsv", LexiconKind::FemaleFirst);
        set.surnames = try_load("surnames.tsv", LexiconKind::Surname);
        set.hospitals = try_load("hospitals.tsv", LexiconKind::Hospital);
        set.cities = try_load("hospital_cities.tsv", LexiconKind::City);
        return set;
    }
};

}  // namespace deid
