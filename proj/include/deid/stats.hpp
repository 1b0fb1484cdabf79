#pragma once

#include <cstdint>
#include <iomanip>
#include <map>
#include <span>
#include <sstream>
#include <string>

#include "deid/note.hpp"

namespace deid {

struct CategoryStats {
    std::size_t note_count = 0;
    std::size_t notes_with_phi = 0;
    std::size_t token_count = 0;
    std::size_t phi_instance_count = 0;

    CategoryStats& operator+=(const CategoryStats& o) {
        note_count += o.note_count;
        notes_with_phi += o.notes_with_phi;
        token_count += o.token_count;
        phi_instance_count += o.phi_instance_count;
        return *this;
    }
    friend bool operator==(const CategoryStats&, const CategoryStats&) = default;
};

/// Corpus distribution by note category, plus a totals row equal to the
/// column sums.
struct CorpusStats {
    std::map<std::string, CategoryStats> per_category;  // sorted by category name
    CategoryStats totals;
};

inline CorpusStats corpus_stats(std::span<const Note> notes) {
    CorpusStats stats;
    for (const Note& note : notes) {
        CategoryStats& row = stats.per_category[note.category];
        row.note_count += 1;
        if (!note.phi_spans.empty()) row.notes_with_phi += 1;
        for (const std::string& line : note.lines) row.token_count += tokenize(line).size();
        row.phi_instance_count += note.phi_spans.size();
    }
    for (const auto& [name, row] : stats.per_category) stats.totals += row;
    return stats;
}

/// Percentage truncated (not rounded) to two decimals; an exact whole ratio
/// prints "100%", a zero denominator prints "0.00%". Integer arithmetic only.
inline std::string render_percent(std::size_t count, std::size_t total) {
    if (total == 0) return "0.00%";
    if (count == total) return "100%";
    const std::uint64_t basis = static_cast<std::uint64_t>(count) * 10000u / total;
    std::ostringstream out;
    out << basis / 100 << '.' << std::setw(2) << std::setfill('0') << basis % 100 << '%';
    return out.str();
}

/// Plain-text distribution table: category, note counts, notes containing
/// PHI, token counts, PHI instances, with percentages of the row totals.
inline std::string render_stats(const CorpusStats& stats) {
    std::ostringstream out;
    auto row = [&out](const std::string& name, const CategoryStats& r) {
        out << std::left << std::setw(22) << name << std::right << std::setw(10) << r.note_count << std::setw(10)
            << r.notes_with_phi << " (" << render_percent(r.notes_with_phi, r.note_count) << ")" << std::setw(12)
            << r.token_count << std::setw(10) << r.phi_instance_count << " ("
            << render_percent(r.phi_instance_count, r.token_count) << ")\n";
    };
    out << std::left << std::setw(22) << "Category" << std::right << std::setw(10) << "Notes" << std::setw(10)
        << "With PHI" << std::setw(12 + 10) << "Tokens" << std::setw(10) << "PHI" << '\n';
    for (const auto& [name, r] : stats.per_category) row(name, r);
    row("Total", stats.totals);
    return out.str();
}

}  // namespace deid
