#include <doctest.h>

#include <string>
#include <vector>

#include "deid/stats.hpp"

using deid::CategoryStats;
using deid::corpus_stats;
using deid::CorpusStats;
using deid::Note;
using deid::render_percent;

TEST_CASE("percent rendering truncates to two decimals") {
    CHECK(render_percent(954, 967) == "98.65%");
    CHECK(render_percent(9860, 131806) == "7.48%");
    // rounding would print 100.00 here; the table style truncates
    CHECK(render_percent(59651, 59652) == "99.99%");
    CHECK(render_percent(133146, 209051) == "63.69%");
    CHECK(render_percent(98, 98) == "100%");
    CHECK(render_percent(0, 0) == "0.00%");
    CHECK(render_percent(0, 5) == "0.00%");
}

TEST_CASE("distribution report renders counts with percentages") {
    CorpusStats stats;
    CategoryStats row;
    row.note_count = 967;
    row.notes_with_phi = 954;
    row.token_count = 131806;
    row.phi_instance_count = 9860;
    stats.per_category["Case Management"] = row;
    stats.totals = row;
    const std::string report = deid::render_stats(stats);
    CHECK(report.find("954 (98.65%)") != std::string::npos);
    CHECK(report.find("9860 (7.48%)") != std::string::npos);
}

TEST_CASE("empty corpus yields all-zero stats") {
    const CorpusStats stats = corpus_stats(std::vector<Note>{});
    CHECK(stats.per_category.empty());
    CHECK(stats.totals == CategoryStats{});
    CHECK(deid::render_stats(stats).find("(0.00%)") != std::string::npos);
}

TEST_CASE("notes_with_phi counts notes having at least one span") {
    Note with;
    with.note_id = "a";
    with.category = "Nursing";
    with.lines = {"PHI_ID_0 here"};
    with.phi_spans.push_back(deid::PhiSpan{0, 0, 8, deid::PhiCategory::Id, ""});
    Note without;
    without.note_id = "b";
    without.category = "Nursing";
    without.lines = {"plain text line"};
    const std::vector<Note> notes = {with, without};
    const CorpusStats stats = corpus_stats(notes);
    CHECK(stats.per_category.at("Nursing").note_count == 2);
    CHECK(stats.per_category.at("Nursing").notes_with_phi == 1);
    CHECK(stats.per_category.at("Nursing").phi_instance_count == 1);
}

TEST_CASE("totals equal brute-force sums") {
    std::vector<Note> notes;
    for (int i = 0; i < 30; ++i) {
        Note n;
        n.note_id = "n" + std::to_string(i);
        n.category = i % 3 == 0 ? "ECG" : (i % 3 == 1 ? "Nursing" : "Echo");
        n.lines = {"alpha beta gamma", "delta"};
        if (i % 2 == 0) {
            n.phi_spans.push_back(deid::PhiSpan{0, 0, 5, deid::PhiCategory::Date, ""});
        }
        notes.push_back(std::move(n));
    }
    const CorpusStats stats = corpus_stats(notes);

    // independent recount
    std::size_t note_count = 0, with_phi = 0, tokens = 0, phi = 0;
    for (const Note& n : notes) {
        ++note_count;
        if (!n.phi_spans.empty()) ++with_phi;
        for (const std::string& line : n.lines) tokens += deid::tokenize(line).size();
        phi += n.phi_spans.size();
    }
    CHECK(stats.totals.note_count == note_count);
    CHECK(stats.totals.notes_with_phi == with_phi);
    CHECK(stats.totals.token_count == tokens);
    CHECK(stats.totals.phi_instance_count == phi);

    CategoryStats summed;
    for (const auto& [name, row] : stats.per_category) summed += row;
    CHECK(summed == stats.totals);
}
