#include <doctest.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "deid/corpus_io.hpp"
#include "deid/corpusgen.hpp"
#include "deid/placeholder.hpp"
#include "deid/stats.hpp"

using deid::GenConfig;
using deid::generate_corpus;
using deid::Note;
using deid::TemplateBank;

TEST_CASE("zero notes yields an empty corpus") {
    GenConfig config;
    config.note_count = 0;
    CHECK(generate_corpus(config).empty());
}

TEST_CASE("generation is deterministic for a fixed config") {
    GenConfig config;
    config.seed = 99;
    config.note_count = 50;
    const std::vector<Note> a = generate_corpus(config);
    const std::vector<Note> b = generate_corpus(config);
    CHECK(a == b);
}

TEST_CASE("every generated placeholder parses cleanly in strict mode") {
    GenConfig config;
    config.seed = 3;
    config.note_count = 200;
    const deid::CategoryMapping mapping = deid::CategoryMapping::defaults();
    for (const Note& raw : generate_corpus(config)) {
        const Note parsed = deid::parse_note(raw, mapping, /*strict=*/true);
        CHECK(!deid::note_invariant_violation(parsed).has_value());
    }
}

TEST_CASE("realized density lands near the configured value") {
    GenConfig config;
    config.seed = 17;
    config.note_count = 1000;
    config.density_per_100 = 2.5;
    const deid::CategoryMapping mapping = deid::CategoryMapping::defaults();
    std::vector<Note> parsed;
    for (const Note& raw : generate_corpus(config)) parsed.push_back(deid::parse_note(raw, mapping));
    const deid::CorpusStats stats = corpus_stats(parsed);
    const double rate = 100.0 * double(stats.totals.phi_instance_count) / double(stats.totals.token_count);
    CHECK(rate > 2.0);
    CHECK(rate < 3.0);
}

TEST_CASE("category frequencies match the configured mix") {
    GenConfig config;
    config.seed = 29;
    config.note_count = 800;
    const deid::CategoryMapping mapping = deid::CategoryMapping::defaults();
    std::array<std::size_t, deid::kNumPhiCategories> counts{};
    std::size_t total = 0;
    for (const Note& raw : generate_corpus(config)) {
        const Note parsed = deid::parse_note(raw, mapping);
        for (const deid::PhiSpan& s : parsed.phi_spans) {
            ++counts[static_cast<std::size_t>(s.category)];
            ++total;
        }
    }
    REQUIRE(total > 500);
    for (std::size_t c = 0; c < deid::kNumPhiCategories; ++c) {
        const double p = config.category_mix[c];
        const double sigma = std::sqrt(double(total) * p * (1.0 - p));
        CHECK(std::abs(double(counts[c]) - double(total) * p) <= 3.0 * sigma);
    }
}

TEST_CASE("invalid configs are rejected") {
    GenConfig config;
    config.note_count = 1;
    SUBCASE("density") {
        config.density_per_100 = 0.0;
    }
    SUBCASE("lines range") {
        config.lines_min = 5;
        config.lines_max = 2;
    }
    SUBCASE("category mix sum") {
        config.category_mix = {0.5, 0.5, 0.5, 0.0, 0.0};
    }
    SUBCASE("note mix sum") {
        config.note_category_mix = {{"Nursing", 0.7}};
    }
    CHECK_THROWS_AS(generate_corpus(config), deid::ConfigError);
}

TEST_CASE("unattainable density is a config error") {
    GenConfig config;
    config.note_count = 1;
    config.density_per_100 = 60.0;
    CHECK_THROWS_AS(generate_corpus(config), deid::ConfigError);
}

TEST_CASE("shipped template bank file matches the built-in bank") {
    const TemplateBank from_file = TemplateBank::load(std::string(DEID_DATA_DIR) + "/note_templates.txt");
    const TemplateBank builtin = TemplateBank::defaults();
    CHECK(from_file.plain().size() == builtin.plain().size());
    CHECK(from_file.slotted().size() == builtin.slotted().size());
    for (std::size_t c = 0; c < deid::kNumPhiCategories; ++c)
        CHECK(from_file.pool(static_cast<deid::PhiCategory>(c)).size() ==
              builtin.pool(static_cast<deid::PhiCategory>(c)).size());
}

TEST_CASE("note ids embed the seed and are unique") {
    GenConfig config;
    config.seed = 5;
    config.note_count = 20;
    const std::vector<Note> notes = generate_corpus(config);
    CHECK(notes[0].note_id == "n5-000000");
    for (std::size_t i = 1; i < notes.size(); ++i) CHECK(notes[i].note_id != notes[i - 1].note_id);
}
