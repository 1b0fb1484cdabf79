#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

#include "deid/lexicon.hpp"
#include "oracles.hpp"

using deid::Lexicon;
using deid::LexiconKind;

TEST_CASE("TSV loads surfaces with weights") {
    oracles::TempDir dir;
    oracles::write_file(dir.file("lex.tsv"), "Mary\t3\nAnna\t1\n");
    const Lexicon lex = Lexicon::load(dir.file("lex.tsv"), LexiconKind::FemaleFirst);
    REQUIRE(lex.size() == 2);
    CHECK(lex.entries()[0].surface == "Mary");
    CHECK(lex.entries()[0].weight == 3.0);
    CHECK(lex.entries()[1].surface == "Anna");
    CHECK(lex.entries()[1].weight == 1.0);
}

TEST_CASE("missing weight defaults to 1.0") {
    oracles::TempDir dir;
    oracles::write_file(dir.file("lex.tsv"), "MGH\n");
    const Lexicon lex = Lexicon::load(dir.file("lex.tsv"), LexiconKind::Hospital);
    REQUIRE(lex.size() == 1);
    CHECK(lex.entries()[0].weight == 1.0);
}

TEST_CASE("loader rejects bad files") {
    oracles::TempDir dir;
    SUBCASE("zero weight") {
        oracles::write_file(dir.file("lex.tsv"), "Mary\t0\n");
        try {
            Lexicon::load(dir.file("lex.tsv"), LexiconKind::FemaleFirst);
            FAIL("expected NonPositiveWeight");
        } catch (const deid::NonPositiveWeight& e) {
            CHECK(e.line_number == 1);
        }
    }
    SUBCASE("unparseable weight") {
        oracles::write_file(dir.file("lex.tsv"), "Mary\tabc\n");
        CHECK_THROWS_AS(Lexicon::load(dir.file("lex.tsv"), LexiconKind::FemaleFirst), deid::NonPositiveWeight);
    }
    SUBCASE("duplicate surface") {
        oracles::write_file(dir.file("lex.tsv"), "Mary\t3\nMary\t1\n");
        try {
            Lexicon::load(dir.file("lex.tsv"), LexiconKind::FemaleFirst);
            FAIL("expected DuplicateSurface");
        } catch (const deid::DuplicateSurface& e) {
            CHECK(e.line_number == 2);
        }
    }
    SUBCASE("empty lexicon") {
        oracles::write_file(dir.file("lex.tsv"), "\n\n");
        CHECK_THROWS_AS(Lexicon::load(dir.file("lex.tsv"), LexiconKind::FemaleFirst), deid::EmptyLexicon);
    }
}

TEST_CASE("single-entry lexicon always samples that entry") {
    const Lexicon lex = Lexicon::from_entries({{"MGH", 1.0}}, LexiconKind::Hospital);
    deid::SplitMix64 rng(3);
    for (int i = 0; i < 100; ++i) CHECK(lex.sample(rng) == "MGH");
}

TEST_CASE("sampling follows the weights") {
    const Lexicon lex = Lexicon::from_entries({{"Mary", 3.0}, {"Anna", 1.0}}, LexiconKind::FemaleFirst);
    deid::SplitMix64 rng(2024);
    std::size_t mary = 0;
    constexpr std::size_t kDraws = 100000;
    for (std::size_t i = 0; i < kDraws; ++i)
        if (lex.sample(rng) == "Mary") ++mary;
    const double freq = double(mary) / double(kDraws);
    CHECK(freq > 0.74);
    CHECK(freq < 0.76);
}

TEST_CASE("chi-squared goodness of fit is not rejected") {
    // 4 entries, 3 dof; critical value at p = 0.001 is 16.266
    const Lexicon lex =
        Lexicon::from_entries({{"a", 1.0}, {"b", 2.0}, {"c", 3.0}, {"d", 4.0}}, LexiconKind::Surname);
    deid::SplitMix64 rng(77);
    std::map<std::string, std::size_t> counts;
    constexpr std::size_t kDraws = 100000;
    for (std::size_t i = 0; i < kDraws; ++i) ++counts[lex.sample(rng)];
    double chi2 = 0.0;
    for (const deid::LexiconEntry& e : lex.entries()) {
        const double expected = kDraws * e.weight / lex.total_weight();
        const double diff = double(counts[e.surface]) - expected;
        chi2 += diff * diff / expected;
    }
    CHECK(chi2 < 16.266);
}

TEST_CASE("load_dir picks up the shipped fixture lexicons") {
    const deid::LexiconSet set = deid::LexiconSet::load_dir(std::string(DEID_DATA_DIR) + "/lexicons");
    REQUIRE(set.male_first.has_value());
    REQUIRE(set.female_first.has_value());
    REQUIRE(set.surnames.has_value());
    REQUIRE(set.hospitals.has_value());
    REQUIRE(set.cities.has_value());
    CHECK(set.male_first->size() == 100);
    CHECK(set.female_first->size() == 100);
    CHECK(set.surnames->size() == 100);
    CHECK(set.hospitals->size() == 50);
}
