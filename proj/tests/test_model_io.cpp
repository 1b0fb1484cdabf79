#include <doctest.h>

#include <string>
#include <vector>

#include "deid/model_io.hpp"
#include "oracles.hpp"

using deid::CrfModel;
using deid::load_model;
using deid::save_model;

TEST_CASE("save then load preserves every bit and every decode") {
    deid::SplitMix64 rng(606);
    CrfModel model = oracles::random_model(12, 5, rng);
    model.meta.l2_lambda = 0.1;
    model.meta.iterations = 42;
    model.meta.final_objective = -123.456789012345;
    model.meta.stopping_reason = "objective";
    model.meta.merged_context = true;

    oracles::TempDir dir;
    save_model(model, dir.file("model.json"));
    const CrfModel loaded = load_model(dir.file("model.json"));

    CHECK(loaded.labels == model.labels);
    CHECK(loaded.feature_table.names() == model.feature_table.names());
    CHECK(loaded.emission == model.emission);
    CHECK(loaded.transition == model.transition);
    CHECK(loaded.meta.l2_lambda == model.meta.l2_lambda);
    CHECK(loaded.meta.iterations == 42);
    CHECK(loaded.meta.final_objective == model.meta.final_objective);
    CHECK(loaded.meta.stopping_reason == "objective");
    CHECK(loaded.meta.merged_context == true);

    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<deid::FeatureVector> feats = oracles::random_features(1 + rng.next_below(8), 12, rng);
        CHECK(deid::viterbi(model, feats) == deid::viterbi(loaded, feats));
    }
}

TEST_CASE("truncated files are corrupt") {
    deid::SplitMix64 rng(607);
    const CrfModel model = oracles::random_model(4, 3, rng);
    oracles::TempDir dir;
    save_model(model, dir.file("model.json"));
    const std::string full = oracles::read_file(dir.file("model.json"));
    oracles::write_file(dir.file("cut.json"), full.substr(0, full.size() / 2));
    CHECK_THROWS_AS(load_model(dir.file("cut.json")), deid::CorruptModel);
}

TEST_CASE("future versions are rejected") {
    oracles::TempDir dir;
    oracles::write_file(dir.file("v2.json"),
                        R"({"version":2,"labels":["O"],"features":[],"emission":[],"transition":[["0x0p+0"]]})");
    try {
        load_model(dir.file("v2.json"));
        FAIL("expected VersionMismatch");
    } catch (const deid::VersionMismatch&) {
    }
}

TEST_CASE("structural damage is reported as corruption") {
    oracles::TempDir dir;
    SUBCASE("missing transition") {
        oracles::write_file(dir.file("bad.json"), R"({"version":1,"labels":["O"],"features":[],"emission":[]})");
    }
    SUBCASE("wrong emission width") {
        oracles::write_file(dir.file("bad.json"),
                            R"({"version":1,"labels":["O","A"],"features":["f0"],)"
                            R"("emission":[["0x0p+0"]],"transition":[["0x0p+0","0x0p+0"],["0x0p+0","0x0p+0"]]})");
    }
    SUBCASE("bad weight text") {
        oracles::write_file(dir.file("bad.json"),
                            R"({"version":1,"labels":["O"],"features":["f0"],)"
                            R"("emission":[["zzz"]],"transition":[["0x0p+0"]]})");
    }
    CHECK_THROWS_AS(load_model(dir.file("bad.json")), deid::CorruptModel);
}
