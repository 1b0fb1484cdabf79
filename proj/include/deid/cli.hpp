#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "deid/corpus_io.hpp"
#include "deid/corpusgen.hpp"
#include "deid/curve.hpp"
#include "deid/manifest.hpp"
#include "deid/model_io.hpp"
#include "deid/placeholder.hpp"
#include "deid/stats.hpp"
#include "deid/surrogate.hpp"
#include "deid/version.hpp"

namespace deid::cli {

namespace detail {

inline std::vector<double> parse_mix(const std::string& text, const std::vector<std::string>& keys,
                                     const char* what) {
    std::vector<double> probs(keys.size(), 0.0);
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError(std::string(what) + " entries must be KEY=PROB");
        const std::string key = item.substr(0, eq);
        const auto it = std::find(keys.begin(), keys.end(), key);
        if (it == keys.end()) throw ConfigError(std::string(what) + ": unknown key \"" + key + "\"");
        probs[static_cast<std::size_t>(it - keys.begin())] = std::stod(item.substr(eq + 1));
    }
    return probs;
}

inline LexiconSet load_lexicons(const std::string& dir) {
    LexiconSet set = LexiconSet::load_dir(dir);
    if (!set.male_first && !set.female_first && !set.surnames && !set.hospitals)
        throw IoError("no lexicon files found under " + dir);
    return set;
}

inline std::vector<LabeledNote> read_labeled_corpus(const std::string& path) {
    std::vector<LabeledNote> out;
    for (Note& note : read_corpus(path)) out.push_back(make_labeled(std::move(note)));
    return out;
}

inline void write_predictions(const std::string& path, std::span<const Note> notes,
                              std::span<const std::vector<int>> predictions) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < notes.size(); ++i) {
        nlohmann::ordered_json j;
        j["note_id"] = notes[i].note_id;
        nlohmann::ordered_json labels = nlohmann::ordered_json::array();
        for (int y : predictions[i]) labels.push_back(std::string(kLabelNames[static_cast<std::size_t>(y)]));
        j["labels"] = std::move(labels);
        out << j.dump() << '\n';
    }
}

inline std::vector<std::vector<int>> read_predictions(const std::string& path,
                                                      std::span<const LabeledNote> gold) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::unordered_map<std::string, std::vector<int>> by_id;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::ordered_json::parse_error& e) {
            throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("note_id") || !j["note_id"].is_string() || !j.contains("labels") ||
            !j["labels"].is_array())
            throw SchemaError(line_no, "prediction record needs \"note_id\" and \"labels\"");
        std::vector<int> labels;
        for (const auto& l : j["labels"]) {
            if (!l.is_string()) throw SchemaError(line_no, "labels must be strings");
            const std::optional<int> y = parse_label(l.get<std::string>());
            if (!y) throw SchemaError(line_no, "unknown label \"" + l.get<std::string>() + "\"");
            labels.push_back(*y);
        }
        by_id[j["note_id"].get<std::string>()] = std::move(labels);
    }
    std::vector<std::vector<int>> aligned;
    aligned.reserve(gold.size());
    for (const LabeledNote& ln : gold) {
        const auto it = by_id.find(ln.note.note_id);
        if (it == by_id.end()) throw AlignmentError("no prediction for note " + ln.note.note_id);
        aligned.push_back(it->second);
    }
    return aligned;
}

/// Gazetteer resolution: an explicit --dicts directory wins; otherwise the
/// dictionary word lists derive from the sampling lexicons.
inline Dictionaries resolve_dicts(const std::string& dicts_dir, const std::string& lexicons_dir) {
    if (!dicts_dir.empty()) return Dictionaries::load_dir(dicts_dir);
    if (!lexicons_dir.empty()) return Dictionaries::from_lexicons(load_lexicons(lexicons_dir));
    throw ConfigError("need --dicts or --lexicons for the dictionary features");
}

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

}  // namespace detail

/// Pipeline front door. args excludes the program name. Exit status: 0 on
/// success, 1 on usage errors, 2 on data/contract errors.
inline int run(std::vector<std::string> args) {
    CLI::App app{"clinical note synthetic identification and de-identification toolkit"};
    app.set_config("--config", "", "INI config merged at lower precedence; keys live in a [subcommand] section");
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate placeholder-bearing notes from the template bank");
    std::string gen_out;
    GenConfig gen_config;
    std::string gen_templates, gen_mix, gen_note_mix;
    gen_config.note_count = 100;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--seed", gen_config.seed, "RNG seed");
    gen->add_option("--notes", gen_config.note_count, "number of notes");
    gen->add_option("--lines-min", gen_config.lines_min, "minimum lines per note");
    gen->add_option("--lines-max", gen_config.lines_max, "maximum lines per note");
    gen->add_option("--density", gen_config.density_per_100, "expected placeholders per 100 tokens");
    gen->add_option("--templates", gen_templates, "template bank file (default: built-in bank)");
    gen->add_option("--mix", gen_mix, "PHI category mix, e.g. PATIENT_NAME=0.3,HOSPITAL=0.25,...");
    gen->add_option("--note-mix", gen_note_mix, "note category mix, e.g. 'Nursing=0.5,Physician=0.5'");

    // parse
    auto* parse = app.add_subcommand("parse", "replace [**...**] placeholders with labeled sentinels");
    std::string parse_in, parse_out, parse_mapping;
    bool parse_lenient = false;
    parse->add_option("--in", parse_in, "raw notes JSONL")->required();
    parse->add_option("--out", parse_out, "output directory")->required();
    parse->add_option("--mapping", parse_mapping, "category mapping TSV (default: built-in table)");
    auto* lenient_flag =
        parse->add_flag("--lenient", parse_lenient, "classify unmapped placeholders as ID instead of failing");
    parse->add_flag("--strict", "fail on unmapped placeholders (default)")->excludes(lenient_flag);

    // synth
    auto* synth = app.add_subcommand("synth", "substitute sampled surrogates for sentinel spans");
    std::string synth_in, synth_out, synth_lexicons;
    SurrogatePlan synth_plan;
    synth->add_option("--in", synth_in, "parsed corpus JSONL")->required();
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--lexicons", synth_lexicons, "lexicon directory")->required();
    synth->add_option("--seed", synth_plan.seed, "RNG seed");
    synth->add_flag("--consistent", synth_plan.consistency_mode,
                    "reuse one surrogate for identical placeholder inner texts within a note");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "corpus distribution report");
    std::string stats_in, stats_out;
    stats_cmd->add_option("--in", stats_in, "corpus JSONL")->required();
    stats_cmd->add_option("--out", stats_out, "output directory (report also prints to stdout)");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a CRF tagger on a labeled corpus");
    std::string train_in, train_out, train_lexicons;
    TrainConfig train_config;
    train_cmd->add_option("--in", train_in, "labeled corpus JSONL")->required();
    train_cmd->add_option("--out", train_out, "output directory")->required();
    train_cmd->add_option("--lexicons", train_lexicons, "lexicon directory (gazetteer fallback)");
    std::string train_dicts;
    train_cmd->add_option("--dicts", train_dicts, "gazetteer directory for the dictionary features");
    train_cmd->add_option("--l2", train_config.l2_lambda, "L2 regularization strength");
    train_cmd->add_option("--max-iter", train_config.max_iterations, "iteration cap");
    train_cmd->add_option("--tol-obj", train_config.tol_objective, "relative objective-change tolerance");
    train_cmd->add_option("--tol-grad", train_config.tol_gradient, "gradient infinity-norm tolerance");
    train_cmd->add_option("--seed", train_config.seed, "RNG seed");
    train_cmd->add_option("--threads", train_config.threads, "worker threads (1 = reference mode)");
    train_cmd->add_flag("--merged-context", train_config.merged_context,
                        "merge positional context families into single PREV/NEXT families");

    // tag
    auto* tag = app.add_subcommand("tag", "tag a corpus with a trained model");
    std::string tag_model, tag_in, tag_out, tag_lexicons;
    int tag_threads = 1;
    tag->add_option("--model", tag_model, "model file")->required();
    tag->add_option("--in", tag_in, "corpus JSONL")->required();
    tag->add_option("--out", tag_out, "output directory")->required();
    tag->add_option("--lexicons", tag_lexicons, "lexicon directory (gazetteer fallback)");
    std::string tag_dicts;
    tag->add_option("--dicts", tag_dicts, "gazetteer directory for the dictionary features");
    tag->add_option("--threads", tag_threads, "worker threads");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "token-level precision/recall/F1 against gold labels");
    std::string eval_gold, eval_pred, eval_out;
    eval_cmd->add_option("--gold", eval_gold, "gold labeled corpus JSONL")->required();
    eval_cmd->add_option("--pred", eval_pred, "predictions JSONL")->required();
    eval_cmd->add_option("--out", eval_out, "output directory (report also prints to stdout)");

    // curve
    auto* curve_cmd = app.add_subcommand("curve", "learning curve over nested training subsets");
    std::string curve_pool, curve_test, curve_out, curve_lexicons, curve_sizes = "100,200,500,1000";
    TrainConfig curve_train;
    std::uint64_t curve_seed = 0;
    curve_cmd->add_option("--pool", curve_pool, "training pool JSONL")->required();
    curve_cmd->add_option("--test", curve_test, "fixed test set JSONL")->required();
    curve_cmd->add_option("--out", curve_out, "output directory")->required();
    curve_cmd->add_option("--lexicons", curve_lexicons, "lexicon directory (gazetteer fallback)");
    std::string curve_dicts;
    curve_cmd->add_option("--dicts", curve_dicts, "gazetteer directory for the dictionary features");
    curve_cmd->add_option("--sizes", curve_sizes, "comma-separated training sizes");
    curve_cmd->add_option("--seed", curve_seed, "pool permutation seed");
    curve_cmd->add_option("--l2", curve_train.l2_lambda, "L2 regularization strength");
    curve_cmd->add_option("--max-iter", curve_train.max_iterations, "iteration cap");
    curve_cmd->add_option("--tol-obj", curve_train.tol_objective, "relative objective-change tolerance");
    curve_cmd->add_option("--tol-grad", curve_train.tol_gradient, "gradient infinity-norm tolerance");
    curve_cmd->add_option("--threads", curve_train.threads, "worker threads");
    curve_cmd->add_flag("--merged-context", curve_train.merged_context, "merged context families");

    std::vector<const char*> argv;
    argv.push_back("deidtk");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    detail::Timer timer;
    try {
        if (gen->parsed()) {
            detail::ensure_out_dir(gen_out);
            const std::vector<std::string> cat_keys(kLabelNames.begin() + 1, kLabelNames.end());
            if (!gen_mix.empty()) {
                const std::vector<double> probs = detail::parse_mix(gen_mix, cat_keys, "--mix");
                for (std::size_t i = 0; i < kNumPhiCategories; ++i) gen_config.category_mix[i] = probs[i];
            }
            if (!gen_note_mix.empty()) {
                gen_config.note_category_mix.clear();
                std::stringstream ss(gen_note_mix);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    const std::size_t eq = item.find('=');
                    if (eq == std::string::npos) throw ConfigError("--note-mix entries must be NAME=PROB");
                    gen_config.note_category_mix.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
                }
            }
            const TemplateBank bank =
                gen_templates.empty() ? TemplateBank::defaults() : TemplateBank::load(gen_templates);
            const std::vector<Note> notes = generate_corpus(gen_config, bank);
            const std::string out_file = gen_out + "/notes.jsonl";
            write_corpus(notes, out_file);
            RunManifest manifest;
            manifest.command = "gen";
            manifest.config = {{"seed", gen_config.seed},
                               {"notes", gen_config.note_count},
                               {"lines_min", gen_config.lines_min},
                               {"lines_max", gen_config.lines_max},
                               {"density", gen_config.density_per_100},
                               {"templates", gen_templates},
                               {"mix", gen_mix},
                               {"note_mix", gen_note_mix}};
            if (!gen_templates.empty()) manifest.inputs.push_back(gen_templates);
            manifest.outputs.push_back(out_file);
            manifest.duration_seconds = timer.seconds();
            write_manifest(gen_out, manifest);
            std::cout << "wrote " << notes.size() << " notes to " << out_file << '\n';
        } else if (parse->parsed()) {
            detail::ensure_out_dir(parse_out);
            const CategoryMapping mapping =
                parse_mapping.empty() ? CategoryMapping::defaults() : CategoryMapping::load(parse_mapping);
            const std::vector<Note> raw = read_corpus(parse_in);
            std::vector<Note> parsed;
            parsed.reserve(raw.size());
            std::vector<ParseWarning> warnings;
            for (const Note& note : raw) parsed.push_back(parse_note(note, mapping, !parse_lenient, &warnings));
            const std::string out_file = parse_out + "/corpus.jsonl";
            write_corpus(parsed, out_file);
            for (const ParseWarning& w : warnings)
                std::cerr << "warning: unmapped placeholder \"" << w.inner << "\" classified as ID\n";
            RunManifest manifest;
            manifest.command = "parse";
            manifest.config = {{"in", parse_in}, {"mapping", parse_mapping}, {"strict", !parse_lenient}};
            manifest.inputs.push_back(parse_in);
            if (!parse_mapping.empty()) manifest.inputs.push_back(parse_mapping);
            manifest.outputs.push_back(out_file);
            manifest.duration_seconds = timer.seconds();
            write_manifest(parse_out, manifest);
            std::cout << "parsed " << parsed.size() << " notes, " << warnings.size() << " warnings\n";
        } else if (synth->parsed()) {
            detail::ensure_out_dir(synth_out);
            const LexiconSet lexicons = detail::load_lexicons(synth_lexicons);
            const std::vector<Note> notes = read_corpus(synth_in);
            const std::vector<LabeledNote> labeled = synthesize_corpus(notes, synth_plan, lexicons);
            std::vector<Note> out_notes;
            out_notes.reserve(labeled.size());
            for (const LabeledNote& ln : labeled) out_notes.push_back(ln.note);
            const std::string out_file = synth_out + "/corpus.jsonl";
            write_corpus(out_notes, out_file);
            RunManifest manifest;
            manifest.command = "synth";
            manifest.config = {{"in", synth_in},
                               {"lexicons", synth_lexicons},
                               {"seed", synth_plan.seed},
                               {"consistent", synth_plan.consistency_mode}};
            manifest.inputs = {synth_in, synth_lexicons};
            manifest.outputs.push_back(out_file);
            manifest.duration_seconds = timer.seconds();
            write_manifest(synth_out, manifest);
            std::cout << "synthesized " << out_notes.size() << " notes to " << out_file << '\n';
        } else if (stats_cmd->parsed()) {
            const std::vector<Note> notes = read_corpus(stats_in);
            const std::string report = render_stats(corpus_stats(notes));
            std::cout << report;
            if (!stats_out.empty()) {
                detail::ensure_out_dir(stats_out);
                const std::string out_file = stats_out + "/stats.txt";
                std::ofstream out(out_file, std::ios::binary);
                if (!out) throw IoError("cannot open for writing: " + out_file);
                out << report;
                RunManifest manifest;
                manifest.command = "stats";
                manifest.config = {{"in", stats_in}};
                manifest.inputs.push_back(stats_in);
                manifest.outputs.push_back(out_file);
                manifest.duration_seconds = timer.seconds();
                write_manifest(stats_out, manifest);
            }
        } else if (train_cmd->parsed()) {
            detail::ensure_out_dir(train_out);
            const Dictionaries dicts = detail::resolve_dicts(train_dicts, train_lexicons);
            const std::vector<LabeledNote> corpus = detail::read_labeled_corpus(train_in);
            std::vector<const LabeledNote*> refs;
            refs.reserve(corpus.size());
            for (const LabeledNote& ln : corpus) refs.push_back(&ln);
            ExtractOptions options;
            options.merged_context = train_config.merged_context;
            deid::detail::PreparedTraining prep = deid::detail::prepare_training(refs, dicts, options);
            const CrfModel model = train(prep.sequences, standard_labels(), std::move(prep.table), train_config);
            const std::string out_file = train_out + "/model.json";
            save_model(model, out_file);
            RunManifest manifest;
            manifest.command = "train";
            manifest.config = {{"in", train_in},
                               {"lexicons", train_lexicons},
                               {"dicts", train_dicts},
                               {"l2", train_config.l2_lambda},
                               {"max_iter", train_config.max_iterations},
                               {"tol_obj", train_config.tol_objective},
                               {"tol_grad", train_config.tol_gradient},
                               {"seed", train_config.seed},
                               {"threads", train_config.threads},
                               {"merged_context", train_config.merged_context}};
            manifest.inputs = {train_in};
            if (!train_lexicons.empty()) manifest.inputs.push_back(train_lexicons);
            if (!train_dicts.empty()) manifest.inputs.push_back(train_dicts);
            manifest.outputs.push_back(out_file);
            manifest.duration_seconds = timer.seconds();
            write_manifest(train_out, manifest);
            std::cout << "trained on " << prep.sequences.size() << " sequences, " << model.num_features()
                      << " features, stopped by " << model.meta.stopping_reason << " after "
                      << model.meta.iterations << " iterations\n";
        } else if (tag->parsed()) {
            detail::ensure_out_dir(tag_out);
            const CrfModel model = load_model(tag_model);
            const Dictionaries dicts = detail::resolve_dicts(tag_dicts, tag_lexicons);
            const std::vector<Note> notes = read_corpus(tag_in);
            const std::vector<std::vector<int>> predictions = tag_corpus(model, notes, dicts, tag_threads);
            const std::string out_file = tag_out + "/predictions.jsonl";
            detail::write_predictions(out_file, notes, predictions);
            RunManifest manifest;
            manifest.command = "tag";
            manifest.config = {
                {"model", tag_model}, {"in", tag_in}, {"lexicons", tag_lexicons}, {"dicts", tag_dicts},
                {"threads", tag_threads}};
            manifest.inputs = {tag_model, tag_in};
            if (!tag_lexicons.empty()) manifest.inputs.push_back(tag_lexicons);
            if (!tag_dicts.empty()) manifest.inputs.push_back(tag_dicts);
            manifest.outputs.push_back(out_file);
            manifest.duration_seconds = timer.seconds();
            write_manifest(tag_out, manifest);
            std::cout << "tagged " << notes.size() << " notes to " << out_file << '\n';
        } else if (eval_cmd->parsed()) {
            const std::vector<LabeledNote> gold = detail::read_labeled_corpus(eval_gold);
            const std::vector<std::vector<int>> predictions = detail::read_predictions(eval_pred, gold);
            const MetricsReport report = evaluate(gold, predictions);
            std::cout << render_metrics(report);
            if (!eval_out.empty()) {
                detail::ensure_out_dir(eval_out);
                const std::string csv_file = eval_out + "/metrics.csv";
                std::ofstream csv(csv_file, std::ios::binary);
                if (!csv) throw IoError("cannot open for writing: " + csv_file);
                write_metrics_csv(csv, report, 0);
                RunManifest manifest;
                manifest.command = "eval";
                manifest.config = {{"gold", eval_gold}, {"pred", eval_pred}};
                manifest.inputs = {eval_gold, eval_pred};
                manifest.outputs.push_back(csv_file);
                manifest.duration_seconds = timer.seconds();
                write_manifest(eval_out, manifest);
            }
        } else if (curve_cmd->parsed()) {
            detail::ensure_out_dir(curve_out);
            const Dictionaries dicts = detail::resolve_dicts(curve_dicts, curve_lexicons);
            const std::vector<LabeledNote> pool = detail::read_labeled_corpus(curve_pool);
            const std::vector<LabeledNote> test = detail::read_labeled_corpus(curve_test);
            std::vector<std::size_t> sizes;
            std::stringstream ss(curve_sizes);
            std::string item;
            while (std::getline(ss, item, ',')) sizes.push_back(static_cast<std::size_t>(std::stoull(item)));
            const CurveResult result = learning_curve(pool, test, sizes, curve_train, curve_seed, dicts);
            const std::string metrics_file = curve_out + "/curve_metrics.csv";
            const std::string series_file = curve_out + "/curve_recall.csv";
            const std::string text_file = curve_out + "/curve.txt";
            {
                std::ofstream out(metrics_file, std::ios::binary);
                if (!out) throw IoError("cannot open for writing: " + metrics_file);
                write_curve_metrics_csv(out, result);
            }
            {
                std::ofstream out(series_file, std::ios::binary);
                if (!out) throw IoError("cannot open for writing: " + series_file);
                write_curve_series_csv(out, result);
            }
            const std::string rendered = render_curve(result);
            {
                std::ofstream out(text_file, std::ios::binary);
                if (!out) throw IoError("cannot open for writing: " + text_file);
                out << rendered;
            }
            std::cout << rendered;
            RunManifest manifest;
            manifest.command = "curve";
            manifest.config = {{"pool", curve_pool},
                               {"test", curve_test},
                               {"lexicons", curve_lexicons},
                               {"dicts", curve_dicts},
                               {"sizes", curve_sizes},
                               {"seed", curve_seed},
                               {"l2", curve_train.l2_lambda},
                               {"max_iter", curve_train.max_iterations},
                               {"tol_obj", curve_train.tol_objective},
                               {"tol_grad", curve_train.tol_gradient},
                               {"threads", curve_train.threads},
                               {"merged_context", curve_train.merged_context}};
            manifest.inputs = {curve_pool, curve_test};
            if (!curve_lexicons.empty()) manifest.inputs.push_back(curve_lexicons);
            if (!curve_dicts.empty()) manifest.inputs.push_back(curve_dicts);
            manifest.outputs = {metrics_file, series_file, text_file};
            manifest.duration_seconds = timer.seconds();
            write_manifest(curve_out, manifest);
        }
    } catch (const Error& e) {
        std::cerr << e.name() << ": " << e.what() << '\n';
        return 2;
    }
    return 0;
}

}  // namespace deid::cli
