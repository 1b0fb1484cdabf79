#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "deid/crf.hpp"
#include "deid/error.hpp"
#include "deid/features.hpp"
#include "deid/metrics.hpp"
#include "deid/parallel.hpp"
#include "deid/rng.hpp"
#include "deid/surrogate.hpp"
#include "deid/train.hpp"
#include "deid/vocab.hpp"

namespace deid {

/// Viterbi-tag every note with a trained model. Extraction options come from
/// the model's training record so they always match training.
inline std::vector<std::vector<int>> tag_corpus(const CrfModel& model, std::span<const Note> notes,
                                                const Dictionaries& dicts, int threads = 1) {
    ExtractOptions options;
    options.merged_context = model.meta.merged_context;
    std::vector<std::vector<int>> predictions(notes.size());
    for_each_block(notes.size(), 16, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::vector<FeatureVector> features = extract_frozen(notes[i], dicts, model.feature_table, options);
            predictions[i] = features.empty() ? std::vector<int>{} : viterbi(model, features);
        }
    });
    return predictions;
}

struct CurvePoint {
    std::size_t train_size = 0;
    MetricsReport metrics;
};

/// Learning-curve output: one metrics report per training size, measured on
/// one fixed test set. Training subsets are nested prefixes of a single
/// seeded permutation of the pool.
struct CurveResult {
    std::vector<CurvePoint> points;
    std::string test_set_id;
    std::uint64_t seed = 0;
};

namespace detail {

struct PreparedTraining {
    Vocabulary vocab;
    FeatureTable table;
    std::vector<Sequence> sequences;
};

inline PreparedTraining prepare_training(std::span<const LabeledNote* const> subset, const Dictionaries& dicts,
                                         const ExtractOptions& options) {
    PreparedTraining prep;
    std::vector<Note> notes;
    notes.reserve(subset.size());
    for (const LabeledNote* ln : subset) notes.push_back(ln->note);
    prep.vocab = build_vocab(notes);
    for (const LabeledNote* ln : subset) {
        Sequence seq;
        seq.features = extract_training(ln->note, prep.vocab, dicts, prep.table, options);
        seq.labels = ln->token_labels;
        if (!seq.features.empty()) prep.sequences.push_back(std::move(seq));
    }
    prep.table.freeze();
    return prep;
}

}  // namespace detail

/// Train at each requested size on nested subsets of a seeded pool
/// permutation, evaluate on the fixed test set, and collect the metrics.
inline CurveResult learning_curve(std::span<const LabeledNote> pool, std::span<const LabeledNote> test,
                                  std::vector<std::size_t> sizes, const TrainConfig& train_config, std::uint64_t seed,
                                  const Dictionaries& dicts) {
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    if (sizes.empty()) throw ConfigError("no training sizes given");
    if (sizes.back() > pool.size()) throw InsufficientPool(pool.size(), sizes.back());

    std::unordered_set<std::string> pool_ids;
    for (const LabeledNote& ln : pool) pool_ids.insert(ln.note.note_id);
    for (const LabeledNote& ln : test)
        if (pool_ids.contains(ln.note.note_id)) throw OverlapError(ln.note.note_id);

    // One permutation for all sizes: size s trains on the first s entries.
    std::vector<std::size_t> permutation(pool.size());
    for (std::size_t i = 0; i < permutation.size(); ++i) permutation[i] = i;
    SplitMix64 rng(seed);
    for (std::size_t i = permutation.size(); i > 1; --i)
        std::swap(permutation[i - 1], permutation[rng.next_below(i)]);

    std::vector<Note> test_notes;
    test_notes.reserve(test.size());
    for (const LabeledNote& ln : test) test_notes.push_back(ln.note);

    ExtractOptions options;
    options.merged_context = train_config.merged_context;

    CurveResult result;
    result.seed = seed;
    {
        std::vector<std::string> ids;
        ids.reserve(test.size());
        for (const LabeledNote& ln : test) ids.push_back(ln.note.note_id);
        std::sort(ids.begin(), ids.end());
        std::string joined;
        for (const std::string& id : ids) {
            joined += id;
            joined += '\n';
        }
        std::ostringstream hex;
        hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(joined);
        result.test_set_id = hex.str();
    }

    for (std::size_t size : sizes) {
        std::vector<const LabeledNote*> subset;
        subset.reserve(size);
        for (std::size_t i = 0; i < size; ++i) subset.push_back(&pool[permutation[i]]);
        detail::PreparedTraining prep = detail::prepare_training(subset, dicts, options);
        const CrfModel model = train(prep.sequences, standard_labels(), std::move(prep.table), train_config);
        const std::vector<std::vector<int>> predictions = tag_corpus(model, test_notes, dicts, train_config.threads);
        CurvePoint point;
        point.train_size = size;
        point.metrics = evaluate(test, predictions);
        result.points.push_back(std::move(point));
    }
    return result;
}

/// Recall-versus-size series, one row per (size, category).
inline void write_curve_series_csv(std::ostream& out, const CurveResult& result) {
    out << "size,category,recall\n";
    out << std::fixed << std::setprecision(6);
    for (const CurvePoint& p : result.points)
        for (const auto& [name, m] : p.metrics.per_category)
            out << p.train_size << ',' << name << ',' << m.recall << '\n';
}

/// Full per-size metrics in the shared CSV schema.
inline void write_curve_metrics_csv(std::ostream& out, const CurveResult& result) {
    out << "category,size,tp,fp,fn,precision,recall,f1\n";
    for (const CurvePoint& p : result.points) write_metrics_csv_rows(out, p.metrics, p.train_size);
}

inline std::string render_curve(const CurveResult& result) {
    std::ostringstream out;
    out << "test_set_id " << result.test_set_id << ", seed " << result.seed << "\n";
    for (const CurvePoint& p : result.points) {
        out << "\n# training files: " << p.train_size << "\n";
        out << render_metrics(p.metrics);
    }
    return out.str();
}

}  // namespace deid
