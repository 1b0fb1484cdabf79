#pragma once

// Independent reference implementations used as test oracles. These must not
// share logic with the library code paths they check.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "deid/crf.hpp"
#include "deid/note.hpp"
#include "deid/rng.hpp"
#include "deid/text.hpp"

namespace oracles {

// --- filesystem helpers ---

class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "deid_test_XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
        path_ = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const { return path_ + "/" + name; }

private:
    std::string path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

// --- tokenizer reference: classify every scalar, then enumerate runs ---

inline std::vector<deid::Token> reference_tokenize(const std::string& line, std::size_t line_index = 0) {
    const deid::utf8::Decoded d = deid::utf8::decode(line);
    enum class Kind { Space, Word, Punct };
    std::vector<Kind> kinds;
    kinds.reserve(d.scalars.size());
    for (char32_t c : d.scalars)
        kinds.push_back(deid::is_space_char(c) ? Kind::Space : deid::is_word_char(c) ? Kind::Word : Kind::Punct);
    std::vector<deid::Token> out;
    std::size_t i = 0;
    while (i < kinds.size()) {
        if (kinds[i] == Kind::Space) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        if (kinds[i] == Kind::Word)
            while (j < kinds.size() && kinds[j] == Kind::Word) ++j;
        out.push_back(deid::Token{std::string(line.substr(d.byte_offsets[i], d.byte_offsets[j] - d.byte_offsets[i])),
                                  line_index, i, j});
        i = j;
    }
    return out;
}

// --- CRF brute-force oracles (independent scoring loop) ---

inline double oracle_sequence_score(const deid::CrfModel& model, std::span<const deid::FeatureVector> features,
                                    const std::vector<int>& labels) {
    const std::size_t L = model.num_labels();
    double total = 0.0;
    for (std::size_t t = 0; t < features.size(); ++t) {
        for (std::uint32_t f : features[t]) total += model.emission[f * L + static_cast<std::size_t>(labels[t])];
        if (t > 0)
            total += model.transition[static_cast<std::size_t>(labels[t - 1]) * L + static_cast<std::size_t>(labels[t])];
    }
    return total;
}

/// Visit all |L|^T labelings in lexicographic order.
template <typename Fn>
inline void for_each_labeling(std::size_t T, std::size_t L, Fn&& fn) {
    std::vector<int> labels(T, 0);
    while (true) {
        fn(labels);
        std::size_t t = T;
        while (t-- > 0) {
            if (++labels[t] < static_cast<int>(L)) break;
            labels[t] = 0;
            if (t == 0) return;
        }
        if (labels == std::vector<int>(T, 0)) return;
    }
}

inline double brute_log_partition(const deid::CrfModel& model, std::span<const deid::FeatureVector> features) {
    double max_score = -std::numeric_limits<double>::infinity();
    std::vector<double> scores;
    for_each_labeling(features.size(), model.num_labels(), [&](const std::vector<int>& labels) {
        const double s = oracle_sequence_score(model, features, labels);
        scores.push_back(s);
        max_score = std::max(max_score, s);
    });
    double sum = 0.0;
    for (double s : scores) sum += std::exp(s - max_score);
    return max_score + std::log(sum);
}

/// Lexicographically-first labeling attaining the maximum score.
inline std::vector<int> brute_best_path(const deid::CrfModel& model, std::span<const deid::FeatureVector> features) {
    std::vector<int> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for_each_labeling(features.size(), model.num_labels(), [&](const std::vector<int>& labels) {
        const double s = oracle_sequence_score(model, features, labels);
        if (s > best_score) {
            best_score = s;
            best = labels;
        }
    });
    return best;
}

// --- random model/sequence builders ---

inline deid::CrfModel random_model(std::size_t num_features, std::size_t num_labels, deid::SplitMix64& rng,
                                   double lo = -2.0, double hi = 2.0) {
    std::vector<std::string> labels;
    labels.emplace_back("O");
    for (std::size_t i = 1; i < num_labels; ++i) labels.push_back("L" + std::to_string(i));
    deid::FeatureTable table;
    for (std::size_t f = 0; f < num_features; ++f) table.add_or_get("f" + std::to_string(f));
    table.freeze();
    deid::CrfModel model = deid::CrfModel::zeros(std::move(labels), std::move(table));
    for (double& w : model.emission) w = lo + rng.next_double() * (hi - lo);
    for (double& w : model.transition) w = lo + rng.next_double() * (hi - lo);
    return model;
}

inline std::vector<deid::FeatureVector> random_features(std::size_t T, std::size_t num_features,
                                                        deid::SplitMix64& rng) {
    std::vector<deid::FeatureVector> out(T);
    for (deid::FeatureVector& fv : out) {
        const std::size_t active = 1 + rng.next_below(3);
        for (std::size_t a = 0; a < active; ++a) fv.push_back(static_cast<std::uint32_t>(rng.next_below(num_features)));
        std::sort(fv.begin(), fv.end());
        fv.erase(std::unique(fv.begin(), fv.end()), fv.end());
    }
    return out;
}

// --- independent re-annotation: per-scalar category mask ---

inline std::vector<int> reannotate(const deid::Note& note) {
    std::vector<int> labels;
    for (std::size_t li = 0; li < note.lines.size(); ++li) {
        const deid::utf8::Decoded d = deid::utf8::decode(note.lines[li]);
        std::vector<int> mask(d.scalars.size(), 0);
        for (const deid::PhiSpan& s : note.phi_spans)
            if (s.line_index == li)
                for (std::size_t p = s.begin; p < s.end && p < mask.size(); ++p)
                    if (mask[p] == 0) mask[p] = deid::label_of(s.category);
        for (const deid::Token& t : deid::tokenize(note.lines[li], li)) {
            int label = 0;
            for (std::size_t p = t.begin; p < t.end; ++p)
                if (mask[p] != 0) {
                    label = mask[p];
                    break;
                }
            labels.push_back(label);
        }
    }
    return labels;
}

}  // namespace oracles
