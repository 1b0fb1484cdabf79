#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "deid/error.hpp"
#include "deid/features.hpp"

namespace deid {

/// Training record kept with a model.
struct TrainMeta {
    double l2_lambda = 0.0;
    int iterations = 0;
    double final_objective = 0.0;
    std::string stopping_reason;
    bool merged_context = false;
};

/// Linear-chain CRF: per-position emission scores from binary features plus
/// a dense label-transition matrix. Label index 0 is the O / tie-break
/// anchor by convention; the label list is otherwise arbitrary, so the
/// engine works for any label count.
struct CrfModel {
    std::vector<std::string> labels;
    FeatureTable feature_table;
    std::vector<double> emission;    // feature-major: [f * L + y]
    std::vector<double> transition;  // [y_prev * L + y]
    TrainMeta meta;

    std::size_t num_labels() const { return labels.size(); }
    std::size_t num_features() const { return feature_table.size(); }

    double emission_weight(std::uint32_t feature, std::size_t label) const {
        return emission[feature * num_labels() + label];
    }
    double transition_weight(std::size_t from, std::size_t to) const { return transition[from * num_labels() + to]; }

    static CrfModel zeros(std::vector<std::string> labels, FeatureTable table) {
        CrfModel m;
        m.labels = std::move(labels);
        m.feature_table = std::move(table);
        m.emission.assign(m.feature_table.size() * m.labels.size(), 0.0);
        m.transition.assign(m.labels.size() * m.labels.size(), 0.0);
        return m;
    }
};

/// One training sequence: per-token feature vectors and gold label indices.
struct Sequence {
    std::vector<FeatureVector> features;
    std::vector<int> labels;
};

namespace detail {

inline double log_sum_exp(std::span<const double> xs) {
    double max = -std::numeric_limits<double>::infinity();
    for (double x : xs) max = std::max(max, x);
    if (!std::isfinite(max)) return max;
    double sum = 0.0;
    for (double x : xs) sum += std::exp(x - max);
    return max + std::log(sum);
}

inline void check_features(const CrfModel& model, std::span<const FeatureVector> features) {
    if (features.empty()) throw LengthMismatch(0, 1);
    const std::size_t F = model.num_features();
    for (const FeatureVector& fv : features)
        for (std::uint32_t f : fv)
            if (f >= F) throw IndexOutOfRange("feature index " + std::to_string(f) + " >= " + std::to_string(F));
}

/// Emission score rows, one vector of size L per position.
inline std::vector<std::vector<double>> emission_scores(const CrfModel& model,
                                                        std::span<const FeatureVector> features) {
    const std::size_t L = model.num_labels();
    std::vector<std::vector<double>> scores(features.size(), std::vector<double>(L, 0.0));
    for (std::size_t t = 0; t < features.size(); ++t)
        for (std::uint32_t f : features[t]) {
            const double* row = model.emission.data() + static_cast<std::size_t>(f) * L;
            for (std::size_t y = 0; y < L; ++y) scores[t][y] += row[y];
        }
    return scores;
}

/// Log-space forward lattice: alpha[t][y] = log sum over prefixes ending in y.
inline std::vector<std::vector<double>> forward_lattice(const CrfModel& model,
                                                        const std::vector<std::vector<double>>& em) {
    const std::size_t T = em.size(), L = model.num_labels();
    std::vector<std::vector<double>> alpha(T, std::vector<double>(L));
    alpha[0] = em[0];
    std::vector<double> scratch(L);
    for (std::size_t t = 1; t < T; ++t)
        for (std::size_t y = 0; y < L; ++y) {
            for (std::size_t p = 0; p < L; ++p) scratch[p] = alpha[t - 1][p] + model.transition_weight(p, y);
            alpha[t][y] = log_sum_exp(scratch) + em[t][y];
        }
    return alpha;
}

/// Log-space backward lattice: beta[t][y] = log sum over suffixes after y.
inline std::vector<std::vector<double>> backward_lattice(const CrfModel& model,
                                                         const std::vector<std::vector<double>>& em) {
    const std::size_t T = em.size(), L = model.num_labels();
    std::vector<std::vector<double>> beta(T, std::vector<double>(L, 0.0));
    std::vector<double> scratch(L);
    for (std::size_t t = T - 1; t-- > 0;)
        for (std::size_t y = 0; y < L; ++y) {
            for (std::size_t n = 0; n < L; ++n)
                scratch[n] = model.transition_weight(y, n) + em[t + 1][n] + beta[t + 1][n];
            beta[t][y] = log_sum_exp(scratch);
        }
    return beta;
}

}  // namespace detail

/// Joint score of one labeling: sum of emissions plus adjacent transitions.
inline double sequence_score(const CrfModel& model, std::span<const FeatureVector> features,
                             std::span<const int> labels) {
    if (features.size() != labels.size()) throw LengthMismatch(features.size(), labels.size());
    detail::check_features(model, features);
    const std::size_t L = model.num_labels();
    double score = 0.0;
    for (std::size_t t = 0; t < features.size(); ++t) {
        const int y = labels[t];
        if (y < 0 || static_cast<std::size_t>(y) >= L)
            throw IndexOutOfRange("label index " + std::to_string(y) + " >= " + std::to_string(L));
        for (std::uint32_t f : features[t]) score += model.emission_weight(f, static_cast<std::size_t>(y));
        if (t > 0) score += model.transition_weight(static_cast<std::size_t>(labels[t - 1]), static_cast<std::size_t>(y));
    }
    return score;
}

/// log of the sum over all |L|^T labelings of exp(sequence_score), by the
/// forward algorithm in log space.
inline double log_partition(const CrfModel& model, std::span<const FeatureVector> features) {
    detail::check_features(model, features);
    const std::vector<std::vector<double>> em = detail::emission_scores(model, features);
    const std::vector<std::vector<double>> alpha = detail::forward_lattice(model, em);
    return detail::log_sum_exp(alpha.back());
}

/// Posterior distributions from forward-backward. node(t, y) sums to 1 over
/// y; edge(t, y, y') couples positions t and t+1 and is consistent with the
/// node marginals by row/column summation.
struct Marginals {
    std::size_t length = 0;
    std::size_t label_count = 0;
    std::vector<double> node_probs;  // [t * L + y]
    std::vector<double> edge_probs;  // [(t * L + y) * L + y'] for t in [0, T-1)

    double node(std::size_t t, std::size_t y) const { return node_probs[t * label_count + y]; }
    double edge(std::size_t t, std::size_t y, std::size_t y_next) const {
        return edge_probs[(t * label_count + y) * label_count + y_next];
    }
};

inline Marginals marginals(const CrfModel& model, std::span<const FeatureVector> features) {
    detail::check_features(model, features);
    const std::size_t T = features.size(), L = model.num_labels();
    const std::vector<std::vector<double>> em = detail::emission_scores(model, features);
    const std::vector<std::vector<double>> alpha = detail::forward_lattice(model, em);
    const std::vector<std::vector<double>> beta = detail::backward_lattice(model, em);
    const double log_z = detail::log_sum_exp(alpha.back());

    Marginals m;
    m.length = T;
    m.label_count = L;
    m.node_probs.resize(T * L);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t y = 0; y < L; ++y) m.node_probs[t * L + y] = std::exp(alpha[t][y] + beta[t][y] - log_z);
    if (T > 1) {
        m.edge_probs.resize((T - 1) * L * L);
        for (std::size_t t = 0; t + 1 < T; ++t)
            for (std::size_t y = 0; y < L; ++y)
                for (std::size_t n = 0; n < L; ++n)
                    m.edge_probs[(t * L + y) * L + n] = std::exp(alpha[t][y] + model.transition_weight(y, n) +
                                                                 em[t + 1][n] + beta[t + 1][n] - log_z);
    }
    return m;
}

/// Max-product decoding. Ties at each backtrack decision (and at the final
/// position) prefer the lowest label index, so zero weights decode to all-O.
inline std::vector<int> viterbi(const CrfModel& model, std::span<const FeatureVector> features) {
    detail::check_features(model, features);
    const std::size_t T = features.size(), L = model.num_labels();
    const std::vector<std::vector<double>> em = detail::emission_scores(model, features);
    std::vector<std::vector<double>> delta(T, std::vector<double>(L));
    std::vector<std::vector<int>> backpointer(T, std::vector<int>(L, 0));
    delta[0] = em[0];
    for (std::size_t t = 1; t < T; ++t)
        for (std::size_t y = 0; y < L; ++y) {
            double best = -std::numeric_limits<double>::infinity();
            int best_prev = 0;
            for (std::size_t p = 0; p < L; ++p) {
                const double cand = delta[t - 1][p] + model.transition_weight(p, y);
                if (cand > best) {
                    best = cand;
                    best_prev = static_cast<int>(p);
                }
            }
            delta[t][y] = best + em[t][y];
            backpointer[t][y] = best_prev;
        }
    std::size_t best_final = 0;
    for (std::size_t y = 1; y < L; ++y)
        if (delta[T - 1][y] > delta[T - 1][best_final]) best_final = y;
    std::vector<int> path(T);
    path[T - 1] = static_cast<int>(best_final);
    for (std::size_t t = T - 1; t > 0; --t) path[t - 1] = backpointer[t][static_cast<std::size_t>(path[t])];
    return path;
}

}  // namespace deid
