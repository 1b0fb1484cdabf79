#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "deid/crf.hpp"
#include "deid/error.hpp"
#include "deid/parallel.hpp"

namespace deid {

struct TrainConfig {
    double l2_lambda = 0.1;
    int max_iterations = 200;
    double tol_objective = 1e-6;   // relative objective change
    double tol_gradient = 1e-4;    // gradient infinity norm
    std::uint64_t seed = 0;        // reserved for stochastic variants
    int threads = 1;
    bool merged_context = false;   // recorded into model meta

    void validate() const {
        if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
        if (!(tol_objective > 0.0) || !(tol_gradient > 0.0)) throw ConfigError("tolerances must be > 0");
        if (l2_lambda < 0.0) throw ConfigError("l2_lambda must be >= 0");
    }
};

namespace detail {

/// Flat parameter layout: all emission weights then all transition weights.
inline std::size_t param_count(const CrfModel& model) {
    return model.emission.size() + model.transition.size();
}

inline void load_params(CrfModel& model, std::span<const double> w) {
    std::copy(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(model.emission.size()), model.emission.begin());
    std::copy(w.begin() + static_cast<std::ptrdiff_t>(model.emission.size()), w.end(), model.transition.begin());
}

/// Unregularized log-likelihood terms of one block of sequences; gradient may
/// be null for objective-only evaluation.
inline double block_likelihood(const CrfModel& model, std::span<const Sequence> block, std::vector<double>* gradient) {
    const std::size_t L = model.num_labels();
    const std::size_t em_size = model.emission.size();
    double objective = 0.0;
    for (const Sequence& seq : block) {
        const std::size_t T = seq.features.size();
        if (T == 0) continue;
        const std::vector<std::vector<double>> em = emission_scores(model, seq.features);
        const std::vector<std::vector<double>> alpha = forward_lattice(model, em);
        const double log_z = log_sum_exp(alpha.back());
        objective += sequence_score(model, seq.features, seq.labels) - log_z;
        if (!gradient) continue;
        std::vector<double>& g = *gradient;
        const std::vector<std::vector<double>> beta = backward_lattice(model, em);
        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t gold = static_cast<std::size_t>(seq.labels[t]);
            for (std::uint32_t f : seq.features[t]) g[f * L + gold] += 1.0;
            if (t > 0) {
                const std::size_t prev = static_cast<std::size_t>(seq.labels[t - 1]);
                g[em_size + prev * L + gold] += 1.0;
            }
            for (std::size_t y = 0; y < L; ++y) {
                const double p = std::exp(alpha[t][y] + beta[t][y] - log_z);
                for (std::uint32_t f : seq.features[t]) g[f * L + y] -= p;
            }
            if (t > 0)
                for (std::size_t p = 0; p < L; ++p)
                    for (std::size_t y = 0; y < L; ++y)
                        g[em_size + p * L + y] -= std::exp(alpha[t - 1][p] + model.transition_weight(p, y) + em[t][y] +
                                                           beta[t][y] - log_z);
        }
    }
    return objective;
}

}  // namespace detail

/// Regularized conditional log-likelihood and its gradient over the flat
/// parameter vector. Accumulation is blocked and reduced in block order, so
/// the result is bit-identical at any thread count.
inline std::pair<double, std::vector<double>> log_likelihood_and_gradient(const CrfModel& model,
                                                                          std::span<const Sequence> dataset,
                                                                          double l2_lambda, int threads = 1) {
    if (dataset.empty()) throw EmptyDataset();
    const std::size_t P = detail::param_count(model);
    const std::size_t num_blocks = (dataset.size() + kGradientBlockSize - 1) / kGradientBlockSize;
    std::vector<double> block_obj(num_blocks, 0.0);
    std::vector<std::vector<double>> block_grad(num_blocks);
    for_each_block(dataset.size(), kGradientBlockSize, threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
        block_grad[b].assign(P, 0.0);
        block_obj[b] = detail::block_likelihood(model, dataset.subspan(begin, end - begin), &block_grad[b]);
    });
    double objective = 0.0;
    std::vector<double> gradient(P, 0.0);
    for (std::size_t b = 0; b < num_blocks; ++b) {
        objective += block_obj[b];
        for (std::size_t i = 0; i < P; ++i) gradient[i] += block_grad[b][i];
    }
    if (l2_lambda > 0.0) {
        double norm2 = 0.0;
        for (std::size_t i = 0; i < model.emission.size(); ++i) {
            norm2 += model.emission[i] * model.emission[i];
            gradient[i] -= l2_lambda * model.emission[i];
        }
        for (std::size_t i = 0; i < model.transition.size(); ++i) {
            norm2 += model.transition[i] * model.transition[i];
            gradient[model.emission.size() + i] -= l2_lambda * model.transition[i];
        }
        objective -= 0.5 * l2_lambda * norm2;
    }
    return {objective, std::move(gradient)};
}

/// Objective only, same block-ordered reduction (used by the line search).
inline double log_likelihood(const CrfModel& model, std::span<const Sequence> dataset, double l2_lambda,
                             int threads = 1) {
    if (dataset.empty()) throw EmptyDataset();
    const std::size_t num_blocks = (dataset.size() + kGradientBlockSize - 1) / kGradientBlockSize;
    std::vector<double> block_obj(num_blocks, 0.0);
    for_each_block(dataset.size(), kGradientBlockSize, threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
        block_obj[b] = detail::block_likelihood(model, dataset.subspan(begin, end - begin), nullptr);
    });
    double objective = 0.0;
    for (std::size_t b = 0; b < num_blocks; ++b) objective += block_obj[b];
    if (l2_lambda > 0.0) {
        double norm2 = 0.0;
        for (double w : model.emission) norm2 += w * w;
        for (double w : model.transition) norm2 += w * w;
        objective -= 0.5 * l2_lambda * norm2;
    }
    return objective;
}

/// Batch maximum-likelihood training: L-BFGS (m=7) with Armijo backtracking
/// from w = 0, deterministic at any thread count. The objective never
/// decreases across accepted iterates. Stops on gradient infinity norm,
/// relative objective change, the iteration cap, or a failed line search;
/// the reason lands in meta.stopping_reason.
inline CrfModel train(std::span<const Sequence> dataset, std::vector<std::string> labels, FeatureTable table,
                      const TrainConfig& config = {}) {
    config.validate();
    if (dataset.empty()) throw EmptyDataset();
    if (!table.frozen()) table.freeze();
    CrfModel model = CrfModel::zeros(std::move(labels), std::move(table));
    const std::size_t L = model.num_labels();
    for (const Sequence& seq : dataset) {
        if (seq.features.size() != seq.labels.size()) throw LengthMismatch(seq.features.size(), seq.labels.size());
        for (int y : seq.labels)
            if (y < 0 || static_cast<std::size_t>(y) >= L)
                throw IndexOutOfRange("gold label " + std::to_string(y) + " >= " + std::to_string(L));
    }

    const std::size_t P = detail::param_count(model);
    std::vector<double> w(P, 0.0);

    // Internally minimize f = -objective with textbook L-BFGS.
    auto evaluate = [&](std::span<const double> params, std::vector<double>& grad_out) -> double {
        detail::load_params(model, params);
        auto [obj, grad] = log_likelihood_and_gradient(model, dataset, config.l2_lambda, config.threads);
        if (!std::isfinite(obj)) throw NonFiniteObjective("objective is not finite");
        for (double& g : grad) g = -g;
        grad_out = std::move(grad);
        return -obj;
    };
    auto evaluate_value = [&](std::span<const double> params) -> double {
        detail::load_params(model, params);
        const double obj = log_likelihood(model, dataset, config.l2_lambda, config.threads);
        if (!std::isfinite(obj)) throw NonFiniteObjective("objective is not finite");
        return -obj;
    };

    constexpr std::size_t kMemory = 7;
    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    std::vector<double> grad;
    double f = evaluate(w, grad);
    std::string reason;
    int iterations = 0;

    auto inf_norm = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };

    std::vector<double> direction(P), w_next(P), grad_next;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        if (inf_norm(grad) < config.tol_gradient) {
            reason = "gradient";
            break;
        }
        // Two-loop recursion: direction = -H * grad.
        direction = grad;
        std::vector<double> alpha_coef(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            double dot = 0.0;
            for (std::size_t k = 0; k < P; ++k) dot += s_hist[i][k] * direction[k];
            alpha_coef[i] = rho_hist[i] * dot;
            for (std::size_t k = 0; k < P; ++k) direction[k] -= alpha_coef[i] * y_hist[i][k];
        }
        if (!s_hist.empty()) {
            double sy = 0.0, yy = 0.0;
            for (std::size_t k = 0; k < P; ++k) {
                sy += s_hist.back()[k] * y_hist.back()[k];
                yy += y_hist.back()[k] * y_hist.back()[k];
            }
            const double scale = sy / yy;
            for (double& d : direction) d *= scale;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            double dot = 0.0;
            for (std::size_t k = 0; k < P; ++k) dot += y_hist[i][k] * direction[k];
            const double beta = rho_hist[i] * dot;
            for (std::size_t k = 0; k < P; ++k) direction[k] += (alpha_coef[i] - beta) * s_hist[i][k];
        }
        for (double& d : direction) d = -d;

        double descent = 0.0;
        for (std::size_t k = 0; k < P; ++k) descent += grad[k] * direction[k];
        if (!(descent < 0.0)) {
            // Fall back to steepest descent when curvature information is bad.
            for (std::size_t k = 0; k < P; ++k) direction[k] = -grad[k];
            descent = 0.0;
            for (std::size_t k = 0; k < P; ++k) descent += grad[k] * direction[k];
        }

        double step = s_hist.empty() ? 1.0 / std::max(1.0, inf_norm(grad)) : 1.0;
        constexpr double kArmijo = 1e-4;
        double f_next = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            for (std::size_t k = 0; k < P; ++k) w_next[k] = w[k] + step * direction[k];
            f_next = evaluate_value(w_next);
            if (f_next <= f + kArmijo * step * descent) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            reason = "line_search";
            break;
        }
        ++iterations;
        const double f_prev = f;
        f = evaluate(w_next, grad_next);

        std::vector<double> s(P), y(P);
        double sy = 0.0;
        for (std::size_t k = 0; k < P; ++k) {
            s[k] = w_next[k] - w[k];
            y[k] = grad_next[k] - grad[k];
            sy += s[k] * y[k];
        }
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > kMemory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        w.swap(w_next);
        grad.swap(grad_next);
        if (std::abs(f_prev - f) / std::max(1.0, std::abs(f)) < config.tol_objective) {
            reason = "objective";
            break;
        }
    }
    if (reason.empty()) reason = "max_iterations";

    detail::load_params(model, w);
    model.meta.l2_lambda = config.l2_lambda;
    model.meta.iterations = iterations;
    model.meta.final_objective = -f;
    model.meta.stopping_reason = reason;
    model.meta.merged_context = config.merged_context;
    return model;
}

}  // namespace deid
