#include <doctest.h>

#include <cmath>
#include <vector>

#include "deid/crf.hpp"
#include "deid/train.hpp"
#include "oracles.hpp"

using deid::CrfModel;
using deid::FeatureTable;
using deid::log_likelihood_and_gradient;
using deid::Sequence;
using deid::TrainConfig;

namespace {

std::vector<Sequence> random_dataset(std::size_t count, std::size_t max_len, std::size_t num_features,
                                     std::size_t num_labels, deid::SplitMix64& rng) {
    std::vector<Sequence> data;
    for (std::size_t i = 0; i < count; ++i) {
        Sequence seq;
        const std::size_t T = 1 + rng.next_below(max_len);
        seq.features = oracles::random_features(T, num_features, rng);
        for (std::size_t t = 0; t < T; ++t) seq.labels.push_back(static_cast<int>(rng.next_below(num_labels)));
        data.push_back(std::move(seq));
    }
    return data;
}

/// Separable toy problem: label y's tokens carry feature y exclusively.
std::vector<Sequence> separable_dataset(std::size_t count, std::size_t num_labels, deid::SplitMix64& rng) {
    std::vector<Sequence> data;
    for (std::size_t i = 0; i < count; ++i) {
        Sequence seq;
        const std::size_t T = 2 + rng.next_below(5);
        for (std::size_t t = 0; t < T; ++t) {
            const int y = static_cast<int>(rng.next_below(num_labels));
            seq.features.push_back({static_cast<std::uint32_t>(y)});
            seq.labels.push_back(y);
        }
        data.push_back(std::move(seq));
    }
    return data;
}

}  // namespace

TEST_CASE("uniform model objective is -T log L") {
    const CrfModel model = []() {
        FeatureTable table;
        table.add_or_get("f0");
        table.freeze();
        return CrfModel::zeros({"O", "A", "B"}, std::move(table));
    }();
    std::vector<Sequence> data = {Sequence{{{0}}, {1}}};
    const auto [objective, gradient] = log_likelihood_and_gradient(model, data, 0.0);
    CHECK(objective == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("regularizer contributes nothing at w = 0") {
    deid::SplitMix64 rng(21);
    const CrfModel model = [] {
        FeatureTable table;
        for (int f = 0; f < 4; ++f) table.add_or_get("f" + std::to_string(f));
        table.freeze();
        return CrfModel::zeros({"O", "A", "B"}, std::move(table));
    }();
    std::vector<Sequence> data = random_dataset(5, 6, 4, 3, rng);
    const auto [obj_plain, grad_plain] = log_likelihood_and_gradient(model, data, 0.0);
    const auto [obj_reg, grad_reg] = log_likelihood_and_gradient(model, data, 10.0);
    CHECK(obj_plain == obj_reg);
    CHECK(grad_plain == grad_reg);
}

TEST_CASE("analytic gradient matches central finite differences") {
    deid::SplitMix64 rng(99);
    for (const double lambda : {0.0, 0.1}) {
        CrfModel model = oracles::random_model(6, 3, rng, -1.0, 1.0);
        std::vector<Sequence> data = random_dataset(20, 10, 6, 3, rng);
        const auto [objective, gradient] = log_likelihood_and_gradient(model, data, lambda);
        REQUIRE(gradient.size() == model.emission.size() + model.transition.size());

        const double h = 1e-5;
        auto objective_at = [&](std::size_t k, double delta) {
            CrfModel perturbed = model;
            if (k < model.emission.size())
                perturbed.emission[k] += delta;
            else
                perturbed.transition[k - model.emission.size()] += delta;
            return deid::log_likelihood(perturbed, data, lambda);
        };
        for (std::size_t k = 0; k < gradient.size(); ++k) {
            const double fd = (objective_at(k, h) - objective_at(k, -h)) / (2.0 * h);
            const double tol = 1e-5 * std::max({1.0, std::abs(fd), std::abs(gradient[k])});
            CHECK(std::abs(fd - gradient[k]) <= tol);
        }
    }
}

TEST_CASE("training separates a separable toy problem") {
    deid::SplitMix64 rng(1234);
    std::vector<Sequence> data = separable_dataset(50, 4, rng);
    FeatureTable table;
    for (int f = 0; f < 4; ++f) table.add_or_get("f" + std::to_string(f));
    table.freeze();
    TrainConfig config;
    config.l2_lambda = 0.01;
    config.max_iterations = 150;
    const CrfModel model = deid::train(data, {"O", "A", "B", "C"}, std::move(table), config);
    std::size_t correct = 0, total = 0;
    for (const Sequence& seq : data) {
        const std::vector<int> predicted = deid::viterbi(model, seq.features);
        for (std::size_t t = 0; t < seq.labels.size(); ++t) {
            correct += predicted[t] == seq.labels[t];
            ++total;
        }
    }
    CHECK(double(correct) / double(total) >= 0.99);
}

TEST_CASE("huge regularization pins weights near zero") {
    deid::SplitMix64 rng(55);
    std::vector<Sequence> data = separable_dataset(20, 3, rng);
    FeatureTable table;
    for (int f = 0; f < 3; ++f) table.add_or_get("f" + std::to_string(f));
    table.freeze();
    TrainConfig config;
    config.l2_lambda = 1e6;
    config.max_iterations = 100;
    const CrfModel model = deid::train(data, {"O", "A", "B"}, std::move(table), config);
    for (double w : model.emission) CHECK(std::abs(w) < 0.01);
    for (double w : model.transition) CHECK(std::abs(w) < 0.01);
}

TEST_CASE("iteration cap stops training with the right reason") {
    deid::SplitMix64 rng(66);
    std::vector<Sequence> data = separable_dataset(10, 3, rng);
    FeatureTable table;
    for (int f = 0; f < 3; ++f) table.add_or_get("f" + std::to_string(f));
    table.freeze();
    TrainConfig config;
    config.max_iterations = 1;
    const CrfModel model = deid::train(data, {"O", "A", "B"}, std::move(table), config);
    CHECK(model.meta.iterations == 1);
    CHECK(model.meta.stopping_reason == "max_iterations");
}

TEST_CASE("gradient stop implies a small gradient") {
    deid::SplitMix64 rng(67);
    std::vector<Sequence> data = separable_dataset(10, 3, rng);
    FeatureTable table;
    for (int f = 0; f < 3; ++f) table.add_or_get("f" + std::to_string(f));
    table.freeze();
    TrainConfig config;
    config.l2_lambda = 0.5;  // strongly convex, so the gradient criterion triggers
    config.max_iterations = 500;
    config.tol_objective = 1e-14;
    config.tol_gradient = 1e-4;
    const CrfModel model = deid::train(data, {"O", "A", "B"}, std::move(table), config);
    REQUIRE(model.meta.stopping_reason == "gradient");
    const auto [objective, gradient] = log_likelihood_and_gradient(model, data, config.l2_lambda);
    double inf_norm = 0.0;
    for (double g : gradient) inf_norm = std::max(inf_norm, std::abs(g));
    CHECK(inf_norm < config.tol_gradient);
}

TEST_CASE("empty dataset is rejected") {
    FeatureTable table;
    table.add_or_get("f0");
    table.freeze();
    CHECK_THROWS_AS(deid::train(std::vector<Sequence>{}, {"O", "A"}, std::move(table), TrainConfig{}),
                    deid::EmptyDataset);
}

TEST_CASE("training is deterministic and thread-count invariant") {
    deid::SplitMix64 rng(88);
    std::vector<Sequence> data = separable_dataset(200, 4, rng);
    auto run = [&data](int threads) {
        FeatureTable table;
        for (int f = 0; f < 4; ++f) table.add_or_get("f" + std::to_string(f));
        table.freeze();
        TrainConfig config;
        config.max_iterations = 40;
        config.threads = threads;
        return deid::train(data, {"O", "A", "B", "C"}, std::move(table), config);
    };
    const CrfModel reference = run(1);
    const CrfModel repeat = run(1);
    const CrfModel threaded = run(4);
    CHECK(reference.emission == repeat.emission);
    CHECK(reference.transition == repeat.transition);
    CHECK(reference.emission == threaded.emission);
    CHECK(reference.transition == threaded.transition);
}
