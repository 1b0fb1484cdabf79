#pragma once

#include <iomanip>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "deid/error.hpp"
#include "deid/note.hpp"
#include "deid/surrogate.hpp"

namespace deid {

struct CategoryMetrics {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    /// Zero-denominator rule: a vacuous side (no predictions / no gold)
    /// scores 1 only when the other side is also empty, else 0; F1 is 0
    /// when P + R = 0.
    void derive() {
        precision = (tp + fp) == 0 ? (fn == 0 ? 1.0 : 0.0) : double(tp) / double(tp + fp);
        recall = (tp + fn) == 0 ? (fp == 0 ? 1.0 : 0.0) : double(tp) / double(tp + fn);
        f1 = (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    }
    friend bool operator==(const CategoryMetrics&, const CategoryMetrics&) = default;
};

/// Token-level counts and derived scores per PHI category plus the
/// micro-average (computed from summed counts, not averaged ratios).
struct MetricsReport {
    std::map<std::string, CategoryMetrics> per_category;
    CategoryMetrics micro;
};

namespace detail {

inline void check_alignment(std::span<const LabeledNote> gold, std::span<const std::vector<int>> predicted) {
    if (gold.size() != predicted.size())
        throw AlignmentError("gold has " + std::to_string(gold.size()) + " notes, predictions have " +
                             std::to_string(predicted.size()));
    for (std::size_t i = 0; i < gold.size(); ++i)
        if (gold[i].token_labels.size() != predicted[i].size())
            throw AlignmentError("note " + gold[i].note.note_id + ": " + std::to_string(gold[i].token_labels.size()) +
                                 " gold tokens vs " + std::to_string(predicted[i].size()) + " predicted labels");
}

}  // namespace detail

/// Token-level counts for one category: tp where both sides equal the
/// category, fp where only the prediction does, fn where only the gold does.
inline CategoryMetrics token_prf(std::span<const LabeledNote> gold, std::span<const std::vector<int>> predicted,
                                 int label) {
    detail::check_alignment(gold, predicted);
    CategoryMetrics m;
    for (std::size_t i = 0; i < gold.size(); ++i)
        for (std::size_t t = 0; t < predicted[i].size(); ++t) {
            const bool in_gold = gold[i].token_labels[t] == label;
            const bool in_pred = predicted[i][t] == label;
            if (in_gold && in_pred) ++m.tp;
            else if (in_pred) ++m.fp;
            else if (in_gold) ++m.fn;
        }
    m.derive();
    return m;
}

/// Full report over all PHI categories (label O excluded from scoring).
inline MetricsReport evaluate(std::span<const LabeledNote> gold, std::span<const std::vector<int>> predicted) {
    detail::check_alignment(gold, predicted);
    MetricsReport report;
    for (std::size_t label = 1; label < kNumLabels; ++label) {
        CategoryMetrics m = token_prf(gold, predicted, static_cast<int>(label));
        report.micro.tp += m.tp;
        report.micro.fp += m.fp;
        report.micro.fn += m.fn;
        report.per_category.emplace(std::string(kLabelNames[label]), std::move(m));
    }
    report.micro.derive();
    return report;
}

inline std::string render_metrics(const MetricsReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(14) << "category" << std::right << std::setw(11) << "precision" << std::setw(8)
        << "recall" << std::setw(8) << "f1" << '\n';
    out << std::fixed << std::setprecision(2);
    auto row = [&out](const std::string& name, const CategoryMetrics& m) {
        out << std::left << std::setw(14) << name << std::right << std::setw(11) << m.precision << std::setw(8)
            << m.recall << std::setw(8) << m.f1 << '\n';
    };
    for (const auto& [name, m] : report.per_category) row(name, m);
    row("micro", report.micro);
    return out.str();
}

/// CSV schema: category,size,tp,fp,fn,precision,recall,f1. `size` is the
/// training-set size for learning-curve output; standalone evaluation
/// writes 0.
inline void write_metrics_csv_rows(std::ostream& out, const MetricsReport& report, std::size_t size) {
    out << std::fixed << std::setprecision(6);
    auto row = [&out, size](const std::string& name, const CategoryMetrics& m) {
        out << name << ',' << size << ',' << m.tp << ',' << m.fp << ',' << m.fn << ',' << m.precision << ','
            << m.recall << ',' << m.f1 << '\n';
    };
    for (const auto& [name, m] : report.per_category) row(name, m);
    row("micro", report.micro);
}

inline void write_metrics_csv(std::ostream& out, const MetricsReport& report, std::size_t size = 0) {
    out << "category,size,tp,fp,fn,precision,recall,f1\n";
    write_metrics_csv_rows(out, report, size);
}

}  // namespace deid
