#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pathnet/common.hpp"
#include "pathnet/tensor.hpp"

namespace pathnet {

struct ConfusionMatrix {
    int num_classes = 0;
    std::vector<long long> counts;  // rows = true class, cols = predicted

    explicit ConfusionMatrix(int classes)
        : num_classes(classes),
          counts(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0) {}

    long long& at(int truth, int pred) {
        return counts[static_cast<std::size_t>(truth) * num_classes + pred];
    }
    long long at(int truth, int pred) const {
        return counts[static_cast<std::size_t>(truth) * num_classes + pred];
    }

    void add(int truth, int pred) { ++at(truth, pred); }

    long long total() const { return std::accumulate(counts.begin(), counts.end(), 0LL); }
};

inline double accuracy(const ConfusionMatrix& cm) {
    const long long n = cm.total();
    if (n == 0) throw ContractError("accuracy: empty confusion matrix");
    long long diag = 0;
    for (int c = 0; c < cm.num_classes; ++c) diag += cm.at(c, c);
    return static_cast<double>(diag) / static_cast<double>(n);
}

struct ClassRates {
    double sensitivity = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
    bool degenerate = false;  // some 0/0 ratio was forced to 0
};

// One-vs-rest rates for `positive`; 0/0 ratios are defined as 0 and flagged.
inline ClassRates sens_spec_f1(const ConfusionMatrix& cm, int positive) {
    if (positive < 0 || positive >= cm.num_classes) {
        throw ContractError("sens_spec_f1: class " + std::to_string(positive) + " out of range");
    }
    long long tp = 0, fn = 0, fp = 0, tn = 0;
    for (int t = 0; t < cm.num_classes; ++t) {
        for (int p = 0; p < cm.num_classes; ++p) {
            const long long c = cm.at(t, p);
            if (t == positive && p == positive) tp += c;
            else if (t == positive) fn += c;
            else if (p == positive) fp += c;
            else tn += c;
        }
    }
    ClassRates r;
    auto ratio = [&r](long long num, long long den) {
        if (den == 0) {
            r.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.sensitivity = ratio(tp, tp + fn);
    r.specificity = ratio(tn, tn + fp);
    const double precision = ratio(tp, tp + fp);
    const double recall = r.sensitivity;
    r.f1 = (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    return r;
}

// Binary when C == 2 (class 1 positive); macro one-vs-rest otherwise.
inline ClassRates macro_sens_spec_f1(const ConfusionMatrix& cm) {
    if (cm.num_classes == 2) return sens_spec_f1(cm, 1);
    ClassRates acc;
    for (int c = 0; c < cm.num_classes; ++c) {
        const ClassRates r = sens_spec_f1(cm, c);
        acc.sensitivity += r.sensitivity;
        acc.specificity += r.specificity;
        acc.f1 += r.f1;
        acc.degenerate = acc.degenerate || r.degenerate;
    }
    acc.sensitivity /= cm.num_classes;
    acc.specificity /= cm.num_classes;
    acc.f1 /= cm.num_classes;
    return acc;
}

// Rank-based (Mann-Whitney) AUC with tie correction: ties contribute 1/2
// through average ranks. Equals trapezoidal ROC integration.
inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw ContractError("roc_auc: length mismatch");
    const std::size_t n = scores.size();
    long long pos = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw ContractError("roc_auc: labels must be 0/1");
        pos += l;
    }
    const long long neg = static_cast<long long>(n) - pos;
    if (pos == 0 || neg == 0) {
        throw DataError("roc_auc: undefined, only one class present");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        }
        i = j;
    }
    const double u = rank_sum_pos - 0.5 * static_cast<double>(pos) * (static_cast<double>(pos) + 1.0);
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

// Macro one-vs-rest AUC over per-class probabilities [n x C].
inline double macro_ovr_auc(const std::vector<std::vector<double>>& probs,
                            const std::vector<int>& labels, int num_classes) {
    if (num_classes == 2) {
        std::vector<double> scores;
        scores.reserve(probs.size());
        for (const auto& p : probs) scores.push_back(p[1]);
        return roc_auc(scores, labels);
    }
    double total = 0.0;
    for (int c = 0; c < num_classes; ++c) {
        std::vector<double> scores;
        std::vector<int> ovr;
        scores.reserve(probs.size());
        ovr.reserve(labels.size());
        for (std::size_t i = 0; i < probs.size(); ++i) {
            scores.push_back(probs[i][static_cast<std::size_t>(c)]);
            ovr.push_back(labels[i] == c ? 1 : 0);
        }
        total += roc_auc(scores, ovr);
    }
    return total / num_classes;
}

struct MetricsRow {
    double acc = 0.0;
    double auc = 0.0;
    double f1 = 0.0;
    double sen = 0.0;
    double spe = 0.0;
};

inline int argmax_class(const std::vector<double>& probs) {
    int best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c) {
        if (probs[c] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    return best;
}

// ACC/AUC/F1/SEN/SPE from per-subject class probabilities.
inline MetricsRow evaluate_metrics(const std::vector<std::vector<double>>& probs,
                                   const std::vector<int>& labels, int num_classes) {
    if (probs.size() != labels.size() || probs.empty()) {
        throw ContractError("evaluate_metrics: empty or mismatched inputs");
    }
    ConfusionMatrix cm(num_classes);
    for (std::size_t i = 0; i < probs.size(); ++i) cm.add(labels[i], argmax_class(probs[i]));
    const ClassRates rates = macro_sens_spec_f1(cm);
    MetricsRow row;
    row.acc = accuracy(cm);
    row.auc = macro_ovr_auc(probs, labels, num_classes);
    row.f1 = rates.f1;
    row.sen = rates.sensitivity;
    row.spe = rates.specificity;
    return row;
}

}  // namespace pathnet
