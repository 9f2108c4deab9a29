#pragma once

// Metrics: AUROC (trapezoidal ROC with tie handling), confusion-matrix
// derived classification metrics, detection-time statistics.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdd::eval {

// Trapezoidal ROC integration; tied scores advance TP and FP together, which
// makes the result equal to the Mann-Whitney pair statistic
// P(s_pos > s_neg) + 0.5 P(tie).
inline double auroc(const std::vector<double>& scores,
                    const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("auroc: bad inputs");
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auroc: both classes required");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    double area = 0.0;
    double tp = 0.0, fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        double dtp = 0.0, dfp = 0.0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] ? dtp : dfp) += 1.0;
            ++j;
        }
        // trapezoid over the tie group
        area += dfp * (tp + 0.5 * dtp);
        tp += dtp;
        fp += dfp;
        i = j;
    }
    (void)fp;
    return area / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct BinaryMetrics {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

    double fpr() const { return fp + tn ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0; }
    double fnr() const { return fn + tp ? static_cast<double>(fn) / static_cast<double>(fn + tp) : 0.0; }
    double accuracy() const {
        auto total = tp + fp + tn + fn;
        return total ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
    }
    double precision() const { return tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0; }
    double recall() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
    double f1() const {
        double p = precision(), r = recall();
        return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }

    void add(bool truth, bool pred) {
        if (truth)
            (pred ? tp : fn)++;
        else
            (pred ? fp : tn)++;
    }
};

struct ConfusionMatrix {
    std::vector<int> labels;                 // class labels, ordered
    std::vector<std::vector<std::int64_t>> counts; // [true][pred]

    explicit ConfusionMatrix(std::vector<int> lbls = {}) : labels(std::move(lbls)) {
        counts.assign(labels.size(), std::vector<std::int64_t>(labels.size(), 0));
    }

    std::size_t index(int label) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) return i;
        throw std::invalid_argument("ConfusionMatrix: unknown label");
    }

    void add(int truth, int pred) { counts[index(truth)][index(pred)]++; }

    std::int64_t total() const {
        std::int64_t t = 0;
        for (const auto& row : counts)
            for (auto v : row) t += v;
        return t;
    }

    double accuracy() const {
        std::int64_t diag = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) diag += counts[i][i];
        auto t = total();
        return t ? static_cast<double>(diag) / static_cast<double>(t) : 0.0;
    }
};

struct Stats {
    double min = 0.0, max = 0.0, mean = 0.0, stddev = 0.0;
    std::size_t count = 0;

    static Stats of(const std::vector<double>& v) {
        Stats s;
        s.count = v.size();
        if (v.empty()) return s;
        s.min = *std::min_element(v.begin(), v.end());
        s.max = *std::max_element(v.begin(), v.end());
        double acc = 0.0;
        for (double x : v) acc += x;
        s.mean = acc / static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(var / static_cast<double>(v.size()));
        return s;
    }
};

} // namespace fdd::eval
