#pragma once

// Post-hoc probability calibration: Platt scaling, isotonic regression
// (pool-adjacent-violators), one-vs-all extension for multiclass, and the
// ECE / MCE / Brier calibration metrics with quantile reliability binning.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fdd::calib {

enum class Method { Identity, Platt, Isotonic };

// Binary score -> probability map. Isotonic evaluation interpolates
// linearly between breakpoints and clamps at the ends.
struct Calibrator {
    Method kind = Method::Identity;
    // Platt
    double a = 1.0, b = 0.0;
    // isotonic
    std::vector<double> breakpoints; // increasing scores
    std::vector<double> values;      // non-decreasing fitted values

    double apply(double s) const {
        switch (kind) {
            case Method::Identity:
                return s;
            case Method::Platt:
                return 1.0 / (1.0 + std::exp(-(a * s + b)));
            case Method::Isotonic: {
                if (breakpoints.empty()) return s;
                if (s <= breakpoints.front()) return values.front();
                if (s >= breakpoints.back()) return values.back();
                auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), s);
                auto hi = static_cast<std::size_t>(it - breakpoints.begin());
                std::size_t lo = hi - 1;
                double span = breakpoints[hi] - breakpoints[lo];
                double t = span > 0.0 ? (s - breakpoints[lo]) / span : 0.0;
                return values[lo] + t * (values[hi] - values[lo]);
            }
        }
        return s;
    }
};

namespace detail {
inline void require_both_classes(const std::vector<int>& y) {
    bool has0 = false, has1 = false;
    for (int v : y) (v ? has1 : has0) = true;
    if (!has0 || !has1)
        throw std::invalid_argument("calibration: both classes required");
}
} // namespace detail

// Logistic fit p = sigmoid(a*s + b) minimizing log-loss (Newton steps).
inline Calibrator fit_platt(const std::vector<double>& scores,
                            const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("fit_platt: bad inputs");
    detail::require_both_classes(labels);

    const std::size_t n = scores.size();
    double a = 1.0, b = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = scores[i];
            double p = 1.0 / (1.0 + std::exp(-(a * s + b)));
            double d = p - (labels[i] ? 1.0 : 0.0);
            double w = std::max(p * (1.0 - p), 1e-12);
            ga += d * s;
            gb += d;
            haa += w * s * s;
            hab += w * s;
            hbb += w;
        }
        // 2x2 Newton solve with a small ridge
        haa += 1e-9;
        hbb += 1e-9;
        double det = haa * hbb - hab * hab;
        if (std::fabs(det) < 1e-300) break;
        double da = (hbb * ga - hab * gb) / det;
        double db = (haa * gb - hab * ga) / det;
        a -= da;
        b -= db;
        if (std::fabs(da) < 1e-10 && std::fabs(db) < 1e-10) break;
    }
    Calibrator c;
    c.kind = Method::Platt;
    c.a = a;
    c.b = b;
    return c;
}

// Weighted PAVA on (x, y, w) sorted by x; ties on x are pooled first.
inline void pava(std::vector<double>& x, std::vector<double>& y,
                 std::vector<double>& w) {
    // group equal x
    std::vector<double> gx, gy, gw;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!gx.empty() && x[i] == gx.back()) {
            double tw = gw.back() + w[i];
            gy.back() = (gy.back() * gw.back() + y[i] * w[i]) / tw;
            gw.back() = tw;
        } else {
            gx.push_back(x[i]);
            gy.push_back(y[i]);
            gw.push_back(w[i]);
        }
    }
    // pool adjacent violators
    std::vector<double> bx, by, bw, bcount;
    for (std::size_t i = 0; i < gx.size(); ++i) {
        bx.push_back(gx[i]);
        by.push_back(gy[i]);
        bw.push_back(gw[i]);
        bcount.push_back(1.0);
        while (by.size() > 1 && by[by.size() - 2] >= by.back()) {
            double tw = bw[bw.size() - 2] + bw.back();
            by[by.size() - 2] = (by[by.size() - 2] * bw[bw.size() - 2] +
                                 by.back() * bw.back()) / tw;
            bw[bw.size() - 2] = tw;
            bcount[bcount.size() - 2] += bcount.back();
            by.pop_back();
            bw.pop_back();
            bx.pop_back();
            bcount.pop_back();
        }
    }
    // expand back to group resolution
    x = std::move(gx);
    y.clear();
    w = std::move(gw);
    std::size_t gi = 0;
    for (std::size_t blk = 0; blk < by.size(); ++blk)
        for (int c = 0; c < static_cast<int>(bcount[blk]); ++c, ++gi)
            y.push_back(by[blk]);
}

inline Calibrator fit_isotonic(const std::vector<double>& scores,
                               const std::vector<int>& labels,
                               const std::vector<double>& weights = {}) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("fit_isotonic: bad inputs");
    detail::require_both_classes(labels);

    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });
    std::vector<double> x(n), y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = scores[order[i]];
        y[i] = labels[order[i]] ? 1.0 : 0.0;
        w[i] = weights.empty() ? 1.0 : weights[order[i]];
    }
    pava(x, y, w);
    Calibrator c;
    c.kind = Method::Isotonic;
    c.breakpoints = std::move(x);
    c.values = std::move(y);
    return c;
}

// Isotonic fit of arbitrary real targets (used by the test oracles too).
inline std::vector<double> isotonic_fit_targets(std::vector<double> x,
                                                std::vector<double> y,
                                                std::vector<double> w) {
    pava(x, y, w);
    return y;
}

inline Calibrator fit(Method m, const std::vector<double>& scores,
                      const std::vector<int>& labels) {
    switch (m) {
        case Method::Identity: return Calibrator{};
        case Method::Platt: return fit_platt(scores, labels);
        case Method::Isotonic: return fit_isotonic(scores, labels);
    }
    return Calibrator{};
}

struct ReliabilityBin {
    double mean_predicted = 0.0; // e_i
    double frac_positive = 0.0;  // o_i
    double mass = 0.0;           // pi_i
};

struct ReliabilityData {
    std::vector<ReliabilityBin> bins;
    int n_bins = 5;
};

// Quantile binning: equal-count bins over the predicted probabilities.
inline ReliabilityData reliability(const std::vector<double>& probs,
                                   const std::vector<int>& labels,
                                   int n_bins = 5) {
    if (probs.size() != labels.size() || probs.empty())
        throw std::invalid_argument("reliability: bad inputs");
    const std::size_t n = probs.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return probs[a] < probs[b];
    });
    ReliabilityData rd;
    rd.n_bins = n_bins;
    std::size_t pos = 0;
    for (int b = 0; b < n_bins; ++b) {
        std::size_t end = (static_cast<std::size_t>(b) + 1) * n / static_cast<std::size_t>(n_bins);
        if (end <= pos) continue; // degenerate bin when n < n_bins
        ReliabilityBin bin;
        for (std::size_t i = pos; i < end; ++i) {
            bin.mean_predicted += probs[order[i]];
            bin.frac_positive += labels[order[i]] ? 1.0 : 0.0;
        }
        double cnt = static_cast<double>(end - pos);
        bin.mean_predicted /= cnt;
        bin.frac_positive /= cnt;
        bin.mass = cnt / static_cast<double>(n);
        rd.bins.push_back(bin);
        pos = end;
    }
    return rd;
}

inline double ece(const ReliabilityData& rd) {
    if (rd.bins.empty()) throw std::invalid_argument("ece: empty bins");
    double acc = 0.0;
    for (const auto& b : rd.bins)
        acc += b.mass * std::fabs(b.frac_positive - b.mean_predicted);
    return acc;
}

inline double mce(const ReliabilityData& rd) {
    if (rd.bins.empty()) throw std::invalid_argument("mce: empty bins");
    double mx = 0.0;
    for (const auto& b : rd.bins)
        mx = std::max(mx, std::fabs(b.frac_positive - b.mean_predicted));
    return mx;
}

inline double brier(const std::vector<double>& probs,
                    const std::vector<int>& labels) {
    if (probs.size() != labels.size() || probs.empty())
        throw std::invalid_argument("brier: bad inputs");
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        double d = (labels[i] ? 1.0 : 0.0) - probs[i];
        acc += d * d;
    }
    return acc / static_cast<double>(probs.size());
}

// One-vs-all multiclass calibration: per-class binary calibrators, then row
// renormalization.
struct MulticlassCalibrator {
    std::vector<Calibrator> per_class;

    std::vector<double> apply(const std::vector<double>& scores) const {
        std::vector<double> out(scores.size());
        double z = 0.0;
        for (std::size_t c = 0; c < scores.size(); ++c) {
            out[c] = std::max(per_class[c].apply(scores[c]), 0.0);
            z += out[c];
        }
        if (z <= 0.0) {
            std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
            return out;
        }
        for (auto& v : out) v /= z;
        return out;
    }
};

inline MulticlassCalibrator calibrate_multiclass(
    const std::vector<std::vector<double>>& scores,
    const std::vector<int>& class_index_labels, int n_classes, Method method) {
    if (n_classes < 2 || scores.empty())
        throw std::invalid_argument("calibrate_multiclass: bad inputs");
    MulticlassCalibrator mc;
    for (int c = 0; c < n_classes; ++c) {
        std::vector<double> s(scores.size());
        std::vector<int> y(scores.size());
        bool present = false;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            s[i] = scores[i][static_cast<std::size_t>(c)];
            y[i] = (class_index_labels[i] == c) ? 1 : 0;
            present = present || y[i];
        }
        if (!present)
            throw std::invalid_argument("calibrate_multiclass: class absent from calibration set");
        mc.per_class.push_back(fit(method, s, y));
    }
    return mc;
}

} // namespace fdd::calib
