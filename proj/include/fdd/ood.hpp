#pragma once

// Inductive conformal anomaly detection on the reconstruction error e.
// The window threshold is the order statistic of rank ceil((n+1)(1-alpha))
// (1-indexed) over the calibration errors; a trajectory is warned when more
// than thr_ood_cs of its windows are flagged.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fdd::ood {

struct ConformalThreshold {
    double thr_ood = 0.0;
    double alpha = 0.01;
    std::size_t n = 0;
    std::vector<double> calibration_errors; // sorted ascending
};

inline ConformalThreshold calibrate(std::vector<double> errors, double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("ood::calibrate: alpha must be in (0,1)");
    const std::size_t n = errors.size();
    auto rank = static_cast<std::size_t>(
        std::ceil((static_cast<double>(n) + 1.0) * (1.0 - alpha) - 1e-9));
    if (n == 0 || rank > n)
        throw std::invalid_argument("ood::calibrate: too few calibration samples for alpha");
    std::sort(errors.begin(), errors.end());
    ConformalThreshold t;
    t.alpha = alpha;
    t.n = n;
    t.thr_ood = errors[rank - 1];
    t.calibration_errors = std::move(errors);
    return t;
}

// strict inequality: e == thr_ood is in-distribution
inline bool is_ood(const ConformalThreshold& thr, double e) {
    return e > thr.thr_ood;
}

struct OodTrajectoryState {
    int n_ood = 0;
    int thr_ood_cs = 100;
    bool warned = false;

    void step(bool window_flag) {
        if (window_flag) ++n_ood;
        if (n_ood > thr_ood_cs) warned = true;
    }

    void reset() {
        n_ood = 0;
        warned = false;
    }
};

} // namespace fdd::ood
