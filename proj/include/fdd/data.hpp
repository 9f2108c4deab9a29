#pragma once

// Dataset splitting, min-max scaling, sliding windows and class-imbalance
// resampling (ROS / RUS / SMOTE).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "fdd/common.hpp"
#include "fdd/sim.hpp"

namespace fdd::data {

// Per-channel min-max scaler, fitted on the train split only. Values outside
// the train range are clamped to [0,1]; a degenerate constant channel maps
// to 0.
struct Scaler {
    std::vector<float> mins;
    std::vector<float> maxs;

    float transform(int channel, float v) const {
        float lo = mins[static_cast<std::size_t>(channel)];
        float hi = maxs[static_cast<std::size_t>(channel)];
        if (hi <= lo) return 0.0f;
        float s = (v - lo) / (hi - lo);
        return s < 0.0f ? 0.0f : (s > 1.0f ? 1.0f : s);
    }

    float inverse(int channel, float s) const {
        float lo = mins[static_cast<std::size_t>(channel)];
        float hi = maxs[static_cast<std::size_t>(channel)];
        return lo + s * (hi - lo);
    }
};

inline Scaler fit_scaler(const std::vector<sim::Trajectory>& train) {
    if (train.empty())
        throw std::invalid_argument("fit_scaler: empty training set");
    const int c = sim::kNumChannels;
    Scaler sc;
    sc.mins.assign(static_cast<std::size_t>(c),
                   std::numeric_limits<float>::infinity());
    sc.maxs.assign(static_cast<std::size_t>(c),
                   -std::numeric_limits<float>::infinity());
    for (const auto& t : train) {
        for (int ch = 0; ch < c; ++ch) {
            auto i = static_cast<std::size_t>(ch);
            for (float v : t.channels[i]) {
                sc.mins[i] = std::min(sc.mins[i], v);
                sc.maxs[i] = std::max(sc.maxs[i], v);
            }
        }
    }
    return sc;
}

// One scaled slice of a trajectory; the unit of inference. Channel-major
// layout: values[ch * T + t].
struct Window {
    std::vector<float> values;
    int n_channels = sim::kNumChannels;
    int length = 0;
    int label = 0;
    sim::TrajType traj_type = sim::TrajType::T2;
    std::int64_t traj_id = 0;
    std::int64_t start_index = 0;

    float at(int ch, int t) const {
        return values[static_cast<std::size_t>(ch * length + t)];
    }
};

inline std::vector<Window> windows(const sim::Trajectory& traj,
                                   const Scaler& scaler, int T, int step) {
    if (step < 1) throw std::invalid_argument("windows: step must be >= 1");
    const auto len = static_cast<std::int64_t>(traj.length());
    if (len < T)
        throw std::invalid_argument("windows: trajectory shorter than window");
    const std::int64_t count = (len - T) / step + 1;
    std::vector<Window> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t w = 0; w < count; ++w) {
        Window win;
        win.length = T;
        win.label = traj.label;
        win.traj_type = traj.traj_type;
        win.traj_id = traj.id;
        win.start_index = w * step;
        win.values.resize(static_cast<std::size_t>(sim::kNumChannels * T));
        for (int ch = 0; ch < sim::kNumChannels; ++ch) {
            const auto& series = traj.channels[static_cast<std::size_t>(ch)];
            for (int t = 0; t < T; ++t)
                win.values[static_cast<std::size_t>(ch * T + t)] =
                    scaler.transform(ch, series[static_cast<std::size_t>(win.start_index + t)]);
        }
        out.push_back(std::move(win));
    }
    return out;
}

// Trajectory-level split: train / val / val2 / test. Calibration = val+val2.
struct Split {
    std::vector<sim::Trajectory> train, val, val2, test;
};

inline Split split_trajectories(std::vector<sim::Trajectory> trajs,
                                std::uint64_t seed, double r_train = 0.6,
                                double r_val = 0.1, double r_val2 = 0.1) {
    Rng rng(seed);
    // Fisher-Yates with our deterministic rng
    for (std::size_t i = trajs.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(trajs[i - 1], trajs[j]);
    }
    Split s;
    const std::size_t n = trajs.size();
    auto n_train = static_cast<std::size_t>(std::llround(r_train * static_cast<double>(n)));
    auto n_val = static_cast<std::size_t>(std::llround(r_val * static_cast<double>(n)));
    auto n_val2 = static_cast<std::size_t>(std::llround(r_val2 * static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_train) s.train.push_back(std::move(trajs[i]));
        else if (i < n_train + n_val) s.val.push_back(std::move(trajs[i]));
        else if (i < n_train + n_val + n_val2) s.val2.push_back(std::move(trajs[i]));
        else s.test.push_back(std::move(trajs[i]));
    }
    return s;
}

enum class ResampleMethod { ROS, RUS, SMOTE };

struct FeatureSet {
    std::vector<std::vector<float>> x;
    std::vector<int> y;
};

inline std::map<int, std::vector<std::size_t>> indices_by_class(
    const std::vector<int>& y) {
    std::map<int, std::vector<std::size_t>> by;
    for (std::size_t i = 0; i < y.size(); ++i) by[y[i]].push_back(i);
    return by;
}

inline FeatureSet resample(const std::vector<std::vector<float>>& x,
                           const std::vector<int>& y, ResampleMethod method,
                           std::uint64_t seed, int k_nn = 5) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("resample: bad inputs");
    auto by = indices_by_class(y);
    if (by.size() < 2)
        throw std::invalid_argument("resample: need at least 2 classes");
    std::size_t max_n = 0, min_n = x.size();
    for (const auto& [lbl, idx] : by) {
        max_n = std::max(max_n, idx.size());
        min_n = std::min(min_n, idx.size());
    }

    Rng rng(seed);
    FeatureSet out;

    if (method == ResampleMethod::RUS) {
        for (auto& [lbl, idx] : by) {
            // deterministic subsample without replacement
            std::vector<std::size_t> pool = idx;
            for (std::size_t i = pool.size(); i > 1; --i)
                std::swap(pool[i - 1], pool[static_cast<std::size_t>(rng.below(i))]);
            pool.resize(min_n);
            std::sort(pool.begin(), pool.end());
            for (auto i : pool) {
                out.x.push_back(x[i]);
                out.y.push_back(lbl);
            }
        }
        return out;
    }

    if (method == ResampleMethod::ROS) {
        for (auto& [lbl, idx] : by) {
            for (auto i : idx) {
                out.x.push_back(x[i]);
                out.y.push_back(lbl);
            }
            for (std::size_t j = idx.size(); j < max_n; ++j) {
                out.x.push_back(x[idx[static_cast<std::size_t>(rng.below(idx.size()))]]);
                out.y.push_back(lbl);
            }
        }
        return out;
    }

    // SMOTE: synthetic points x + lambda * (x_nn - x) between a minority
    // sample and one of its k nearest minority neighbors.
    for (auto& [lbl, idx] : by) {
        for (auto i : idx) {
            out.x.push_back(x[i]);
            out.y.push_back(lbl);
        }
        if (idx.size() == max_n) continue;
        if (idx.size() < static_cast<std::size_t>(k_nn) + 1) {
            if (idx.size() < 2)
                throw std::invalid_argument("resample: too few minority samples for SMOTE");
        }
        int k_eff = std::min<int>(k_nn, static_cast<int>(idx.size()) - 1);
        // neighbor lists (Euclidean on flattened features)
        std::vector<std::vector<std::size_t>> nbrs(idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) {
            std::vector<std::pair<double, std::size_t>> d;
            for (std::size_t b = 0; b < idx.size(); ++b) {
                if (a == b) continue;
                double s = 0;
                const auto& xa = x[idx[a]];
                const auto& xb = x[idx[b]];
                for (std::size_t f = 0; f < xa.size(); ++f) {
                    double diff = static_cast<double>(xa[f]) - static_cast<double>(xb[f]);
                    s += diff * diff;
                }
                d.emplace_back(s, b);
            }
            std::sort(d.begin(), d.end());
            for (int k = 0; k < k_eff; ++k) nbrs[a].push_back(d[static_cast<std::size_t>(k)].second);
        }
        for (std::size_t j = idx.size(); j < max_n; ++j) {
            std::size_t a = static_cast<std::size_t>(rng.below(idx.size()));
            std::size_t b = nbrs[a][static_cast<std::size_t>(rng.below(nbrs[a].size()))];
            double lambda = rng.uniform();
            const auto& xa = x[idx[a]];
            const auto& xb = x[idx[b]];
            std::vector<float> xs(xa.size());
            for (std::size_t f = 0; f < xa.size(); ++f)
                xs[f] = static_cast<float>(xa[f] + lambda * (static_cast<double>(xb[f]) - xa[f]));
            out.x.push_back(std::move(xs));
            out.y.push_back(lbl);
        }
    }
    return out;
}

// "balanced" convention: weight_c = N / (n_classes * count_c)
inline std::map<int, double> class_weights(const std::vector<int>& y) {
    if (y.empty()) throw std::invalid_argument("class_weights: empty input");
    std::map<int, std::size_t> counts;
    for (int v : y) counts[v]++;
    std::map<int, double> w;
    double n = static_cast<double>(y.size());
    double k = static_cast<double>(counts.size());
    for (const auto& [lbl, cnt] : counts)
        w[lbl] = n / (k * static_cast<double>(cnt));
    return w;
}

} // namespace fdd::data
