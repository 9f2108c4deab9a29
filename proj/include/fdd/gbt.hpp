#pragma once

// Histogram-based gradient-boosted decision trees, written from scratch.
// Per-feature quantile binning, second-order (gradient/hessian) boosting on
// logistic or softmax loss, best-first tree growth bounded by max depth and
// max leaf count. Ties on split gain break to the lowest feature index,
// then the lowest bin, so fits are deterministic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <vector>

namespace fdd::gbt {

struct GbtConfig {
    int max_iter = 100;
    int max_depth = 6;
    int max_leaf_nodes = 31;
    double min_samples_leaf = 20.0; // weighted count
    double learning_rate = 0.1;
    double l2_regularization = 0.0;
    int n_bins = 255;

    void validate() const {
        if (max_iter < 1 || max_depth < 1 || max_leaf_nodes < 2 ||
            min_samples_leaf < 1 || learning_rate <= 0.0 || n_bins < 2 ||
            l2_regularization < 0.0)
            throw std::invalid_argument("GbtConfig: invalid values");
    }

    // Table-9 style defaults for the two pipeline classifiers.
    static GbtConfig binary_default() {
        return {88, 6, 23, 16.0, 0.05, 0.0, 255};
    }
    static GbtConfig multiclass_default() {
        return {105, 9, 50, 21.0, 0.21, 0.0, 255};
    }
};

struct TreeNode {
    int feature = -1;   // -1 for leaf
    int bin_threshold = 0; // go left if bin <= threshold
    int left = -1, right = -1;
    double value = 0.0; // leaf value (already learning-rate scaled)
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict_binned(const std::vector<std::uint8_t>& bins) const {
        int n = 0;
        while (nodes[static_cast<std::size_t>(n)].feature >= 0) {
            const auto& nd = nodes[static_cast<std::size_t>(n)];
            n = (bins[static_cast<std::size_t>(nd.feature)] <=
                 static_cast<std::uint8_t>(nd.bin_threshold))
                    ? nd.left
                    : nd.right;
        }
        return nodes[static_cast<std::size_t>(n)].value;
    }
};

struct GbtEnsemble {
    GbtConfig cfg;
    int n_features = 0;
    int n_classes = 2; // 2 -> single-score logistic
    std::vector<std::vector<double>> bin_edges; // per feature, upper edges
    std::vector<double> base_score;             // length 1 or n_classes
    std::vector<std::vector<Tree>> trees;       // [iteration][class trees]
    std::vector<int> class_labels;              // original labels per class index

    std::uint8_t bin_of(int feature, double v) const {
        const auto& edges = bin_edges[static_cast<std::size_t>(feature)];
        // edges[i] is the upper boundary of bin i; last bin catches the rest
        auto it = std::upper_bound(edges.begin(), edges.end(), v);
        auto idx = static_cast<std::size_t>(it - edges.begin());
        if (idx >= edges.size() + 1) idx = edges.size();
        return static_cast<std::uint8_t>(std::min<std::size_t>(idx, 254));
    }

    std::vector<double> margins(const std::vector<float>& x) const {
        std::vector<std::uint8_t> bins(static_cast<std::size_t>(n_features));
        for (int f = 0; f < n_features; ++f)
            bins[static_cast<std::size_t>(f)] = bin_of(f, x[static_cast<std::size_t>(f)]);
        int k = (n_classes == 2) ? 1 : n_classes;
        std::vector<double> m(base_score.begin(), base_score.end());
        for (const auto& iter : trees)
            for (int c = 0; c < k; ++c)
                m[static_cast<std::size_t>(c)] += iter[static_cast<std::size_t>(c)].predict_binned(bins);
        return m;
    }

    // probabilities; rows sum to 1 (binary returns {p0, p1})
    std::vector<double> predict_proba(const std::vector<float>& x) const {
        auto m = margins(x);
        if (n_classes == 2) {
            double p1 = 1.0 / (1.0 + std::exp(-m[0]));
            return {1.0 - p1, p1};
        }
        double mx = *std::max_element(m.begin(), m.end());
        double z = 0.0;
        for (auto& v : m) {
            v = std::exp(v - mx);
            z += v;
        }
        for (auto& v : m) v /= z;
        return m;
    }

    int predict_class(const std::vector<float>& x) const {
        auto p = predict_proba(x);
        auto am = static_cast<std::size_t>(
            std::max_element(p.begin(), p.end()) - p.begin());
        return class_labels[am];
    }
};

namespace detail {

// Quantile bin edges with midpoint interpolation between adjacent distinct
// values; at most n_bins bins.
inline std::vector<double> quantile_edges(std::vector<double> vals, int n_bins) {
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::vector<double> edges;
    auto n_distinct = vals.size();
    if (n_distinct <= 1) return edges;
    if (n_distinct <= static_cast<std::size_t>(n_bins)) {
        for (std::size_t i = 0; i + 1 < n_distinct; ++i)
            edges.push_back(0.5 * (vals[i] + vals[i + 1]));
        return edges;
    }
    for (int q = 1; q < n_bins; ++q) {
        auto idx = static_cast<std::size_t>(
            static_cast<double>(q) * static_cast<double>(n_distinct) / n_bins);
        if (idx >= n_distinct) idx = n_distinct - 1;
        double e = 0.5 * (vals[idx - 1] + vals[idx]);
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    return edges;
}

struct HistBin {
    double g = 0.0, h = 0.0, w = 0.0;
};

struct LeafCandidate {
    double gain = -1.0;
    int feature = -1, bin = -1;
    int node = -1;
    int depth = 0;
    std::vector<std::size_t> samples;
};

inline double leaf_objective(double g, double h, double l2) {
    return g * g / (h + l2 + 1e-12);
}

// Best histogram split for one set of samples. Returns gain < 0 when no
// valid split exists.
inline void best_split(const std::vector<std::vector<std::uint8_t>>& binned,
                       const std::vector<double>& grad,
                       const std::vector<double>& hess,
                       const std::vector<double>& weights,
                       const std::vector<std::size_t>& samples, int n_features,
                       double min_leaf_weight, double l2, double& out_gain,
                       int& out_feature, int& out_bin) {
    out_gain = -1.0;
    out_feature = -1;
    out_bin = -1;
    double gt = 0.0, ht = 0.0, wt = 0.0;
    for (auto i : samples) {
        gt += grad[i];
        ht += hess[i];
        wt += weights[i];
    }
    double parent = leaf_objective(gt, ht, l2);
    std::vector<HistBin> hist(256);
    for (int f = 0; f < n_features; ++f) {
        std::fill(hist.begin(), hist.end(), HistBin{});
        int max_bin = 0;
        for (auto i : samples) {
            int b = binned[i][static_cast<std::size_t>(f)];
            hist[static_cast<std::size_t>(b)].g += grad[i];
            hist[static_cast<std::size_t>(b)].h += hess[i];
            hist[static_cast<std::size_t>(b)].w += weights[i];
            max_bin = std::max(max_bin, b);
        }
        double gl = 0.0, hl = 0.0, wl = 0.0;
        for (int b = 0; b < max_bin; ++b) {
            gl += hist[static_cast<std::size_t>(b)].g;
            hl += hist[static_cast<std::size_t>(b)].h;
            wl += hist[static_cast<std::size_t>(b)].w;
            double wr = wt - wl;
            if (wl < min_leaf_weight || wr < min_leaf_weight) continue;
            double gain = 0.5 * (leaf_objective(gl, hl, l2) +
                                 leaf_objective(gt - gl, ht - hl, l2) - parent);
            if (gain > out_gain + 1e-12) {
                out_gain = gain;
                out_feature = f;
                out_bin = b;
            }
        }
    }
}

// Grows one tree, best-first, on (grad, hess).
inline Tree grow_tree(const std::vector<std::vector<std::uint8_t>>& binned,
                      const std::vector<double>& grad,
                      const std::vector<double>& hess,
                      const std::vector<double>& weights,
                      const GbtConfig& cfg) {
    Tree tree;
    const int n_features = static_cast<int>(binned.empty() ? 0 : binned[0].size());
    const double min_w = cfg.min_samples_leaf;

    auto leaf_value = [&](const std::vector<std::size_t>& samples) {
        double g = 0.0, h = 0.0;
        for (auto i : samples) {
            g += grad[i];
            h += hess[i];
        }
        return -cfg.learning_rate * g / (h + cfg.l2_regularization + 1e-12);
    };

    std::vector<std::size_t> all(binned.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    tree.nodes.push_back(TreeNode{});
    tree.nodes[0].value = leaf_value(all);

    struct QEntry {
        double gain;
        std::size_t order; // FIFO tie-break for determinism
        int node, feature, bin, depth;
        std::vector<std::size_t> samples;
        bool operator<(const QEntry& o) const {
            if (gain != o.gain) return gain < o.gain;
            return order > o.order;
        }
    };
    std::priority_queue<QEntry> queue;
    std::size_t order_counter = 0;

    auto enqueue = [&](int node, int depth, std::vector<std::size_t> samples) {
        if (depth >= cfg.max_depth) return;
        double gain;
        int f, b;
        best_split(binned, grad, hess, weights, samples, n_features, min_w,
                   cfg.l2_regularization, gain, f, b);
        if (gain <= 0.0 || f < 0) return;
        queue.push(QEntry{gain, order_counter++, node, f, b, depth, std::move(samples)});
    };

    enqueue(0, 0, std::move(all));
    int n_leaves = 1;

    while (!queue.empty() && n_leaves < cfg.max_leaf_nodes) {
        QEntry e = queue.top();
        queue.pop();
        std::vector<std::size_t> ls, rs;
        for (auto i : e.samples) {
            if (binned[i][static_cast<std::size_t>(e.feature)] <=
                static_cast<std::uint8_t>(e.bin))
                ls.push_back(i);
            else
                rs.push_back(i);
        }
        const int left = static_cast<int>(tree.nodes.size());
        const int right = left + 1;
        // push_back may reallocate, so take no reference across it
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});
        tree.nodes[static_cast<std::size_t>(left)].value = leaf_value(ls);
        tree.nodes[static_cast<std::size_t>(right)].value = leaf_value(rs);
        auto& nd = tree.nodes[static_cast<std::size_t>(e.node)];
        nd.feature = e.feature;
        nd.bin_threshold = e.bin;
        nd.left = left;
        nd.right = right;
        ++n_leaves;
        enqueue(left, e.depth + 1, std::move(ls));
        enqueue(right, e.depth + 1, std::move(rs));
    }
    return tree;
}

} // namespace detail

inline GbtEnsemble fit(const std::vector<std::vector<float>>& x,
                       const std::vector<int>& y,
                       const std::vector<double>& sample_weights,
                       const GbtConfig& cfg) {
    cfg.validate();
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("gbt::fit: bad shapes");
    const std::size_t n = x.size();
    const int n_features = static_cast<int>(x[0].size());
    std::vector<double> w = sample_weights;
    if (w.empty()) w.assign(n, 1.0);
    if (w.size() != n) throw std::invalid_argument("gbt::fit: weight shape");
    for (double v : w)
        if (v < 0.0) throw std::invalid_argument("gbt::fit: negative weight");

    // Integral weights are applied by row replication, which makes a
    // weight-k sample exactly equivalent to k duplicated rows (identical
    // summation order, so bit-identical fits).
    {
        bool integral = false;
        for (double v : w)
            if (v != 1.0) {
                integral = (v == std::floor(v));
                if (!integral) break;
            }
        if (integral) {
            std::vector<std::vector<float>> xe;
            std::vector<int> ye;
            for (std::size_t i = 0; i < n; ++i)
                for (long k = 0; k < static_cast<long>(w[i]); ++k) {
                    xe.push_back(x[i]);
                    ye.push_back(y[i]);
                }
            return fit(xe, ye, {}, cfg);
        }
    }
    for (const auto& row : x)
        for (float v : row)
            if (!std::isfinite(v))
                throw std::invalid_argument("gbt::fit: non-finite feature");

    GbtEnsemble model;
    model.cfg = cfg;
    model.n_features = n_features;

    std::map<int, std::size_t> label_idx;
    for (int v : y) label_idx.emplace(v, 0);
    if (label_idx.size() < 2)
        throw std::invalid_argument("gbt::fit: single-class targets");
    {
        std::size_t k = 0;
        for (auto& [lbl, idx] : label_idx) {
            idx = k++;
            model.class_labels.push_back(lbl);
        }
    }
    const int n_classes = static_cast<int>(label_idx.size());
    model.n_classes = n_classes;

    // binning
    model.bin_edges.resize(static_cast<std::size_t>(n_features));
    for (int f = 0; f < n_features; ++f) {
        std::vector<double> vals(n);
        for (std::size_t i = 0; i < n; ++i) vals[i] = x[i][static_cast<std::size_t>(f)];
        model.bin_edges[static_cast<std::size_t>(f)] = detail::quantile_edges(std::move(vals), cfg.n_bins);
    }
    std::vector<std::vector<std::uint8_t>> binned(n, std::vector<std::uint8_t>(static_cast<std::size_t>(n_features)));
    for (std::size_t i = 0; i < n; ++i)
        for (int f = 0; f < n_features; ++f)
            binned[i][static_cast<std::size_t>(f)] = model.bin_of(f, x[i][static_cast<std::size_t>(f)]);

    double w_total = 0.0;
    for (double v : w) w_total += v;

    if (n_classes == 2) {
        // logistic loss on a single score
        double pos_w = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (label_idx[y[i]] == 1) pos_w += w[i];
        double prior = std::min(std::max(pos_w / w_total, 1e-9), 1.0 - 1e-9);
        model.base_score = {std::log(prior / (1.0 - prior))};

        std::vector<double> margin(n, model.base_score[0]);
        std::vector<double> grad(n), hess(n);
        for (int it = 0; it < cfg.max_iter; ++it) {
            for (std::size_t i = 0; i < n; ++i) {
                double p = 1.0 / (1.0 + std::exp(-margin[i]));
                double t = (label_idx[y[i]] == 1) ? 1.0 : 0.0;
                grad[i] = w[i] * (p - t);
                hess[i] = w[i] * p * (1.0 - p);
            }
            Tree tree = detail::grow_tree(binned, grad, hess, w, cfg);
            for (std::size_t i = 0; i < n; ++i)
                margin[i] += tree.predict_binned(binned[i]);
            model.trees.push_back({std::move(tree)});
        }
    } else {
        // softmax, one tree per class per iteration
        model.base_score.assign(static_cast<std::size_t>(n_classes), 0.0);
        std::vector<double> class_w(static_cast<std::size_t>(n_classes), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            class_w[label_idx[y[i]]] += w[i];
        for (int c = 0; c < n_classes; ++c) {
            double p = std::min(std::max(class_w[static_cast<std::size_t>(c)] / w_total, 1e-9), 1.0);
            model.base_score[static_cast<std::size_t>(c)] = std::log(p);
        }

        std::vector<std::vector<double>> margin(n,
            std::vector<double>(model.base_score.begin(), model.base_score.end()));
        std::vector<double> grad(n), hess(n);
        std::vector<std::vector<double>> proba(n, std::vector<double>(static_cast<std::size_t>(n_classes)));
        for (int it = 0; it < cfg.max_iter; ++it) {
            for (std::size_t i = 0; i < n; ++i) {
                double mx = *std::max_element(margin[i].begin(), margin[i].end());
                double z = 0.0;
                for (int c = 0; c < n_classes; ++c) {
                    proba[i][static_cast<std::size_t>(c)] = std::exp(margin[i][static_cast<std::size_t>(c)] - mx);
                    z += proba[i][static_cast<std::size_t>(c)];
                }
                for (auto& v : proba[i]) v /= z;
            }
            std::vector<Tree> iteration;
            for (int c = 0; c < n_classes; ++c) {
                for (std::size_t i = 0; i < n; ++i) {
                    double p = proba[i][static_cast<std::size_t>(c)];
                    double t = (label_idx[y[i]] == static_cast<std::size_t>(c)) ? 1.0 : 0.0;
                    grad[i] = w[i] * (p - t);
                    hess[i] = w[i] * std::max(p * (1.0 - p), 1e-12);
                }
                Tree tree = detail::grow_tree(binned, grad, hess, w, cfg);
                for (std::size_t i = 0; i < n; ++i)
                    margin[i][static_cast<std::size_t>(c)] += tree.predict_binned(binned[i]);
                iteration.push_back(std::move(tree));
            }
            model.trees.push_back(std::move(iteration));
        }
    }
    return model;
}

inline std::vector<std::vector<double>> predict_scores(
    const GbtEnsemble& model, const std::vector<std::vector<float>>& x) {
    std::vector<std::vector<double>> out;
    out.reserve(x.size());
    for (const auto& row : x) {
        if (static_cast<int>(row.size()) != model.n_features)
            throw std::invalid_argument("gbt::predict_scores: shape mismatch");
        out.push_back(model.predict_proba(row));
    }
    return out;
}

} // namespace fdd::gbt
