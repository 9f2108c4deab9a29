#pragma once

// Temporal convolutional autoencoder.
//
// Encoder: L dilated causal blocks (conv k, dilation b^l -> 1x1 conv to 16
// channels -> ReLU -> dropout), skip outputs concatenated to (16L, T),
// 1x1 compression to c_latent channels, average pooling by s, and a final
// learned projection to the latent vector z. Decoder mirrors the encoder
// with reversed dilation rates and nearest-neighbor upsampling.
//
// Forward/backward are written out explicitly; no autodiff framework.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fdd/common.hpp"
#include "fdd/data.hpp"

namespace fdd::tcae {

// L = ceil(log_b((T-1)(b-1) / (2(k-1)) + 1)); smallest block count whose
// stacked receptive field covers the whole window.
inline int auto_blocks(int T, int k, int b = 2) {
    if (T < 2 || k < 2 || b < 2)
        throw std::invalid_argument("auto_blocks: need T >= 2, k >= 2, b >= 2");
    double arg = (static_cast<double>(T) - 1.0) * (b - 1.0) / (2.0 * (k - 1.0)) + 1.0;
    return static_cast<int>(std::ceil(std::log(arg) / std::log(static_cast<double>(b)) -
                                      1e-12));
}

struct TcaeConfig {
    int T = 100;
    int c = 14;
    int L = 0;          // 0 -> auto-sized from Eq. above
    int k = 9;
    int n_filters = 64;
    int n_1x1 = 16;
    int c_latent = 16;
    int s = 4;
    double dropout = 0.12;
    int dilation_base = 2;
    bool abs_residual_mean = false; // r as |mean| instead of signed mean

    int blocks() const { return L > 0 ? L : auto_blocks(T, k, dilation_base); }

    void validate() const {
        if (T < 2 || c < 1 || k < 2 || n_filters < 1 || n_1x1 < 1 ||
            c_latent < 1 || s < 1 || dilation_base < 2)
            throw std::invalid_argument("TcaeConfig: invalid sizes");
        if (T % s != 0)
            throw std::invalid_argument("TcaeConfig: T must be divisible by s");
        if (dropout < 0.0 || dropout >= 1.0)
            throw std::invalid_argument("TcaeConfig: dropout out of range");
    }
};

namespace nn {

// Causal dilated 1-D convolution; left padding only, so y[.,t] depends on
// x[.,<=t]. Weight layout w[(o*cin + i)*k + j], tap j = k-1 is "now".
struct Conv1d {
    int cin = 0, cout = 0, k = 1, dil = 1, T = 0;
    std::vector<double> w, b, gw, gb;
    std::vector<double> x_cache; // input, for backward

    void init(int cin_, int cout_, int k_, int dil_, int T_, Rng& rng) {
        cin = cin_; cout = cout_; k = k_; dil = dil_; T = T_;
        w.resize(static_cast<std::size_t>(cout) * cin * k);
        b.assign(static_cast<std::size_t>(cout), 0.0);
        gw.assign(w.size(), 0.0);
        gb.assign(b.size(), 0.0);
        double bound = std::sqrt(1.0 / (static_cast<double>(cin) * k)); // fan-in
        for (auto& v : w) v = rng.uniform(-bound, bound);
        // nonzero bias init keeps units off the exact ReLU kink
        for (auto& v : b) v = rng.uniform(-bound, bound);
    }

    void forward(const std::vector<double>& x, std::vector<double>& y) {
        x_cache = x;
        y.assign(static_cast<std::size_t>(cout) * T, 0.0);
        for (int o = 0; o < cout; ++o) {
            double* yo = &y[static_cast<std::size_t>(o) * T];
            for (int t = 0; t < T; ++t) yo[t] = b[static_cast<std::size_t>(o)];
            for (int i = 0; i < cin; ++i) {
                const double* xi = &x[static_cast<std::size_t>(i) * T];
                const double* wo = &w[(static_cast<std::size_t>(o) * cin + i) * k];
                for (int j = 0; j < k; ++j) {
                    int off = (k - 1 - j) * dil;
                    double wv = wo[j];
                    for (int t = off; t < T; ++t) yo[t] += wv * xi[t - off];
                }
            }
        }
    }

    // accumulates into gw/gb, returns grad wrt input
    void backward(const std::vector<double>& gy, std::vector<double>& gx) {
        gx.assign(static_cast<std::size_t>(cin) * T, 0.0);
        for (int o = 0; o < cout; ++o) {
            const double* go = &gy[static_cast<std::size_t>(o) * T];
            for (int t = 0; t < T; ++t) gb[static_cast<std::size_t>(o)] += go[t];
            for (int i = 0; i < cin; ++i) {
                const double* xi = &x_cache[static_cast<std::size_t>(i) * T];
                double* gxi = &gx[static_cast<std::size_t>(i) * T];
                double* gwo = &gw[(static_cast<std::size_t>(o) * cin + i) * k];
                const double* wo = &w[(static_cast<std::size_t>(o) * cin + i) * k];
                for (int j = 0; j < k; ++j) {
                    int off = (k - 1 - j) * dil;
                    double acc = 0.0, wv = wo[j];
                    for (int t = off; t < T; ++t) {
                        acc += go[t] * xi[t - off];
                        gxi[t - off] += wv * go[t];
                    }
                    gwo[j] += acc;
                }
            }
        }
    }
};

struct Linear {
    int nin = 0, nout = 0;
    std::vector<double> w, b, gw, gb;
    std::vector<double> x_cache;

    void init(int nin_, int nout_, Rng& rng) {
        nin = nin_; nout = nout_;
        w.resize(static_cast<std::size_t>(nout) * nin);
        b.assign(static_cast<std::size_t>(nout), 0.0);
        gw.assign(w.size(), 0.0);
        gb.assign(b.size(), 0.0);
        double bound = std::sqrt(1.0 / nin);
        for (auto& v : w) v = rng.uniform(-bound, bound);
        for (auto& v : b) v = rng.uniform(-bound, bound);
    }

    void forward(const std::vector<double>& x, std::vector<double>& y) {
        x_cache = x;
        y.assign(static_cast<std::size_t>(nout), 0.0);
        for (int o = 0; o < nout; ++o) {
            const double* wo = &w[static_cast<std::size_t>(o) * nin];
            double acc = b[static_cast<std::size_t>(o)];
            for (int i = 0; i < nin; ++i) acc += wo[i] * x[static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(o)] = acc;
        }
    }

    void backward(const std::vector<double>& gy, std::vector<double>& gx) {
        gx.assign(static_cast<std::size_t>(nin), 0.0);
        for (int o = 0; o < nout; ++o) {
            double g = gy[static_cast<std::size_t>(o)];
            gb[static_cast<std::size_t>(o)] += g;
            const double* wo = &w[static_cast<std::size_t>(o) * nin];
            double* gwo = &gw[static_cast<std::size_t>(o) * nin];
            for (int i = 0; i < nin; ++i) {
                gwo[i] += g * x_cache[static_cast<std::size_t>(i)];
                gx[static_cast<std::size_t>(i)] += wo[i] * g;
            }
        }
    }
};

struct Relu {
    std::vector<double> y_cache;
    void forward(std::vector<double>& x) {
        for (auto& v : x)
            if (v < 0.0) v = 0.0;
        y_cache = x;
    }
    void backward(std::vector<double>& g) const {
        for (std::size_t i = 0; i < g.size(); ++i)
            if (y_cache[i] <= 0.0) g[i] = 0.0;
    }
};

struct Dropout {
    double p = 0.0;
    std::vector<double> mask;
    void forward(std::vector<double>& x, bool train, Rng* rng) {
        if (!train || p <= 0.0) {
            mask.clear();
            return;
        }
        mask.resize(x.size());
        double scale = 1.0 / (1.0 - p);
        for (std::size_t i = 0; i < x.size(); ++i) {
            mask[i] = (rng->uniform() < p) ? 0.0 : scale;
            x[i] *= mask[i];
        }
    }
    void backward(std::vector<double>& g) const {
        if (mask.empty()) return;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask[i];
    }
};

} // namespace nn

// One dilated causal block: conv(k, dil) -> 1x1 -> ReLU -> dropout
struct Block {
    nn::Conv1d conv;
    nn::Conv1d proj;
    nn::Relu relu;
    nn::Dropout drop;
    std::vector<double> h1; // conv output cache

    void init(int cin, int n_filters, int n_1x1, int k, int dil, int T,
              double dropout, Rng& rng) {
        conv.init(cin, n_filters, k, dil, T, rng);
        proj.init(n_filters, n_1x1, 1, 1, T, rng);
        drop.p = dropout;
    }

    void forward(const std::vector<double>& x, std::vector<double>& y,
                 bool train, Rng* rng) {
        conv.forward(x, h1);
        proj.forward(h1, y);
        relu.forward(y);
        drop.forward(y, train, rng);
    }

    void backward(std::vector<double> gy, std::vector<double>& gx) {
        drop.backward(gy);
        relu.backward(gy);
        std::vector<double> gh1;
        proj.backward(gy, gh1);
        conv.backward(gh1, gx);
    }
};

struct Features {
    std::vector<double> z; // latent vector, length c_latent
    std::vector<double> r; // per-channel mean residual, length c
    double e = 0.0;        // mean absolute reconstruction error
};

class TcaeModel {
public:
    TcaeConfig cfg;
    std::uint64_t scaler_hash = 0;
    int trained_epochs = 0;
    std::vector<double> loss_curve;

    TcaeModel() = default;

    explicit TcaeModel(const TcaeConfig& config, std::uint64_t init_seed) {
        cfg = config;
        cfg.validate();
        cfg.L = cfg.blocks();
        Rng rng(init_seed);
        const int L = cfg.L, T = cfg.T, tp = cfg.T / cfg.s;

        enc_blocks.resize(static_cast<std::size_t>(L));
        int dil = 1;
        for (int l = 0; l < L; ++l) {
            int cin = (l == 0) ? cfg.c : cfg.n_1x1;
            enc_blocks[static_cast<std::size_t>(l)].init(cin, cfg.n_filters, cfg.n_1x1,
                                                         cfg.k, dil, T, cfg.dropout, rng);
            dil *= cfg.dilation_base;
        }
        enc_compress.init(cfg.n_1x1 * L, cfg.c_latent, 1, 1, T, rng);
        enc_proj.init(cfg.c_latent * tp, cfg.c_latent, rng);

        dec_expand.init(cfg.c_latent, cfg.c_latent * tp, rng);
        dec_blocks.resize(static_cast<std::size_t>(L));
        dil = 1;
        for (int l = 0; l < L - 1; ++l) dil *= cfg.dilation_base;
        for (int l = 0; l < L; ++l) {
            int cin = (l == 0) ? cfg.c_latent : cfg.n_1x1;
            dec_blocks[static_cast<std::size_t>(l)].init(cin, cfg.n_filters, cfg.n_1x1,
                                                         cfg.k, dil, T, cfg.dropout, rng);
            dil /= cfg.dilation_base;
            if (dil < 1) dil = 1;
        }
        dec_out.init(cfg.n_1x1, cfg.c, 1, 1, T, rng);
    }

    // Encoder pre-pooling activation, exposed for the causality probe.
    std::vector<double> encode_prepool(const std::vector<double>& x) {
        std::vector<double> cur = x, next;
        std::vector<std::vector<double>> skips;
        for (auto& blk : enc_blocks) {
            blk.forward(cur, next, false, nullptr);
            skips.push_back(next);
            cur = next;
        }
        std::vector<double> cat;
        cat.reserve(static_cast<std::size_t>(cfg.n_1x1 * cfg.L * cfg.T));
        for (auto& s : skips) cat.insert(cat.end(), s.begin(), s.end());
        std::vector<double> compressed;
        enc_compress.forward(cat, compressed);
        return compressed; // (c_latent, T)
    }

    // Full forward pass. Caches intermediates for backward when train=true.
    std::vector<double> forward(const std::vector<double>& x, bool train,
                                Rng* rng) {
        if (x.size() != static_cast<std::size_t>(cfg.c * cfg.T))
            throw std::invalid_argument("TcaeModel::forward: shape mismatch");
        const int T = cfg.T, tp = cfg.T / cfg.s;

        std::vector<double> cur = x, next;
        skip_cache_.clear();
        for (auto& blk : enc_blocks) {
            blk.forward(cur, next, train, rng);
            skip_cache_.push_back(next);
            cur = next;
        }
        std::vector<double> cat;
        cat.reserve(static_cast<std::size_t>(cfg.n_1x1 * cfg.L * T));
        for (auto& s : skip_cache_) cat.insert(cat.end(), s.begin(), s.end());
        enc_compress.forward(cat, compressed_);

        // average pool by s
        pooled_.assign(static_cast<std::size_t>(cfg.c_latent) * tp, 0.0);
        for (int ch = 0; ch < cfg.c_latent; ++ch)
            for (int u = 0; u < tp; ++u) {
                double acc = 0.0;
                for (int q = 0; q < cfg.s; ++q)
                    acc += compressed_[static_cast<std::size_t>(ch * T + u * cfg.s + q)];
                pooled_[static_cast<std::size_t>(ch * tp + u)] = acc / cfg.s;
            }

        enc_proj.forward(pooled_, z_);

        dec_expand.forward(z_, expanded_);

        // nearest-neighbor upsample by s
        upsampled_.assign(static_cast<std::size_t>(cfg.c_latent) * T, 0.0);
        for (int ch = 0; ch < cfg.c_latent; ++ch)
            for (int t = 0; t < T; ++t)
                upsampled_[static_cast<std::size_t>(ch * T + t)] =
                    expanded_[static_cast<std::size_t>(ch * tp + t / cfg.s)];

        cur = upsampled_;
        for (auto& blk : dec_blocks) {
            blk.forward(cur, next, train, rng);
            cur = next;
        }
        std::vector<double> xhat;
        dec_out.forward(cur, xhat);
        return xhat;
    }

    // Backward from dL/dxhat; accumulates parameter gradients.
    void backward(const std::vector<double>& gxhat) {
        const int T = cfg.T, tp = cfg.T / cfg.s;
        std::vector<double> g, gprev;
        dec_out.backward(gxhat, g);
        for (auto it = dec_blocks.rbegin(); it != dec_blocks.rend(); ++it) {
            it->backward(g, gprev);
            g = std::move(gprev);
        }
        // upsample backward: sum over repeated positions
        std::vector<double> gexp(static_cast<std::size_t>(cfg.c_latent) * tp, 0.0);
        for (int ch = 0; ch < cfg.c_latent; ++ch)
            for (int t = 0; t < T; ++t)
                gexp[static_cast<std::size_t>(ch * tp + t / cfg.s)] +=
                    g[static_cast<std::size_t>(ch * T + t)];
        std::vector<double> gz;
        dec_expand.backward(gexp, gz);
        std::vector<double> gpool;
        enc_proj.backward(gz, gpool);
        // avg-pool backward
        std::vector<double> gcomp(static_cast<std::size_t>(cfg.c_latent) * T, 0.0);
        for (int ch = 0; ch < cfg.c_latent; ++ch)
            for (int u = 0; u < tp; ++u) {
                double gv = gpool[static_cast<std::size_t>(ch * tp + u)] / cfg.s;
                for (int q = 0; q < cfg.s; ++q)
                    gcomp[static_cast<std::size_t>(ch * T + u * cfg.s + q)] = gv;
            }
        std::vector<double> gcat;
        enc_compress.backward(gcomp, gcat);
        // split concat gradient per block, then walk the chain backwards;
        // block l receives skip grad l plus the chain grad from block l+1.
        const std::size_t blk_sz = static_cast<std::size_t>(cfg.n_1x1) * T;
        std::vector<double> gchain; // grad flowing into output of block l
        for (int l = cfg.L - 1; l >= 0; --l) {
            std::vector<double> gout(gcat.begin() + static_cast<std::ptrdiff_t>(l * blk_sz),
                                     gcat.begin() + static_cast<std::ptrdiff_t>((l + 1) * blk_sz));
            if (!gchain.empty())
                for (std::size_t i = 0; i < blk_sz; ++i) gout[i] += gchain[i];
            std::vector<double> gin;
            enc_blocks[static_cast<std::size_t>(l)].backward(std::move(gout), gin);
            gchain = std::move(gin);
        }
    }

    const std::vector<double>& latent() const { return z_; }

    Features features(const std::vector<double>& x,
                      const std::vector<double>& xhat) const {
        Features f;
        f.z = z_;
        f.r.assign(static_cast<std::size_t>(cfg.c), 0.0);
        double abs_sum = 0.0;
        for (int ch = 0; ch < cfg.c; ++ch) {
            double acc = 0.0;
            for (int t = 0; t < cfg.T; ++t) {
                double d = x[static_cast<std::size_t>(ch * cfg.T + t)] -
                           xhat[static_cast<std::size_t>(ch * cfg.T + t)];
                acc += d;
                abs_sum += std::fabs(d);
            }
            double m = acc / cfg.T;
            f.r[static_cast<std::size_t>(ch)] = cfg.abs_residual_mean ? std::fabs(m) : m;
        }
        f.e = abs_sum / (static_cast<double>(cfg.c) * cfg.T);
        return f;
    }

    Features infer(const std::vector<float>& window_values) {
        std::vector<double> x(window_values.begin(), window_values.end());
        auto xhat = forward(x, false, nullptr);
        return features(x, xhat);
    }

    // ---- parameter access (serialization, optimizer, gradient checks) ----
    struct ParamView {
        std::vector<double>* w;
        std::vector<double>* g;
        const char* name;
    };

    std::vector<ParamView> params() {
        std::vector<ParamView> out;
        auto add = [&](std::vector<double>& w, std::vector<double>& g, const char* n) {
            out.push_back({&w, &g, n});
        };
        for (std::size_t l = 0; l < enc_blocks.size(); ++l) {
            add(enc_blocks[l].conv.w, enc_blocks[l].conv.gw, "enc.conv.w");
            add(enc_blocks[l].conv.b, enc_blocks[l].conv.gb, "enc.conv.b");
            add(enc_blocks[l].proj.w, enc_blocks[l].proj.gw, "enc.proj.w");
            add(enc_blocks[l].proj.b, enc_blocks[l].proj.gb, "enc.proj.b");
        }
        add(enc_compress.w, enc_compress.gw, "enc.compress.w");
        add(enc_compress.b, enc_compress.gb, "enc.compress.b");
        add(enc_proj.w, enc_proj.gw, "enc.projz.w");
        add(enc_proj.b, enc_proj.gb, "enc.projz.b");
        add(dec_expand.w, dec_expand.gw, "dec.expand.w");
        add(dec_expand.b, dec_expand.gb, "dec.expand.b");
        for (std::size_t l = 0; l < dec_blocks.size(); ++l) {
            add(dec_blocks[l].conv.w, dec_blocks[l].conv.gw, "dec.conv.w");
            add(dec_blocks[l].conv.b, dec_blocks[l].conv.gb, "dec.conv.b");
            add(dec_blocks[l].proj.w, dec_blocks[l].proj.gw, "dec.proj.w");
            add(dec_blocks[l].proj.b, dec_blocks[l].proj.gb, "dec.proj.b");
        }
        add(dec_out.w, dec_out.gw, "dec.out.w");
        add(dec_out.b, dec_out.gb, "dec.out.b");
        return out;
    }

    void zero_grads() {
        for (auto& p : params()) std::fill(p.g->begin(), p.g->end(), 0.0);
    }

    std::size_t param_count() {
        std::size_t n = 0;
        for (auto& p : params()) n += p.w->size();
        return n;
    }

    std::vector<Block> enc_blocks;
    nn::Conv1d enc_compress;
    nn::Linear enc_proj;
    nn::Linear dec_expand;
    std::vector<Block> dec_blocks;
    nn::Conv1d dec_out;

private:
    std::vector<std::vector<double>> skip_cache_;
    std::vector<double> compressed_, pooled_, z_, expanded_, upsampled_;
};

struct TrainOptions {
    double lr = 1e-3;
    int batch_size = 4096;
    int max_epochs = 200;
    int patience = 20;
    std::uint64_t seed = 1;
};

struct Adam {
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long t = 0;
    std::vector<std::vector<double>> m, v;

    explicit Adam(TcaeModel& model, double lr_) : lr(lr_) {
        for (auto& p : model.params()) {
            m.emplace_back(p.w->size(), 0.0);
            v.emplace_back(p.w->size(), 0.0);
        }
    }

    void step(TcaeModel& model) {
        ++t;
        double bc1 = 1.0 - std::pow(beta1, t);
        double bc2 = 1.0 - std::pow(beta2, t);
        auto ps = model.params();
        for (std::size_t i = 0; i < ps.size(); ++i) {
            auto& w = *ps[i].w;
            auto& g = *ps[i].g;
            for (std::size_t j = 0; j < w.size(); ++j) {
                m[i][j] = beta1 * m[i][j] + (1.0 - beta1) * g[j];
                v[i][j] = beta2 * v[i][j] + (1.0 - beta2) * g[j] * g[j];
                w[j] -= lr * (m[i][j] / bc1) / (std::sqrt(v[i][j] / bc2) + eps);
            }
        }
    }
};

inline double mse_of(TcaeModel& model, const std::vector<data::Window>& set) {
    double total = 0.0;
    for (const auto& w : set) {
        std::vector<double> x(w.values.begin(), w.values.end());
        auto xhat = model.forward(x, false, nullptr);
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double d = xhat[i] - x[i];
            acc += d * d;
        }
        total += acc / static_cast<double>(x.size());
    }
    return total / static_cast<double>(set.size());
}

// Train on nominal windows with MSE + Adam, early stopping on val loss.
// Returns the best-val checkpoint.
inline TcaeModel train(const std::vector<data::Window>& nominal_train,
                       const std::vector<data::Window>& nominal_val,
                       const TcaeConfig& config, const TrainOptions& opt) {
    if (nominal_train.empty() || nominal_val.empty())
        throw std::invalid_argument("tcae::train: empty train or val set");
    for (const auto& w : nominal_train)
        if (w.label != 0)
            throw std::invalid_argument("tcae::train: non-nominal training window");

    TcaeModel model(config, opt.seed);
    Adam adam(model, opt.lr);
    Rng rng(opt.seed ^ 0xabcdef12345ull);

    const std::size_t n = nominal_train.size();
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(opt.batch_size), n);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    // best checkpoint snapshot
    std::vector<std::vector<double>> best_weights;
    auto snapshot = [&]() {
        best_weights.clear();
        for (auto& p : model.params()) best_weights.push_back(*p.w);
    };
    snapshot();

    for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);

        double train_loss = 0.0;
        std::size_t pos = 0;
        while (pos < n) {
            std::size_t end = std::min(pos + batch, n);
            model.zero_grads();
            for (std::size_t bi = pos; bi < end; ++bi) {
                const auto& w = nominal_train[order[bi]];
                std::vector<double> x(w.values.begin(), w.values.end());
                auto xhat = model.forward(x, true, &rng);
                std::vector<double> gx(x.size());
                double acc = 0.0;
                double scale = 2.0 / (static_cast<double>(x.size()) *
                                      static_cast<double>(end - pos));
                for (std::size_t j = 0; j < x.size(); ++j) {
                    double d = xhat[j] - x[j];
                    acc += d * d;
                    gx[j] = scale * d;
                }
                train_loss += acc / static_cast<double>(x.size());
                model.backward(gx);
            }
            adam.step(model);
            pos = end;
        }
        train_loss /= static_cast<double>(n);
        model.loss_curve.push_back(train_loss);
        model.trained_epochs = epoch + 1;

        double val_loss = mse_of(model, nominal_val);
        if (val_loss < best_val - 1e-12) {
            best_val = val_loss;
            since_best = 0;
            snapshot();
        } else if (++since_best >= opt.patience) {
            break;
        }
    }

    auto ps = model.params();
    for (std::size_t i = 0; i < ps.size(); ++i) *ps[i].w = best_weights[i];
    return model;
}

} // namespace fdd::tcae
