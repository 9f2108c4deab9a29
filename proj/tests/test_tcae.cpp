#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fdd/common.hpp"
#include "fdd/tcae.hpp"

using namespace fdd;

namespace {

tcae::TcaeConfig micro_config() {
    tcae::TcaeConfig cfg;
    cfg.T = 16;
    cfg.c = 2;
    cfg.L = 2;
    cfg.k = 3;
    cfg.n_filters = 4;
    cfg.n_1x1 = 3;
    cfg.c_latent = 2;
    cfg.s = 4;
    cfg.dropout = 0.0;
    return cfg;
}

double loss_of(tcae::TcaeModel& m, const std::vector<double>& x) {
    auto xhat = m.forward(x, false, nullptr);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = xhat[i] - x[i];
        acc += d * d;
    }
    return acc / static_cast<double>(x.size());
}

} // namespace

TEST_CASE("block count formula reproduces the architecture table") {
    CHECK(tcae::auto_blocks(100, 9) == 3);
    CHECK(tcae::auto_blocks(100, 5) == 4);
    CHECK(tcae::auto_blocks(1500, 7) == 7);
}

TEST_CASE("block count is monotone in window length and kernel size") {
    for (int k : {3, 5, 7, 9}) {
        int prev = 0;
        for (int T : {16, 50, 100, 400, 1500, 4000}) {
            int L = tcae::auto_blocks(T, k);
            REQUIRE(L >= prev);
            prev = L;
        }
    }
    for (int T : {100, 1500}) {
        int prev = 1 << 20;
        for (int k : {2, 3, 5, 9, 17}) {
            int L = tcae::auto_blocks(T, k);
            REQUIRE(L <= prev);
            prev = L;
        }
    }
    CHECK_THROWS_AS(tcae::auto_blocks(1, 3), std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences") {
    auto cfg = micro_config();
    for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
        tcae::TcaeModel model(cfg, seed);
        Rng rng(seed * 77 + 1);
        std::vector<double> x(static_cast<std::size_t>(cfg.c * cfg.T));
        for (auto& v : x) v = rng.uniform();

        // analytic gradient of the mean-squared reconstruction loss
        model.zero_grads();
        auto xhat = model.forward(x, true, &rng); // dropout 0, so train path == eval
        std::vector<double> gx(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            gx[i] = 2.0 * (xhat[i] - x[i]) / static_cast<double>(x.size());
        model.backward(gx);

        auto ps = model.params();
        const double eps = 1e-5;
        for (auto& p : ps) {
            // probe a handful of entries per tensor
            std::size_t stride = std::max<std::size_t>(1, p.w->size() / 5);
            for (std::size_t j = 0; j < p.w->size(); j += stride) {
                double orig = (*p.w)[j];
                (*p.w)[j] = orig + eps;
                double lp = loss_of(model, x);
                (*p.w)[j] = orig - eps;
                double lm = loss_of(model, x);
                (*p.w)[j] = orig;
                double numeric = (lp - lm) / (2.0 * eps);
                double analytic = (*p.g)[j];
                // relative 1e-4 with an absolute floor for fd noise
                double tol = 1e-4 * std::max(std::fabs(numeric), std::fabs(analytic)) + 1e-9;
                REQUIRE(std::fabs(numeric - analytic) < tol);
            }
        }
    }
}

TEST_CASE("encoder is causal") {
    auto cfg = micro_config();
    tcae::TcaeModel model(cfg, 5);
    Rng rng(9);
    std::vector<double> x(static_cast<std::size_t>(cfg.c * cfg.T));
    for (auto& v : x) v = rng.uniform();

    auto base = model.encode_prepool(x);
    const int t0 = 9;
    auto x2 = x;
    x2[static_cast<std::size_t>(0 * cfg.T + t0)] += 0.5; // perturb channel 0 at t0
    auto pert = model.encode_prepool(x2);

    for (int ch = 0; ch < cfg.c_latent; ++ch)
        for (int t = 0; t < cfg.T; ++t) {
            double d = std::fabs(pert[static_cast<std::size_t>(ch * cfg.T + t)] -
                                 base[static_cast<std::size_t>(ch * cfg.T + t)]);
            if (t < t0)
                REQUIRE(d == 0.0); // strictly no influence on the past
        }
    // and the perturbation does reach the present
    double now = 0.0;
    for (int ch = 0; ch < cfg.c_latent; ++ch)
        now += std::fabs(pert[static_cast<std::size_t>(ch * cfg.T + t0)] -
                         base[static_cast<std::size_t>(ch * cfg.T + t0)]);
    CHECK(now > 0.0);
}

TEST_CASE("feature extraction matches its definition") {
    auto cfg = micro_config();
    tcae::TcaeModel model(cfg, 3);
    Rng rng(4);
    std::vector<float> wv(static_cast<std::size_t>(cfg.c * cfg.T));
    for (auto& v : wv) v = static_cast<float>(rng.uniform());

    auto f = model.infer(wv);
    REQUIRE(f.z.size() == static_cast<std::size_t>(cfg.c_latent));
    REQUIRE(f.r.size() == static_cast<std::size_t>(cfg.c));

    std::vector<double> x(wv.begin(), wv.end());
    auto xhat = model.forward(x, false, nullptr);
    double abs_sum = 0.0;
    for (int ch = 0; ch < cfg.c; ++ch) {
        double acc = 0.0;
        for (int t = 0; t < cfg.T; ++t) {
            double d = x[static_cast<std::size_t>(ch * cfg.T + t)] -
                       xhat[static_cast<std::size_t>(ch * cfg.T + t)];
            acc += d;
            abs_sum += std::fabs(d);
        }
        REQUIRE(f.r[static_cast<std::size_t>(ch)] ==
                Catch::Approx(acc / cfg.T).margin(1e-12));
    }
    REQUIRE(f.e == Catch::Approx(abs_sum / (cfg.c * cfg.T)).margin(1e-12));
}

TEST_CASE("config validation") {
    auto cfg = micro_config();
    cfg.s = 3; // 16 % 3 != 0
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = micro_config();
    cfg.dropout = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = micro_config();
    cfg.L = 0;
    CHECK(cfg.blocks() == tcae::auto_blocks(16, 3));
}

TEST_CASE("training reduces reconstruction loss and rejects fault windows") {
    auto cfg = micro_config();
    Rng rng(15);
    auto make_window = [&](int label) {
        data::Window w;
        w.length = cfg.T;
        w.n_channels = cfg.c;
        w.label = label;
        w.values.resize(static_cast<std::size_t>(cfg.c * cfg.T));
        double phase = rng.uniform(0.0, 6.28);
        for (int ch = 0; ch < cfg.c; ++ch)
            for (int t = 0; t < cfg.T; ++t)
                w.values[static_cast<std::size_t>(ch * cfg.T + t)] = static_cast<float>(
                    0.5 + 0.4 * std::sin(0.4 * t + phase + ch));
        return w;
    };
    std::vector<data::Window> train, val;
    for (int i = 0; i < 24; ++i) train.push_back(make_window(0));
    for (int i = 0; i < 8; ++i) val.push_back(make_window(0));

    tcae::TrainOptions opt;
    opt.max_epochs = 200;
    opt.batch_size = 8;
    opt.lr = 3e-3;
    opt.seed = 2;
    auto model = tcae::train(train, val, cfg, opt);
    REQUIRE(model.loss_curve.size() >= 2);
    CHECK(model.loss_curve.back() < model.loss_curve.front());
    CHECK(tcae::mse_of(model, val) < 0.05);

    auto bad = train;
    bad[0].label = 16;
    CHECK_THROWS_AS(tcae::train(bad, val, cfg, opt), std::invalid_argument);
}

TEST_CASE("same seed gives identical trained weights") {
    auto cfg = micro_config();
    Rng rng(1);
    std::vector<data::Window> train, val;
    for (int i = 0; i < 8; ++i) {
        data::Window w;
        w.length = cfg.T;
        w.values.resize(static_cast<std::size_t>(cfg.c * cfg.T));
        for (auto& v : w.values) v = static_cast<float>(rng.uniform());
        (i < 6 ? train : val).push_back(std::move(w));
    }
    tcae::TrainOptions opt;
    opt.max_epochs = 5;
    opt.seed = 44;
    auto a = tcae::train(train, val, cfg, opt);
    auto b = tcae::train(train, val, cfg, opt);
    auto pa = a.params(), pb = b.params();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i)
        REQUIRE(*pa[i].w == *pb[i].w);
}
