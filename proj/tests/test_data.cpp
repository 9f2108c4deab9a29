#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "fdd/data.hpp"

using namespace fdd;

namespace {

sim::Trajectory make_traj(int n, int label = 0, std::int64_t id = 0) {
    sim::Trajectory t;
    t.label = label;
    t.id = id;
    t.channels.assign(sim::kNumChannels, std::vector<float>());
    for (int ch = 0; ch < sim::kNumChannels; ++ch)
        for (int i = 0; i < n; ++i)
            t.channels[static_cast<std::size_t>(ch)].push_back(
                static_cast<float>(ch * 1000 + i));
    return t;
}

} // namespace

TEST_CASE("scaler maps train range onto [0,1] and clamps outside it") {
    auto t = make_traj(100);
    auto sc = data::fit_scaler({t});
    CHECK(sc.transform(0, 0.0f) == 0.0f);
    CHECK(sc.transform(0, 99.0f) == 1.0f);
    CHECK(sc.transform(0, 49.5f) == Catch::Approx(0.5));
    CHECK(sc.transform(0, -10.0f) == 0.0f);  // clamp below
    CHECK(sc.transform(0, 500.0f) == 1.0f);  // clamp above
    CHECK(sc.inverse(0, 1.0f) == 99.0f);
}

TEST_CASE("constant channel scales to zero") {
    auto t = make_traj(10);
    for (auto& v : t.channels[3]) v = 7.0f;
    auto sc = data::fit_scaler({t});
    CHECK(sc.transform(3, 7.0f) == 0.0f);
    CHECK(sc.transform(3, 100.0f) == 0.0f);
}

TEST_CASE("fit_scaler rejects an empty train set") {
    CHECK_THROWS_AS(data::fit_scaler({}), std::invalid_argument);
}

TEST_CASE("window count and contents") {
    auto t = make_traj(250, 16, 9);
    auto sc = data::fit_scaler({t});
    auto ws = data::windows(t, sc, 100, 10);
    REQUIRE(ws.size() == (250 - 100) / 10 + 1);
    CHECK(ws[0].start_index == 0);
    CHECK(ws[1].start_index == 10);
    CHECK(ws.back().start_index == 150);
    for (const auto& w : ws) {
        CHECK(w.label == 16);
        CHECK(w.traj_id == 9);
        CHECK(w.values.size() == static_cast<std::size_t>(14 * 100));
    }
    // window values match scaled trajectory values
    for (int ch = 0; ch < 14; ++ch)
        for (int i = 0; i < 100; ++i)
            REQUIRE(ws[2].at(ch, i) ==
                    sc.transform(ch, t.channels[static_cast<std::size_t>(ch)]
                                         [static_cast<std::size_t>(20 + i)]));
}

TEST_CASE("windows rejects short trajectories and bad steps") {
    auto t = make_traj(50);
    auto sc = data::fit_scaler({t});
    CHECK_THROWS_AS(data::windows(t, sc, 100, 10), std::invalid_argument);
    CHECK_THROWS_AS(data::windows(t, sc, 10, 0), std::invalid_argument);
}

TEST_CASE("trajectory split is a deterministic 60:10:10:20 partition") {
    std::vector<sim::Trajectory> trajs;
    for (int i = 0; i < 100; ++i) trajs.push_back(make_traj(5, 0, i));
    auto s = data::split_trajectories(trajs, 77);
    CHECK(s.train.size() == 60);
    CHECK(s.val.size() == 10);
    CHECK(s.val2.size() == 10);
    CHECK(s.test.size() == 20);

    std::set<std::int64_t> seen;
    for (const auto* part : {&s.train, &s.val, &s.val2, &s.test})
        for (const auto& t : *part) seen.insert(t.id);
    CHECK(seen.size() == 100); // disjoint union covers everything

    auto s2 = data::split_trajectories(trajs, 77);
    for (std::size_t i = 0; i < s.train.size(); ++i)
        CHECK(s2.train[i].id == s.train[i].id);
}

TEST_CASE("resampling balances class counts") {
    std::vector<std::vector<float>> x;
    std::vector<int> y;
    Rng rng(5);
    for (int i = 0; i < 40; ++i) {
        x.push_back({static_cast<float>(rng.normal()), static_cast<float>(rng.normal())});
        y.push_back(0);
    }
    for (int i = 0; i < 8; ++i) {
        x.push_back({static_cast<float>(5 + rng.normal()), static_cast<float>(rng.normal())});
        y.push_back(1);
    }

    auto count = [](const data::FeatureSet& fs, int lbl) {
        std::size_t n = 0;
        for (int v : fs.y) n += (v == lbl);
        return n;
    };

    auto rus = data::resample(x, y, data::ResampleMethod::RUS, 1);
    CHECK(count(rus, 0) == 8);
    CHECK(count(rus, 1) == 8);

    auto ros = data::resample(x, y, data::ResampleMethod::ROS, 1);
    CHECK(count(ros, 0) == 40);
    CHECK(count(ros, 1) == 40);

    auto sm = data::resample(x, y, data::ResampleMethod::SMOTE, 1);
    CHECK(count(sm, 0) == 40);
    CHECK(count(sm, 1) == 40);
}

TEST_CASE("smote synthesizes points between minority neighbors") {
    // 1-D minority features: synthetic values must stay inside the hull
    std::vector<std::vector<float>> x;
    std::vector<int> y;
    for (int i = 0; i < 20; ++i) {
        x.push_back({static_cast<float>(i)});
        y.push_back(0);
    }
    for (float v : {100.0f, 101.0f, 104.0f}) {
        x.push_back({v});
        y.push_back(1);
    }
    auto sm = data::resample(x, y, data::ResampleMethod::SMOTE, 3);
    for (std::size_t i = 0; i < sm.y.size(); ++i)
        if (sm.y[i] == 1) {
            CHECK(sm.x[i][0] >= 100.0f);
            CHECK(sm.x[i][0] <= 104.0f);
        }
}

TEST_CASE("smote needs at least two minority samples") {
    std::vector<std::vector<float>> x = {{0.f}, {1.f}, {2.f}, {9.f}};
    std::vector<int> y = {0, 0, 0, 1};
    CHECK_THROWS_AS(data::resample(x, y, data::ResampleMethod::SMOTE, 1),
                    std::invalid_argument);
}

TEST_CASE("balanced class weights") {
    std::vector<int> y = {0, 0, 0, 1};
    auto w = data::class_weights(y);
    CHECK(w[0] == Catch::Approx(4.0 / (2.0 * 3.0)));
    CHECK(w[1] == Catch::Approx(4.0 / (2.0 * 1.0)));
}
