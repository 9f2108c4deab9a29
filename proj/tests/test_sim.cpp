#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "fdd/sim.hpp"

using namespace fdd;

TEST_CASE("channel table") {
    const auto& names = sim::channel_names();
    REQUIRE(names.size() == 14);
    CHECK(names[0] == "Vd_Ref");
    CHECK(names[4] == "Id_Meas");
    CHECK(names[8] == "PosM_Meas");
    CHECK(names[13] == "PosV_Meas");
}

TEST_CASE("label from range membership") {
    sim::PhysicalParams p; // defaults are nominal
    CHECK(sim::label_of(p) == 0);

    p.inertia = 70.0; // bit 4
    CHECK(sim::label_of(p) == 16);

    p.inertia = 100.0;
    p.load_torque = 150.0; // bit 7
    CHECK(sim::label_of(p) == 128);

    for (int i = 0; i < 9; ++i) {
        const auto& r = sim::param_ranges()[static_cast<std::size_t>(i)];
        p.field(i) = 0.5 * (r.anom_a.lo + r.anom_a.hi);
    }
    CHECK(sim::label_of(p) == 511);
}

TEST_CASE("sampled parameters land in the requested ranges") {
    Rng rng(42);
    for (int label : {0, 16, 128, 511, 5, 273}) {
        for (int rep = 0; rep < 50; ++rep) {
            auto p = sim::sample_params(label, rng);
            REQUIRE(sim::params_valid(p));
            CHECK(sim::label_of(p) == label);
        }
    }
    CHECK_THROWS_AS(sim::sample_params(512, rng), std::invalid_argument);
    CHECK_THROWS_AS(sim::sample_params(-1, rng), std::invalid_argument);
}

TEST_CASE("trajectory lengths follow type durations at 1 kHz") {
    sim::PhysicalParams p;
    auto t2 = sim::simulate(p, sim::TrajType::T2, sim::default_duration(sim::TrajType::T2), 1);
    auto t3 = sim::simulate(p, sim::TrajType::T3, sim::default_duration(sim::TrajType::T3), 1);
    CHECK(t2.length() == 5000);
    CHECK(t3.length() == 15000);
    CHECK(t2.channels.size() == 14);
    CHECK(t2.sample_rate == 1000.0);
}

TEST_CASE("simulation is deterministic in the seed") {
    sim::PhysicalParams p;
    p.load_torque = 80.0;
    auto a = sim::simulate(p, sim::TrajType::T2, 2.0, 7);
    auto b = sim::simulate(p, sim::TrajType::T2, 2.0, 7);
    auto c = sim::simulate(p, sim::TrajType::T2, 2.0, 8);
    REQUIRE(a.channels == b.channels);
    CHECK(a.channels != c.channels);
}

TEST_CASE("invalid parameters are rejected") {
    sim::PhysicalParams p;
    p.resistance = 95.0; // between nominal [100,150] and anomalous [50,90]
    CHECK_THROWS_AS(sim::simulate(p, sim::TrajType::T2, 1.0, 1), std::invalid_argument);
    p.resistance = 120.0;
    CHECK_THROWS_AS(sim::simulate(p, sim::TrajType::T2, 0.0, 1), std::invalid_argument);
}

TEST_CASE("faulty plants produce different signals than nominal ones") {
    sim::PhysicalParams nom;
    auto base = sim::simulate(nom, sim::TrajType::T2, 3.0, 11);

    Rng rng(3);
    auto faulty = sim::sample_params(511, rng);
    auto t = sim::simulate(faulty, sim::TrajType::T2, 3.0, 11);

    // compare Iq_Meas mean absolute deviation
    double dev = 0.0;
    for (std::size_t i = 0; i < base.channels[5].size(); ++i)
        dev += std::fabs(static_cast<double>(t.channels[5][i]) - base.channels[5][i]);
    dev /= static_cast<double>(base.channels[5].size());
    CHECK(dev > 0.01);
}

TEST_CASE("ood transform is the stated affine map") {
    sim::PhysicalParams p;
    auto src = sim::simulate(p, sim::TrajType::T2, 1.0, 5);
    auto ood = sim::make_ood(src, -1.0, 5.0, 1e-5, 21);
    REQUIRE(ood.label == 21);
    for (std::size_t ch = 0; ch < src.channels.size(); ++ch)
        for (std::size_t i = 0; i < src.channels[ch].size(); ++i) {
            float expect = static_cast<float>(
                static_cast<double>(src.channels[ch][i]) * -1.0 + 5.0 +
                static_cast<double>(i) * 1e-5);
            REQUIRE(ood.channels[ch][i] == expect);
        }
}

TEST_CASE("dataset generation honors the spec and assigns sequential ids") {
    auto spec = sim::dev_spec(4);
    auto set = sim::generate_dataset(spec, 123);
    REQUIRE(set.size() == 16); // 4 classes x 4 each
    for (std::size_t i = 0; i < set.size(); ++i)
        CHECK(set[i].id == static_cast<std::int64_t>(i));

    std::map<int, int> per_class;
    for (const auto& t : set) per_class[t.label]++;
    CHECK(per_class[0] == 4);
    CHECK(per_class[16] == 4);
    CHECK(per_class[128] == 4);
    CHECK(per_class[511] == 4);

    auto again = sim::generate_dataset(spec, 123);
    REQUIRE(again.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
        CHECK(again[i].channels == set[i].channels);
}

TEST_CASE("final spec is nominal-heavy") {
    auto spec = sim::final_spec(100);
    int nom = 0, fault = 0;
    for (const auto& e : spec.entries) (e.label == 0 ? nom : fault) += e.count;
    CHECK(nom == 85);
    CHECK(fault == 15);
}
