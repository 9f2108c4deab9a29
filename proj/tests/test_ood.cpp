#include <catch2/catch_amalgamated.hpp>

#include <limits>
#include <vector>

#include "fdd/common.hpp"
#include "fdd/ood.hpp"

using namespace fdd;

namespace {

std::vector<double> iota_errors(int n) {
    std::vector<double> e;
    for (int i = 1; i <= n; ++i) e.push_back(static_cast<double>(i));
    return e;
}

} // namespace

TEST_CASE("threshold is the ceil((n+1)(1-alpha)) order statistic") {
    // n = 99, alpha = 0.01: rank ceil(100 * 0.99) = 99 -> 99th smallest
    auto t1 = ood::calibrate(iota_errors(99), 0.01);
    CHECK(t1.thr_ood == 99.0);

    // n = 199, alpha = 0.05: rank ceil(200 * 0.95) = 190
    auto t2 = ood::calibrate(iota_errors(199), 0.05);
    CHECK(t2.thr_ood == 190.0);

    // n = 19, alpha = 0.05: rank ceil(20 * 0.95) = 19 -> the maximum
    auto t3 = ood::calibrate(iota_errors(19), 0.05);
    CHECK(t3.thr_ood == 19.0);
}

TEST_CASE("order of calibration inputs does not matter") {
    std::vector<double> shuffled = {5, 1, 4, 2, 3, 9, 7, 8, 6, 10,
                                    15, 11, 14, 12, 13, 19, 17, 18, 16};
    auto t = ood::calibrate(shuffled, 0.05);
    CHECK(t.thr_ood == 19.0);
}

TEST_CASE("flag boundary is strict") {
    auto t = ood::calibrate(iota_errors(99), 0.01);
    CHECK_FALSE(ood::is_ood(t, 99.0));
    CHECK(ood::is_ood(t, 99.0 + 1e-12));
    CHECK_FALSE(ood::is_ood(t, 50.0));
}

TEST_CASE("threshold is non-increasing in alpha") {
    Rng rng(4);
    std::vector<double> errors;
    for (int i = 0; i < 500; ++i) errors.push_back(rng.normal());
    double prev = std::numeric_limits<double>::infinity();
    for (double alpha : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5}) {
        auto t = ood::calibrate(errors, alpha);
        REQUIRE(t.thr_ood <= prev);
        prev = t.thr_ood;
    }
}

TEST_CASE("too few samples for the requested alpha") {
    // n = 5, alpha = 0.01: rank ceil(6 * 0.99) = 6 > 5
    CHECK_THROWS_AS(ood::calibrate(iota_errors(5), 0.01), std::invalid_argument);
    CHECK_THROWS_AS(ood::calibrate({}, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(ood::calibrate(iota_errors(10), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ood::calibrate(iota_errors(10), 1.0), std::invalid_argument);
}

TEST_CASE("trajectory warning needs strictly more than thr_ood_cs flags") {
    ood::OodTrajectoryState s;
    s.thr_ood_cs = 3;
    for (int i = 0; i < 3; ++i) s.step(true);
    CHECK_FALSE(s.warned);
    s.step(false);
    CHECK_FALSE(s.warned);
    s.step(true);
    CHECK(s.warned);
    CHECK(s.n_ood == 4);
    s.reset();
    CHECK_FALSE(s.warned);
    CHECK(s.n_ood == 0);
}
