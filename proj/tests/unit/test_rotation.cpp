#include "circlelab/errors.hpp"
#include "circlelab/rotation.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace circlelab;

TEST_SUITE("rotation") {

TEST_CASE("rotations: both estimators return alpha") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int t = 0; t < 10; ++t) {
        const double a = u(rng);
        const auto f = AnalyticCircleMap::rotation(a);
        CHECK(std::abs(rotation_number_birkhoff(f, u(rng), 100000).value - a) < 1e-12);
        // closest returns until the enclosure is narrower than 1e-12
        const auto cr = rotation_enclosure(f, u(rng), kDefaultNmax, [](double lo, double hi) { return hi - lo < 1e-12; });
        CHECK(std::abs(cr.value - a) < 1e-12);
        CHECK(cr.lo <= a);
        CHECK(a <= cr.hi);
        CHECK(cr.value >= 0.0);
        CHECK(cr.value < 1.0);
    }
}

TEST_CASE("birkhoff on simple maps") {
    CHECK(rotation_number_birkhoff(AnalyticCircleMap::arnold(0.0, 0.5), 0.0, 1000).value == 0.0);
    const auto f = AnalyticCircleMap::arnold(0.61, 0.3);
    for (long long n : {1000LL, 10000LL, 100000LL}) {
        const double a = rotation_number_birkhoff(f, 0.1, n).value;
        const double b = rotation_number_birkhoff(f, 0.1, 2 * n).value;
        CHECK(std::abs(a - b) <= 1.0 / n + 1.0 / (2.0 * n));
    }
}

TEST_CASE("closest returns of the golden rotation are Fibonacci") {
    const auto f = AnalyticCircleMap::rotation(fixtures::golden());
    const auto est = rotation_number_closest_return(f, 0.0, 12);
    const std::vector<long long> fib{1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233};
    REQUIRE(est.return_times.size() >= fib.size());
    for (std::size_t i = 0; i < fib.size(); ++i) CHECK(est.return_times[i] == fib[i]);
    for (auto a : est.quotients) CHECK(a == 1u);
}

TEST_CASE("tuned arnold map reads off golden quotients") {
    const auto& f = fixtures::tuned_arnold(0.3);
    const auto est = rotation_number_closest_return(f, 0.0, 8);
    REQUIRE(est.quotients.size() >= 8);
    for (int i = 0; i < 8; ++i) CHECK(est.quotients[static_cast<std::size_t>(i)] == 1u);
    // Birkhoff cross-check: q_8 = 34, q_9 = 55
    const long long n = 2'000'000;
    const double b = rotation_number_birkhoff(f, 0.0, n).value;
    CHECK(std::abs(b - est.value) <= 1.0 / (34.0 * 55.0) + 1.0 / n);

    // extracted quotients prefix-match the expansion of the value
    const auto deep = rotation_number_closest_return(AnalyticCircleMap::arnold(0.4, 0.2), 0.3, 6);
    const auto cf = arith::cf_expand(deep.value, 6);
    for (int k = 1; k <= 6; ++k) CHECK(*cf.quotient(k).exact == deep.quotients[static_cast<std::size_t>(k - 1)]);
}

TEST_CASE("estimates agree across starting points") {
    const auto& f = fixtures::tuned_arnold(0.3);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto ref = rotation_number_closest_return(f, 0.0, 12);
    for (int t = 0; t < 3; ++t) {
        const auto e = rotation_number_closest_return(f, u(rng), 12);
        CHECK(std::abs(e.value - ref.value) <= e.error_bound + ref.error_bound);
        CHECK(e.quotients == ref.quotients);
    }
}

TEST_CASE("phase locking is detected") {
    CHECK_THROWS_AS(rotation_number_closest_return(AnalyticCircleMap::arnold(0.01, 0.3), 0.2, 10),
                    PeriodicOrbitDetected);
    try {
        rotation_number_closest_return(AnalyticCircleMap::arnold(0.5, 0.3), 0.1, 10);
        FAIL("expected a locked orbit");
    } catch (const PeriodicOrbitDetected& e) {
        CHECK(e.q == 2);
        CHECK(e.p == 1);
    }
}

TEST_CASE("tune_parameter") {
    const auto golden = arith::ContinuedFraction::golden_mean();
    const auto t0 = tune_parameter(MapFamily::arnold(0.0), golden, 1e-12);
    CHECK(std::abs(t0.a - golden.value()) < 1e-11);

    const auto t = tune_parameter(MapFamily::arnold(0.3), golden, 1e-10);
    CHECK(t.a > 0.6);
    CHECK(t.a < 0.62);
    CHECK(t.achieved.lo >= golden.value() - 1e-10);
    CHECK(t.achieved.hi <= golden.value() + 1e-10);

    CHECK_THROWS_AS(tune_parameter(MapFamily::arnold(0.3), arith::ContinuedFraction::finite({2}), 1e-10),
                    PreconditionViolation);
}

TEST_CASE("eq_rot_check") {
    // residual is bounded by the closest-return width 1/(q_d q_{d+1}) at depth 30
    CHECK(eq_rot_check(AnalyticCircleMap::rotation(fixtures::golden()), 1000, 0.0, 30) < 1e-12);
    const auto& f = fixtures::tuned_arnold(0.3);
    const double at_q10 = eq_rot_check(f, 89);
    CHECK(at_q10 <= 1.0 / 89.0);
    // return times beat their generic neighbours
    for (long long q : {34LL, 55LL, 89LL, 144LL}) CHECK(eq_rot_check(f, q) < eq_rot_check(f, q + q / 3));
}

}
