#include "circlelab/circle_map.hpp"
#include "circlelab/errors.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace circlelab;

namespace {

// ln Df^n(x) straight from the definition
double log_df_n(const AnalyticCircleMap& f, double x, long long n) {
    double s = 0.0;
    for (long long i = 0; i < n; ++i) {
        s += std::log(f.derivative(x, 1));
        x = f(x);
    }
    return s;
}

AnalyticCircleMap random_map(std::mt19937_64& rng, int degree, double scale) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Complex> modes;
    for (int k = 1; k <= degree; ++k) modes.emplace_back(scale * g(rng) / (k * k), scale * g(rng) / (k * k));
    return AnalyticCircleMap(0.3, modes);
}

}  // namespace

TEST_SUITE("circle_map") {

TEST_CASE("arnold closed forms") {
    const auto r = AnalyticCircleMap::arnold(0.3, 0.0);
    CHECK(r(0.2) == doctest::Approx(0.5));
    for (double x : {0.0, 0.17, 0.5, 0.91}) CHECK(r.derivative(x, 1) == 1.0);

    const auto f = AnalyticCircleMap::arnold(0.0, 0.5);
    for (double x : {0.0, 0.1, 0.25, 0.5, 0.8})
        CHECK(f.derivative(x, 1) == doctest::Approx(1.0 + 0.5 * std::cos(kTwoPi * x)));
    const auto cert = certify_diffeomorphism(f);
    CHECK(cert.certified);
    CHECK(cert.min_grid_df == doctest::Approx(0.5));
    CHECK(f(0.3) == doctest::Approx(0.3 + 0.5 / kTwoPi * std::sin(kTwoPi * 0.3)));
}

TEST_CASE("lift periodicity") {
    std::mt19937_64 rng(3);
    const auto f = random_map(rng, 6, 0.02);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        const double x = u(rng);
        CHECK(f(x + 1.0) - f(x) == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("non-diffeomorphisms are rejected") {
    const auto f = AnalyticCircleMap::arnold(0.1, 1.2);
    CHECK_FALSE(certify_diffeomorphism(f).certified);
    CHECK_THROWS_AS(require_diffeomorphism(f), NotADiffeomorphism);
    CHECK_NOTHROW(require_diffeomorphism(AnalyticCircleMap::arnold(0.1, 0.9)));
}

TEST_CASE("orbit log-derivatives") {
    const auto rot = AnalyticCircleMap::rotation(0.37);
    for (int r = 0; r < 4; ++r) CHECK(orbit_log_derivative(rot, 0.2, 50, r) == 0.0);

    const auto f = AnalyticCircleMap::arnold(0.61, 0.3);
    const double h = 1e-5;
    for (double x : {0.05, 0.33, 0.71}) {
        const long long n = 13;
        CHECK(orbit_log_derivative(f, x, n, 0) == doctest::Approx(log_df_n(f, x, n)).epsilon(1e-12));
        const double fd = (log_df_n(f, x + h, n) - log_df_n(f, x - h, n)) / (2.0 * h);
        CHECK(orbit_log_derivative(f, x, n, 1) == doctest::Approx(fd).epsilon(1e-6));
        const double fd2 = (orbit_log_derivative(f, x + h, n, 1) - orbit_log_derivative(f, x - h, n, 1)) / (2.0 * h);
        CHECK(orbit_log_derivative(f, x, n, 2) == doctest::Approx(fd2).epsilon(1e-5));
        const double fd3 = (orbit_log_derivative(f, x + h, n, 2) - orbit_log_derivative(f, x - h, n, 2)) / (2.0 * h);
        CHECK(orbit_log_derivative(f, x, n, 3) == doctest::Approx(fd3).epsilon(1e-4));
    }
    // the step-by-step accumulator agrees with the one-shot jet
    JetAccumulator acc(0.4);
    for (int i = 0; i < 21; ++i) acc.advance(f);
    const auto jet = orbit_jet(f, 0.4, 21);
    CHECK(acc.count() == 21);
    for (int r = 0; r < 4; ++r) CHECK(acc.state().log_d[r] == jet.log_d[r]);
}

TEST_CASE("classical Denjoy bound on the tuned arnold map") {
    const auto& f = fixtures::tuned_arnold(0.3);
    const double var = log_derivative_variation(f);
    const long long q4 = 5;
    for (int i = 0; i < 512; ++i) CHECK(std::abs(orbit_log_derivative(f, i / 512.0, q4, 0)) <= var);
}

TEST_CASE("inverse") {
    CHECK(inverse(AnalyticCircleMap::rotation(0.3), 0.75) == doctest::Approx(0.45));
    CHECK(inverse(AnalyticCircleMap::arnold(0.0, 0.5), 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    std::mt19937_64 rng(9);
    const auto f = random_map(rng, 5, 0.03);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double x = u(rng);
        CHECK(std::abs(f(inverse(f, f(x))) - f(x)) < 1e-12);
    }
}

TEST_CASE("compose_project") {
    const auto ab = compose_project(AnalyticCircleMap::rotation(0.2), AnalyticCircleMap::rotation(0.45), 4);
    CHECK(ab.map.mean_shift() == doctest::Approx(0.65).epsilon(1e-15));
    for (int k = 1; k <= 4; ++k) CHECK(std::abs(ab.map.mode(k)) < 1e-15);

    std::mt19937_64 rng(2);
    const auto f = random_map(rng, 6, 0.02);
    const auto id = compose_project(AnalyticCircleMap(), f, 6);
    CHECK(id.map.mean_shift() == doctest::Approx(f.mean_shift()).epsilon(1e-12));
    for (int k = 1; k <= 6; ++k) CHECK(std::abs(id.map.mode(k) - f.mode(k)) < 1e-12);

    // g o f sampled pointwise
    const auto g = AnalyticCircleMap::arnold(0.1, 0.2);
    const auto gf = compose_project(g, f, 48);
    for (int i = 0; i < 64; ++i) {
        const double x = i / 64.0 + 0.003;
        CHECK(std::abs(gf.map(x) - g(f(x))) < 1e-12);
    }
}

TEST_CASE("strip norms") {
    const double eps = 0.01, nu = 0.07;
    const std::vector<Complex> one{Complex(eps, 0.0)};
    CHECK(strip_norm(0.0, one, nu).upper == doctest::Approx(2.0 * eps * std::exp(kTwoPi * nu)));

    // eps sin(2 pi x): sup on the circle is eps
    const std::vector<Complex> sine{Complex(0.0, -eps / 2.0)};
    const auto s = strip_norm(0.0, sine, 0.0);
    REQUIRE(s.grid_lower.has_value());
    CHECK(*s.grid_lower == doctest::Approx(eps).epsilon(1e-6));
    CHECK(s.upper >= *s.grid_lower);

    // random degree 8 at nu = 0.1 against the sup sampled on Im z = +-nu
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Complex> m;
    for (int k = 1; k <= 8; ++k) m.emplace_back(g(rng), g(rng));
    double sup = 0.0;
    for (int i = 0; i < 4096; ++i)
        for (double y : {0.1, -0.1}) {
            const Complex z(i / 4096.0, y);
            Complex v = 0.0;
            for (int k = 1; k <= 8; ++k) {
                v += m[k - 1] * std::exp(Complex(0.0, kTwoPi * k) * z);
                v += std::conj(m[k - 1]) * std::exp(Complex(0.0, -kTwoPi * k) * z);
            }
            sup = std::max(sup, std::abs(v));
        }
    CHECK(strip_norm(0.0, m, 0.1).upper >= sup);
}

TEST_CASE("log_derivative_variation") {
    CHECK(log_derivative_variation(AnalyticCircleMap::rotation(0.4)) == 0.0);
    for (double b : {0.05, 0.3, 0.9}) {
        const auto f = AnalyticCircleMap::arnold(0.2, b);
        const double expect = 2.0 * std::log((1.0 + b) / (1.0 - b));
        CHECK(log_derivative_variation(f) == doctest::Approx(expect).epsilon(1e-12));
        // fine-grid variation sum
        double fine = 0.0, prev = std::log(f.derivative(0.0, 1));
        for (int i = 1; i <= 100000; ++i) {
            const double cur = std::log(f.derivative(i / 100000.0, 1));
            fine += std::abs(cur - prev);
            prev = cur;
        }
        CHECK(fine == doctest::Approx(expect).epsilon(1e-6));
    }
    // translation x -> x + s multiplies mode k by e^{2 pi i k s}
    std::mt19937_64 rng(4);
    const auto f = random_map(rng, 4, 0.02);
    std::vector<Complex> shifted;
    for (int k = 1; k <= 4; ++k) shifted.push_back(f.mode(k) * std::polar(1.0, kTwoPi * k * 0.137));
    CHECK(log_derivative_variation(AnalyticCircleMap(f.mean_shift(), shifted)) ==
          doctest::Approx(log_derivative_variation(f)).epsilon(1e-9));
}

TEST_CASE("project_lift recovers a trigonometric polynomial") {
    const auto p = project_lift([](double x) { return x + 0.25 + 0.01 * std::cos(kTwoPi * 3.0 * x); }, 4);
    CHECK(p.map.mean_shift() == doctest::Approx(0.25));
    CHECK(std::abs(p.map.mode(3) - Complex(0.005, 0.0)) < 1e-15);
    CHECK(std::abs(p.map.mode(1)) < 1e-15);
    CHECK(p.tail_energy < 1e-28);
}

}
