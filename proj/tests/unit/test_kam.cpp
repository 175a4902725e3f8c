#include "circlelab/errors.hpp"
#include "circlelab/kam.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace circlelab;

namespace {

// real trig polynomial from positive modes, evaluated directly
double trig(const std::vector<Complex>& m, double x) {
    double s = 0.0;
    for (std::size_t k = 1; k <= m.size(); ++k) s += 2.0 * (m[k - 1] * std::polar(1.0, kTwoPi * k * x)).real();
    return s;
}

// h^{-1}(y) for an increasing lift h by bisection
double invert(const AnalyticCircleMap& h, double y) {
    double lo = y - 1.0, hi = y + 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double conjugacy_defect(const AnalyticCircleMap& h, const AnalyticCircleMap& f, double alpha, int samples) {
    double d = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = static_cast<double>(i) / samples;
        d = std::max(d, std::abs(h(f(invert(h, x))) - x - alpha));
    }
    return d;
}

}  // namespace

TEST_SUITE("kam") {

TEST_CASE("homological equation: single sine mode") {
    const double eps = 0.01, alpha = fixtures::golden();
    const std::vector<Complex> v{Complex(0.0, -eps / 2.0)};
    const auto sol = solve_homological(v, alpha, 4, 1e-8);
    const double divisor = 2.0 * std::sin(M_PI * alpha);
    CHECK(divisor == doctest::Approx(std::abs(std::polar(1.0, kTwoPi * alpha) - 1.0)).epsilon(1e-14));
    CHECK(divisor == doctest::Approx(1.86406).epsilon(1e-5));
    CHECK(sol.min_divisor == doctest::Approx(divisor).epsilon(1e-14));
    REQUIRE(sol.w.size() == 1);
    CHECK(2.0 * std::abs(sol.w[0]) == doctest::Approx(eps / divisor).epsilon(1e-14));
}

TEST_CASE("homological equation: residual vanishes pointwise") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 0.01);
    std::uniform_int_distribution<int> deg(1, 8);
    const double alpha = fixtures::golden();
    for (int t = 0; t < 20; ++t) {
        std::vector<Complex> v;
        const int K = deg(rng);
        for (int k = 1; k <= K; ++k) v.emplace_back(g(rng), g(rng));
        const auto sol = solve_homological(v, alpha, K, 1e-10);
        for (const Complex& r : homological_residual(v, sol.w, alpha, K)) CHECK(std::abs(r) < 1e-12);
        double sup = 0.0;
        for (int i = 0; i < 256; ++i) {
            const double x = i / 256.0;
            sup = std::max(sup, std::abs(trig(sol.w, x + alpha) - trig(sol.w, x) + trig(v, x)));
        }
        CHECK(sup < 1e-12);
    }
}

TEST_CASE("homological equation: degenerate inputs") {
    CHECK(solve_homological(std::vector<Complex>{}, 0.3, 8, 1e-8).w.empty());
    const std::vector<Complex> v{Complex(0.0), Complex(0.1, 0.0)};
    CHECK_THROWS_AS(solve_homological(v, 0.5, 2, 1e-8), Resonance);
    try {
        solve_homological(v, 0.5, 2, 1e-8);
    } catch (const Resonance& r) {
        CHECK(r.k == 2);
    }
    CHECK_THROWS_AS(solve_homological(v, 0.5 + 1e-10, 2, 1e-6), SmallDivisor);
}

TEST_CASE("kam_step") {
    const double alpha = fixtures::golden();
    const auto id_step = kam_step(AnalyticCircleMap::rotation(alpha), alpha, 8, 16, 0.02, 1e-8);
    CHECK(id_step.h.is_rotation());
    CHECK(id_step.h.mean_shift() == 0.0);
    CHECK(id_step.record.norm_v == 0.0);

    const AnalyticCircleMap f(alpha, {Complex(0.0, -0.005)});  // alpha + 0.01 sin(2 pi x)
    const auto st = kam_step(f, alpha, 8, 32, 0.0, 1e-8);
    const double v2 = strip_norm(st.f_next, alpha, 0.0).upper;
    CHECK(v2 < 1e-3);
    CHECK(v2 > 1e-6);
    // the projected f_next against h o f o h^{-1} sampled pointwise
    for (int i = 0; i < 64; ++i) {
        const double x = i / 64.0;
        CHECK(std::abs(st.f_next(x) - st.h(f(invert(st.h, x)))) < 1e-12);
    }

    // oversized perturbation: either h folds or the step does not contract
    const AnalyticCircleMap big(alpha, {Complex(0.0, -0.075)});
    try {
        const auto bs = kam_step(big, alpha, 8, 32, 0.0, 1e-8);
        CHECK(strip_norm(bs.f_next, alpha, 0.0).upper > 0.05);
    } catch (const ConjugacyNotDiffeo&) {
        CHECK(true);
    }
}

TEST_CASE("kam_iterate") {
    KamConfig cfg;
    const double alpha = cfg.alpha.value();
    const auto rot = kam_iterate(AnalyticCircleMap::rotation(alpha), cfg);
    CHECK(rot.verdict == KamVerdict::linearized);
    CHECK(rot.steps == 0);
    CHECK(rot.h_total.is_rotation());

    const auto& f = fixtures::tuned_arnold(0.05);
    const auto r = kam_iterate(f, cfg);
    CHECK(r.verdict == KamVerdict::linearized);
    CHECK(r.steps <= 6);
    CHECK(r.final_defect < 1e-8);
    CHECK(conjugacy_defect(r.h_total, f, alpha, 4096) < 1e-8);
    CHECK(r.decay_exponent >= 1.5);
    for (std::size_t n = 1; n < r.trace.size(); ++n)
        CHECK(r.trace[n].norm_v <= r.max_quad_constant * std::pow(r.trace[n - 1].norm_v, 1.5) * (1 + 1e-12));

    // Liouville number with a matching perturbation
    KamConfig lc;
    lc.alpha = arith::ContinuedFraction::generated(arith::Rule::exp_round, 3);
    const double la = lc.alpha.value();
    const auto lr = kam_iterate(AnalyticCircleMap(la, {Complex(0.0, -0.005)}), lc);
    CHECK(lr.verdict != KamVerdict::linearized);
}

TEST_CASE("KamConfig validation") {
    KamConfig c;
    CHECK(validate(c).empty());
    c.strips = {0.01, 0.02};
    const auto msgs = validate(c);
    REQUIRE_FALSE(msgs.empty());
    CHECK(msgs[0].find("KamConfig invariant") != std::string::npos);
    KamConfig d;
    d.truncation = {16, 8};
    CHECK_FALSE(validate(d).empty());
    const KamConfig e;
    for (int n = 0; n < 8; ++n) {
        CHECK(e.strip_at(n + 1) < e.strip_at(n));
        CHECK(e.strip_at(n) >= e.nu0 / 2.0);
        CHECK(KamConfig{}.truncation_at(n + 1, 1) >= KamConfig{}.truncation_at(n, 1));
    }
}

TEST_CASE("herman averaging") {
    const double alpha = fixtures::golden();
    const auto rot = herman_average(AnalyticCircleMap::rotation(alpha), 13, alpha, 256);
    CHECK(rot.defect < 1e-14);
    // h_n is the identity up to a translation
    for (int k = 1; k <= rot.h.degree(); ++k) CHECK(std::abs(rot.h.mode(k)) < 1e-14);

    const auto& f = fixtures::tuned_arnold(0.3);
    const std::vector<long long> q{5, 8, 13, 21, 34};  // q_4 .. q_8
    double prev = 1.0;
    for (long long n : q) {
        const auto hr = herman_average(f, n, alpha, 1024);
        CHECK(hr.identity_error < 1e-10);
        CHECK(hr.defect < prev);
        prev = hr.defect;
        // oracle: sup |F^q - id - q alpha| / q
        double bound = 0.0;
        for (int i = 0; i < 1024; ++i) {
            const double x = i / 1024.0;
            bound = std::max(bound, std::abs(iterate(f, x, n) - x - static_cast<double>(n) * alpha));
        }
        CHECK(hr.defect <= bound / static_cast<double>(n) + 1e-12);
    }
}

}
