#include "circlelab/arithmetic.hpp"
#include "circlelab/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace circlelab;
using namespace circlelab::arith;

namespace {

const double kGolden = 0.5 * (std::sqrt(5.0) - 1.0);

// value of [0; a_1, ..., a_n] by backward recursion, long double
long double cf_value(const std::vector<std::uint64_t>& a) {
    long double x = 0.0L;
    for (auto it = a.rbegin(); it != a.rend(); ++it) x = 1.0L / (static_cast<long double>(*it) + x);
    return x;
}

std::vector<std::uint64_t> exact_prefix(const ContinuedFraction& cf, int n) {
    std::vector<std::uint64_t> out;
    for (int k = 1; k <= n; ++k) out.push_back(*cf.quotient(k).exact);
    return out;
}

// plain Gauss-map Brjuno sum in long double
long double brjuno_oracle(long double x, int depth) {
    long double beta = 1.0L, sum = 0.0L;
    for (int j = 0; j < depth && x > 0.0L; ++j) {
        sum += beta * -std::log(x);
        beta *= x;
        const long double inv = 1.0L / x;
        x = inv - std::floor(inv);
    }
    return sum;
}

}  // namespace

TEST_SUITE("arithmetic") {

TEST_CASE("cf_expand recovers golden and silver quotients") {
    const auto g = cf_expand(kGolden, 5);
    CHECK(exact_prefix(g, 5) == std::vector<std::uint64_t>{1, 1, 1, 1, 1});
    const auto s = cf_expand(std::sqrt(2.0) - 1.0, 4);
    CHECK(exact_prefix(s, 4) == std::vector<std::uint64_t>{2, 2, 2, 2});
    CHECK_THROWS_AS(cf_expand(0.5, 3), RationalDetected);
}

TEST_CASE("cf_expand reproduces x within q_depth^-2") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int t = 0; t < 50; ++t) {
        const double x = u(rng);
        const int depth = 8;
        ContinuedFraction cf = ContinuedFraction::golden_mean();
        try {
            cf = cf_expand(x, depth);
        } catch (const RationalDetected&) {
            continue;
        }
        const int d = cf.available_depth();
        const auto conv = convergents(cf, d);
        const double q = conv.back().q->convert_to<double>();
        CHECK(std::abs(static_cast<double>(cf_value(exact_prefix(cf, d))) - x) <= 1.0 / (q * q));
    }
}

TEST_CASE("convergents follow the three-term recursion") {
    const auto g = convergents(ContinuedFraction::golden_mean(), 5);
    const long long gp[] = {1, 1, 2, 3, 5}, gq[] = {1, 2, 3, 5, 8};
    REQUIRE(g.size() == 5);
    for (int k = 0; k < 5; ++k) {
        CHECK(*g[k].p == gp[k]);
        CHECK(*g[k].q == gq[k]);
    }
    const auto s = convergents(ContinuedFraction::silver_mean(), 3);
    CHECK(*s[0].p == 1);
    CHECK(*s[0].q == 2);
    CHECK(*s[1].p == 2);
    CHECK(*s[1].q == 5);
    CHECK(*s[2].p == 5);
    CHECK(*s[2].q == 12);

    const auto f = ContinuedFraction::finite({7, 3, 15, 1, 292});
    const auto c1 = convergents(f, 1);
    CHECK(*c1[0].p == 1);
    CHECK(*c1[0].q == 7);

    // coprime, increasing q, |alpha - p/q| < 1/(q q')
    const auto cf = ContinuedFraction::periodic({3, 1, 4, 1, 5}, 2, 4);
    const auto c = convergents(cf, 20);
    const double alpha = cf.value();
    for (std::size_t k = 0; k + 1 < c.size(); ++k) {
        const long long p = c[k].p->convert_to<long long>(), q = c[k].q->convert_to<long long>();
        const long long q1 = c[k + 1].q->convert_to<long long>();
        CHECK(std::gcd(p, q) == 1);
        CHECK(q1 > q);
        CHECK(std::abs(alpha - static_cast<double>(p) / static_cast<double>(q)) <
              1.0 / (static_cast<double>(q) * static_cast<double>(q1)));
    }
}

TEST_CASE("diophantine_estimate matches a direct minimum over convergents") {
    for (auto [cf, limit] : {std::pair{ContinuedFraction::golden_mean(), 1.0 / std::sqrt(5.0)},
                             std::pair{ContinuedFraction::silver_mean(), 1.0 / (2.0 * std::sqrt(2.0))}}) {
        const long double alpha = cf.value();
        // oracle: p_k, q_k from the recursion in long double
        long double p0 = 1, q0 = 0, p1 = 0, q1 = 1, best = 1e30L;
        // q^2 |alpha - p/q| loses all digits once q^2 passes 1e14
        for (int k = 1; k <= 15; ++k) {
            const long double a = static_cast<long double>(*cf.quotient(k).exact);
            const long double p = a * p1 + p0, q = a * q1 + q0;
            best = std::min(best, q * q * std::abs(alpha - p / q));
            p0 = p1;
            q0 = q1;
            p1 = p;
            q1 = q;
        }
        const auto est = diophantine_estimate(cf, 0.0, 30);
        CHECK(est.gamma_hat == doctest::Approx(static_cast<double>(best)).epsilon(1e-9));
        CHECK(est.gamma_liminf == doctest::Approx(limit).epsilon(1e-3));
    }
    const auto liouville = ContinuedFraction::generated(Rule::exp_round, 3);
    CHECK(diophantine_estimate(liouville, 0.0, 6).gamma_hat < 1e-3);
}

TEST_CASE("brjuno_sum") {
    // oracle: partial sums of ln F_{n+2} / F_{n+1}
    const auto bs = brjuno_sum(ContinuedFraction::golden_mean(), 40);
    double fa = 1, fb = 2, sum = 0;  // q_1 = 1, q_2 = 2
    for (int n = 1; n < 40; ++n) {
        sum += std::log(fb) / fa;
        const double next = fa + fb;
        fa = fb;
        fb = next;
    }
    CHECK(bs.value == doctest::Approx(sum).epsilon(1e-12));
    CHECK_FALSE(bs.diverging);
    CHECK(bs.terms.back() < 1e-6);

    CHECK(brjuno_sum(ContinuedFraction::generated(Rule::brjuno_divergent, 1), 10).diverging);
    const auto two = brjuno_sum(ContinuedFraction::silver_mean(), 2);
    CHECK(two.value == doctest::Approx(std::log(5.0) / 2.0));
}

TEST_CASE("brjuno_function closed form and functional equation") {
    const double closed = std::log(1.0 / kGolden) / (1.0 - kGolden);
    // the double Gauss map amplifies rounding by phi^2 per step; 1e-8 is what survives
    CHECK(std::abs(brjuno_function(kGolden, 60) - closed) < 1e-7);
    CHECK(closed == doctest::Approx(1.2598289).epsilon(1e-7));

    const double x = 1.0 / (3.0 + kGolden);  // G(x) = golden
    CHECK(std::abs(brjuno_function(x, 60) - (std::log(1.0 / x) + x * closed)) < 1e-7);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(1e-3, 1.0 - 1e-3);
    for (int t = 0; t < 100; ++t) {
        const double y = u(rng);
        const double inv = 1.0 / y;
        const double gy = inv - std::floor(inv);
        const double lhs = brjuno_function(y, 40);
        CHECK(std::abs(lhs - (std::log(inv) + y * brjuno_function(gy, 40))) < 1e-6);
        CHECK(lhs == doctest::Approx(static_cast<double>(brjuno_oracle(y, 40))).epsilon(1e-6));
    }
    CHECK_THROWS_AS(brjuno_function(0.25, 5), RationalDetected);
}

TEST_CASE("r_alpha branches") {
    for (double a : {0.1, 0.5, kGolden}) {
        const double l = std::log(1.0 / a);
        CHECK(r_alpha(a, l) == doctest::Approx(1.0 / a));
        CHECK(r_alpha(a, 0.0) == doctest::Approx(1.0));
        for (double r : {0.0, 0.3, l, 2.0, 7.5}) CHECK(r_alpha(a, r) >= r);
        CHECK(r_alpha_log(l, 1.7) == doctest::Approx(r_alpha(a, 1.7)));
    }
    CHECK(r_alpha(0.5, 2.0) == doctest::Approx(2.0 * (2.0 - std::log(2.0) + 1.0)));
    CHECK(r_alpha(0.5, 2.0) == doctest::Approx(4.6137).epsilon(1e-4));
}

TEST_CASE("condition H discrimination") {
    HConfig cfg;  // m_max 10, k_max 20
    CHECK(condition_h_check(ContinuedFraction::golden_mean(), cfg).kind == HKind::pass_to_depth);
    CHECK(condition_h_check(ContinuedFraction::silver_mean(), cfg).kind == HKind::pass_to_depth);

    // e^{a_n^{1/2}} <= a_{n+1} <= e^{a_n}: Brjuno, never in H
    for (auto cf : {ContinuedFraction::generated(Rule::exp_power, 3, 0.5),
                    ContinuedFraction::generated(Rule::exp_round, 3)}) {
        const auto v = condition_h_check(cf, cfg);
        CHECK(v.kind != HKind::pass_to_depth);
    }
    CHECK_THROWS_AS(condition_h_check(ContinuedFraction::generated(Rule::brjuno_divergent, 1), cfg), NotBrjuno);

    // log q_{n+1} = (log q_n)^2 passes over the m range its quotients support
    HConfig short_cfg;
    short_cfg.m_max = 7;
    CHECK(condition_h_check(ContinuedFraction::generated(Rule::log_q_power, 2, 2.0), short_cfg).kind ==
          HKind::pass_to_depth);
}

TEST_CASE("classify bundles the three checks consistently") {
    ClassifyConfig cfg;
    cfg.sigma = 0.0;
    const auto g = classify(ContinuedFraction::golden_mean(), cfg);
    CHECK(g.diophantine);
    CHECK_FALSE(g.brjuno.diverging);
    CHECK(g.h.kind == HKind::pass_to_depth);

    const auto e = classify(ContinuedFraction::generated(Rule::exp_round, 3), cfg);
    CHECK_FALSE(e.diophantine);
    CHECK_FALSE(e.brjuno.diverging);
    CHECK(e.h.kind != HKind::pass_to_depth);

    const auto d = classify(ContinuedFraction::generated(Rule::brjuno_divergent, 1), cfg);
    CHECK(d.not_brjuno);
    CHECK_FALSE(d.diophantine);
}

TEST_CASE("periodic fractions serve any depth without changing earlier quotients") {
    const auto cf = ContinuedFraction::periodic({4, 1, 2}, 2, 2);
    CHECK(cf.available_depth() == kUnbounded);
    const std::vector<std::uint64_t> expect{4, 1, 2, 1, 2, 1, 2};
    CHECK(exact_prefix(cf, 7) == expect);
    (void)cf.quotient(500);
    CHECK(exact_prefix(cf, 7) == expect);
    CHECK_THROWS_AS(ContinuedFraction::finite({1, 0}), PreconditionViolation);
    CHECK_THROWS_AS(ContinuedFraction::finite({1, 2}).quotient(3), DepthExhausted);
}

}
