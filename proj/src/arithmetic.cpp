#include "circlelab/arithmetic.hpp"

#include "circlelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace circlelab::arith {

namespace {

constexpr int kGeneratedCap = 512;
constexpr int kBackwardPadding = 80;  // 0.382^80 < 1e-33
constexpr double kExactLogLimit = 43.0;  // e^43 < 2^63

double log_add_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

double log_big(const BigInt& x) {
    const auto bits = static_cast<long>(boost::multiprecision::msb(x));
    if (bits < 1000) return std::log(x.convert_to<double>());
    const long shift = bits - 60;
    const BigInt top = x >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

Quotient exact_quotient(std::uint64_t a) {
    return Quotient{a, std::log(static_cast<double>(a))};
}

/// Quotient whose logarithm is `log_a`; exact when small enough to round.
Quotient quotient_from_log(double log_a, bool ceil_mode) {
    if (log_a <= kExactLogLimit) {
        const double v = std::exp(log_a);
        auto a = static_cast<std::uint64_t>(ceil_mode ? std::ceil(v) : std::llround(v));
        a = std::max<std::uint64_t>(a, 1);
        return exact_quotient(a);
    }
    return Quotient{std::nullopt, log_a};
}

std::vector<Quotient> expand_rule(Rule rule, std::uint64_t a1, double c) {
    std::vector<Quotient> out;
    out.push_back(exact_quotient(a1));
    double log_q_prev = 0.0;  // ln q_0
    double log_q = log_add_exp(out.back().log_value + log_q_prev,
                               -std::numeric_limits<double>::infinity());  // ln q_1
    for (int n = 1; n < kGeneratedCap; ++n) {
        const Quotient& a = out.back();
        double log_next = 0.0;
        bool ceil_mode = false;
        switch (rule) {
            case Rule::exp_round:
                log_next = a.as_double();
                break;
            case Rule::exp_power:
                log_next = std::pow(a.as_double(), c);
                ceil_mode = true;
                break;
            case Rule::log_q_power:
                log_next = std::max(0.0, std::pow(log_q, c) - log_q);
                break;
            case Rule::brjuno_divergent:
                log_next = static_cast<double>(n) * std::exp(log_q);
                break;
        }
        if (!std::isfinite(log_next)) break;
        out.push_back(quotient_from_log(log_next, ceil_mode));
        const double log_q_next = log_add_exp(out.back().log_value + log_q, log_q_prev);
        if (!std::isfinite(log_q_next)) break;
        log_q_prev = log_q;
        log_q = log_q_next;
    }
    return out;
}

/// G^j(alpha) and ln(1/G^j(alpha)) for j in [0, count), from one backward pass.
struct GaussTable {
    std::vector<double> t;
    std::vector<double> log_inv;
};

GaussTable gauss_table(const ContinuedFraction& cf, int count) {
    const int avail = cf.available_depth();
    count = std::min(count, avail == kUnbounded ? count : avail);
    GaussTable table;
    if (count <= 0) return table;
    const int top = avail == kUnbounded ? count + kBackwardPadding
                                        : std::min(avail, count + kBackwardPadding);
    std::vector<double> t(static_cast<std::size_t>(top) + 1, 0.0);
    std::vector<double> log_inv(static_cast<std::size_t>(top), 0.0);
    for (int i = top; i >= 1; --i) {
        const Quotient a = cf.quotient(i);
        const double tail = t[static_cast<std::size_t>(i)];
        // G^{i-1} = 1 / (a_i + G^i)
        log_inv[static_cast<std::size_t>(i - 1)] =
            a.log_value + std::log1p(tail * std::exp(-a.log_value));
        t[static_cast<std::size_t>(i - 1)] = 1.0 / (a.as_double() + tail);
    }
    table.t.assign(t.begin(), t.begin() + count);
    table.log_inv.assign(log_inv.begin(), log_inv.begin() + count);
    return table;
}

BrjunoValue brjuno_from_table(const GaussTable& table, int m, int depth, double b_max) {
    BrjunoValue out;
    const int avail = static_cast<int>(table.log_inv.size()) - m;
    const int d = std::min(depth, avail);
    double log_beta = 0.0;  // ln beta_{i-1}
    for (int i = 0; i < d; ++i) {
        const double li = table.log_inv[static_cast<std::size_t>(m + i)];
        out.value += std::exp(std::log(li) + log_beta);
        log_beta -= li;
    }
    out.terms = std::max(d, 0);
    out.tail_bound = std::exp(log_beta) * b_max;
    return out;
}

}  // namespace

double Quotient::as_double() const {
    return exact ? static_cast<double>(*exact) : std::exp(log_value);
}

std::string rule_name(Rule rule) {
    switch (rule) {
        case Rule::exp_round: return "exp_round";
        case Rule::exp_power: return "exp_power";
        case Rule::log_q_power: return "log_q_power";
        case Rule::brjuno_divergent: return "brjuno_divergent";
    }
    return "unknown";
}

Rule rule_from_name(const std::string& name) {
    for (Rule r : {Rule::exp_round, Rule::exp_power, Rule::log_q_power, Rule::brjuno_divergent})
        if (rule_name(r) == name) return r;
    throw PreconditionViolation("unknown quotient rule '" + name + "'");
}

ContinuedFraction ContinuedFraction::finite(std::vector<std::uint64_t> quotients) {
    if (quotients.empty()) throw PreconditionViolation("continued fraction needs at least one quotient");
    ContinuedFraction cf;
    for (auto a : quotients) {
        if (a == 0) throw PreconditionViolation("partial quotients must be >= 1");
        cf.stored_.push_back(exact_quotient(a));
    }
    cf.tail_.kind = TailKind::finite;
    return cf;
}

ContinuedFraction ContinuedFraction::periodic(std::vector<std::uint64_t> quotients, int start, int period) {
    if (start < 1 || period < 1)
        throw PreconditionViolation("periodic tail needs start >= 1 and period >= 1");
    if (quotients.size() < static_cast<std::size_t>(start - 1 + period))
        throw PreconditionViolation("periodic tail references quotients beyond the stored block");
    ContinuedFraction cf = finite(std::move(quotients));
    cf.stored_.resize(static_cast<std::size_t>(start - 1 + period));
    cf.tail_.kind = TailKind::periodic;
    cf.tail_.start = start;
    cf.tail_.period = period;
    return cf;
}

ContinuedFraction ContinuedFraction::generated(Rule rule, std::uint64_t a1, double param) {
    if (a1 == 0) throw PreconditionViolation("partial quotients must be >= 1");
    if (rule == Rule::exp_power && !(param > 0.0 && param < 1.0))
        throw PreconditionViolation("exp_power needs 0 < c < 1");
    if (rule == Rule::exp_power && a1 < 2)
        throw PreconditionViolation("exp_power needs a1 >= 2 so that a_{n+1} <= e^{a_n}");
    if (rule == Rule::log_q_power && !(param > 0.0))
        throw PreconditionViolation("log_q_power needs c > 0");
    ContinuedFraction cf;
    cf.stored_ = expand_rule(rule, a1, param);
    cf.tail_.kind = TailKind::generated;
    cf.tail_.rule = rule;
    cf.tail_.a1 = a1;
    cf.tail_.param = param;
    return cf;
}

int ContinuedFraction::available_depth() const {
    if (tail_.kind == TailKind::periodic) return kUnbounded;
    return static_cast<int>(stored_.size());
}

Quotient ContinuedFraction::quotient(int n) const {
    if (n < 1) throw PreconditionViolation("quotient index starts at 1");
    if (tail_.kind == TailKind::periodic) {
        if (n < tail_.start) return stored_[static_cast<std::size_t>(n - 1)];
        const int offset = (n - tail_.start) % tail_.period;
        return stored_[static_cast<std::size_t>(tail_.start - 1 + offset)];
    }
    if (n > available_depth()) throw DepthExhausted(n, available_depth());
    return stored_[static_cast<std::size_t>(n - 1)];
}

double ContinuedFraction::gauss_iterate(int m) const {
    const auto table = gauss_table(*this, m + 1);
    if (static_cast<int>(table.t.size()) <= m) throw DepthExhausted(m + 1, available_depth());
    return table.t[static_cast<std::size_t>(m)];
}

double ContinuedFraction::log_inv_gauss_iterate(int m) const {
    const auto table = gauss_table(*this, m + 1);
    if (static_cast<int>(table.log_inv.size()) <= m) throw DepthExhausted(m + 1, available_depth());
    return table.log_inv[static_cast<std::size_t>(m)];
}

ContinuedFraction cf_expand(double x, int depth) {
    if (!(x > 0.0 && x < 1.0)) throw PreconditionViolation("cf_expand needs x in (0,1)");
    if (depth < 1) throw PreconditionViolation("cf_expand needs depth >= 1");
    std::vector<std::uint64_t> quotients;
    double q_prev = 0.0;
    double q = 1.0;
    for (int n = 1; n <= depth; ++n) {
        // Rounding error in the n-th Gauss iterate grows like eps q_{n-1}^2.
        if (x <= 4.0 * std::numeric_limits<double>::epsilon() * q * q) throw RationalDetected(n - 1);
        const double inv = 1.0 / x;
        const double a = std::floor(inv);
        if (a >= 9.2e18) throw RationalDetected(n - 1);
        quotients.push_back(static_cast<std::uint64_t>(a));
        x = inv - a;
        const double q_next = a * q + q_prev;
        q_prev = q;
        q = q_next;
    }
    return ContinuedFraction::finite(std::move(quotients));
}

std::vector<Convergent> convergents(const ContinuedFraction& cf, int n) {
    if (n < 1) throw PreconditionViolation("convergents needs n >= 1");
    n = std::min(n, cf.available_depth());
    std::vector<Convergent> out;
    out.reserve(static_cast<std::size_t>(n));
    BigInt p_prev = 1, q_prev = 0, p = 0, q = 1;
    bool exact = true;
    double log_q_prev = -std::numeric_limits<double>::infinity();
    double log_q = 0.0;
    for (int k = 1; k <= n; ++k) {
        const Quotient a = cf.quotient(k);
        Convergent c;
        c.index = k;
        if (exact && a.exact) {
            const BigInt pk = BigInt(*a.exact) * p + p_prev;
            const BigInt qk = BigInt(*a.exact) * q + q_prev;
            p_prev = p;
            q_prev = q;
            p = pk;
            q = qk;
            c.p = p;
            c.q = q;
            c.log_q = log_big(q);
        } else {
            exact = false;
            c.log_q = log_add_exp(a.log_value + log_q, log_q_prev);
        }
        log_q_prev = log_q;
        log_q = c.log_q;
        out.push_back(std::move(c));
    }
    return out;
}

DiophantineEstimate diophantine_estimate(const ContinuedFraction& cf, double sigma, int depth) {
    if (depth < 2) throw PreconditionViolation("diophantine_estimate needs depth >= 2");
    if (sigma < 0.0) throw PreconditionViolation("sigma must be >= 0");
    // k ranges over 1..d and needs q_{k+1} and G^{k+1}(alpha).
    const int avail = cf.available_depth();
    const int d = std::min(depth, avail == kUnbounded ? depth : avail - 1);
    if (d < 1) throw DepthExhausted(depth, avail);
    const auto conv = convergents(cf, d + 1);
    const auto table = gauss_table(cf, d + 2);
    DiophantineEstimate out;
    out.depth = d;
    out.gamma_hat = std::numeric_limits<double>::infinity();
    out.gamma_liminf = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= d; ++k) {
        const double lq = conv[static_cast<std::size_t>(k - 1)].log_q;
        const double lq_next = conv[static_cast<std::size_t>(k)].log_q;
        const double t = static_cast<std::size_t>(k + 1) < table.t.size()
                             ? table.t[static_cast<std::size_t>(k + 1)] : 0.0;
        // q_k^{2+s} |alpha - p_k/q_k| = q_k^{1+s} / (q_{k+1} + q_k G^{k+1})
        const double log_den = lq_next + std::log1p(std::exp(lq - lq_next) * t);
        const double g = std::exp((1.0 + sigma) * lq - log_den);
        if (g < out.gamma_hat) {
            out.gamma_hat = g;
            out.attained_at = k;
        }
        if (k > d / 2) out.gamma_liminf = std::min(out.gamma_liminf, g);
    }
    return out;
}

BrjunoSum brjuno_sum(const ContinuedFraction& cf, int depth) {
    if (depth < 2) throw PreconditionViolation("brjuno_sum needs depth >= 2");
    const int d = std::min(depth, cf.available_depth());
    BrjunoSum out;
    out.depth = d;
    if (d < 2) return out;
    const auto conv = convergents(cf, d);
    for (int n = 1; n < d; ++n) {
        const double lq_next = conv[static_cast<std::size_t>(n)].log_q;
        const double lq = conv[static_cast<std::size_t>(n - 1)].log_q;
        const double term = lq_next > 0.0 ? std::exp(std::log(lq_next) - lq) : 0.0;
        out.terms.push_back(term);
        out.value += term;
    }
    if (static_cast<int>(out.terms.size()) >= kDivergenceWindow) {
        out.diverging = std::all_of(out.terms.end() - kDivergenceWindow, out.terms.end(),
                                    [](double t) { return t > kDivergenceThreshold; });
    }
    return out;
}

double brjuno_function(double x, int depth) {
    if (!(x > 0.0 && x < 1.0)) throw PreconditionViolation("brjuno_function needs x in (0,1)");
    if (depth < 1) throw PreconditionViolation("brjuno_function needs depth >= 1");
    double beta = 1.0;
    double sum = 0.0;
    for (int j = 0; j < depth; ++j) {
        if (x <= 0.0) {
            if (beta > std::numeric_limits<double>::epsilon()) throw RationalDetected(j);
            break;  // remaining terms are below double resolution
        }
        sum += beta * std::log(1.0 / x);
        beta *= x;
        const double inv = 1.0 / x;
        x = inv - std::floor(inv);
    }
    return sum;
}

BrjunoValue brjuno_function(const ContinuedFraction& cf, int m, int depth, double b_max) {
    if (depth < 1 || m < 0) throw PreconditionViolation("brjuno_function needs depth >= 1, m >= 0");
    const auto table = gauss_table(cf, m + depth);
    if (static_cast<int>(table.log_inv.size()) <= m) throw DepthExhausted(m + 1, cf.available_depth());
    return brjuno_from_table(table, m, depth, b_max);
}

double r_alpha_log(double log_inv_alpha, double r) {
    if (r >= log_inv_alpha) {
        const double slope_arg = r - log_inv_alpha + 1.0;
        return std::exp(log_inv_alpha + std::log(slope_arg));
    }
    return std::exp(r);
}

double r_alpha(double alpha, double r) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionViolation("r_alpha needs alpha in (0,1)");
    return r_alpha_log(-std::log(alpha), r);
}

std::string to_string(HKind kind) {
    switch (kind) {
        case HKind::pass_to_depth: return "pass_to_depth";
        case HKind::fail_at: return "fail_at";
        case HKind::inconclusive: return "inconclusive";
    }
    return "unknown";
}

HVerdict condition_h_check(const ContinuedFraction& cf, const HConfig& config) {
    if (config.m_max < 0 || config.k_max < 1 || config.b_depth < 1)
        throw PreconditionViolation("condition_h_check needs m_max >= 0, k_max >= 1, b_depth >= 1");
    const int span = config.m_max + config.k_max + config.b_depth;
    const int avail = cf.available_depth();
    const auto sum = brjuno_sum(cf, std::max(2, std::min(span, avail)));
    if (sum.diverging) throw NotBrjuno(sum.depth);

    const auto table = gauss_table(cf, span);
    const int known = static_cast<int>(table.log_inv.size());

    HVerdict out;
    out.k_max = config.k_max;
    out.b_depth = config.b_depth;
    out.m_max = -1;
    bool all_pass = true;
    for (int m = 0; m <= config.m_max; ++m) {
        HRecord rec;
        rec.m = m;
        rec.min_margin = std::numeric_limits<double>::infinity();
        bool truncated = false;
        bool margins_ok = true;
        double r = 0.0;  // R_0(alpha_m)
        for (int k = 0; k <= config.k_max; ++k) {
            const int j = m + k;
            if (j >= known) {
                truncated = true;
                break;
            }
            const BrjunoValue b = brjuno_from_table(table, j, config.b_depth, config.b_max);
            ++rec.k_evaluated;
            rec.max_tail = std::max(rec.max_tail, b.tail_bound);
            const double upper = b.value + b.tail_bound;
            if (r >= upper && std::isfinite(upper)) {
                rec.passed = true;
                rec.pass_k = k;
                break;
            }
            const double margin = b.value - r;
            rec.min_margin = std::min(rec.min_margin, margin);
            if (!(margin > b.tail_bound)) margins_ok = false;
            // R_{k+1}(alpha_m) = R_{alpha_{m+k}}(R_k(alpha_m))
            r = r_alpha_log(table.log_inv[static_cast<std::size_t>(j)], r);
        }
        rec.certified_fail = !rec.passed && !truncated && margins_ok;
        out.records.push_back(rec);
        if (rec.certified_fail) {
            out.kind = HKind::fail_at;
            out.fail_m = m;
            out.m_max = m;
            return out;
        }
        if (truncated && !rec.passed) break;  // nothing further is decidable
        if (!rec.passed) all_pass = false;
        if (all_pass) out.m_max = m;
    }
    // a pass must cover the whole requested range; running out of quotients
    // first leaves the verdict open
    out.kind = (all_pass && out.m_max == config.m_max) ? HKind::pass_to_depth : HKind::inconclusive;
    return out;
}

ArithmeticVerdict classify(const ContinuedFraction& cf, const ClassifyConfig& config) {
    ArithmeticVerdict v;
    v.config = config;
    v.sigma = config.sigma;
    v.gamma_floor = config.gamma_floor;
    v.dio = diophantine_estimate(cf, config.sigma, config.diophantine_depth);
    v.diophantine = v.dio.gamma_hat >= config.gamma_floor;
    v.brjuno = brjuno_sum(cf, config.brjuno_depth);
    v.brjuno_b = brjuno_function(cf, 0, config.brjuno_depth, config.h.b_max);
    if (v.brjuno.diverging) {
        v.not_brjuno = true;
        v.h.kind = HKind::fail_at;  // H is contained in B
        v.h.fail_m = 0;
        v.h.k_max = config.h.k_max;
        v.h.b_depth = config.h.b_depth;
        v.h.m_max = 0;
    } else {
        v.h = condition_h_check(cf, config.h);
    }
    if (v.diophantine && v.h.kind == HKind::fail_at) {
        v.h.kind = HKind::inconclusive;
        v.consistency_adjusted = true;
    }
    return v;
}

}  // namespace circlelab::arith
