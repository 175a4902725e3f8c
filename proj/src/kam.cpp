#include "circlelab/kam.hpp"

#include "circlelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace circlelab {

namespace {

// divisors this close to zero are resonances rather than small divisors
double resonance_floor(int k) { return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1, k); }

struct Composite {
    const AnalyticCircleMap* f = nullptr;
    std::vector<AnalyticCircleMap> hs;  // h_1, h_2, ... applied in that order

    double H(double x) const {
        for (const auto& h : hs) x = h(x);
        return x;
    }
    double H_inv(double y) const {
        for (auto it = hs.rbegin(); it != hs.rend(); ++it) y = inverse(*it, y);
        return y;
    }
    double conjugated(double x) const { return H((*f)(H_inv(x))); }
};

double min_derivative(const AnalyticCircleMap& h) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kDiffeoGrid; ++i) m = std::min(m, h.jet(static_cast<double>(i) / kDiffeoGrid).d[1]);
    return m;
}

}  // namespace

HomologicalSolution solve_homological(std::span<const Complex> v, double alpha, int N, double divisor_floor) {
    if (N < 0) throw PreconditionViolation("truncation order must be >= 0");
    if (!(divisor_floor > 0.0)) throw PreconditionViolation("divisor_floor must be > 0");
    HomologicalSolution out;
    out.min_divisor = std::numeric_limits<double>::infinity();
    const int K = std::min<int>(N, static_cast<int>(v.size()));
    out.w.assign(static_cast<std::size_t>(K), Complex{});
    for (int k = 1; k <= K; ++k) {
        const Complex vk = v[static_cast<std::size_t>(k - 1)];
        if (vk == Complex{}) continue;
        const Complex div = std::polar(1.0, kTwoPi * k * alpha) - 1.0;
        const double mag = std::abs(div);
        if (mag <= resonance_floor(k)) throw Resonance(k);
        if (mag < divisor_floor) throw SmallDivisor(k, mag);
        if (mag < out.min_divisor) {
            out.min_divisor = mag;
            out.min_divisor_k = k;
        }
        out.w[static_cast<std::size_t>(k - 1)] = -vk / div;
    }
    while (!out.w.empty() && out.w.back() == Complex{}) out.w.pop_back();
    if (out.min_divisor_k == 0) out.min_divisor = 0.0;
    return out;
}

std::vector<Complex> homological_residual(std::span<const Complex> v, std::span<const Complex> w, double alpha,
                                          int N) {
    // all three terms are trigonometric polynomials, so the residual is
    // assembled mode by mode
    std::vector<Complex> r(static_cast<std::size_t>(N));
    for (int k = 1; k <= N; ++k) {
        const Complex wk = k <= static_cast<int>(w.size()) ? w[static_cast<std::size_t>(k - 1)] : Complex{};
        const Complex vk = k <= static_cast<int>(v.size()) ? v[static_cast<std::size_t>(k - 1)] : Complex{};
        r[static_cast<std::size_t>(k - 1)] = wk * (std::polar(1.0, kTwoPi * k * alpha) - 1.0) + vk;
    }
    return r;
}

int KamConfig::truncation_at(int n, int degree) const {
    if (!truncation.empty()) return truncation[static_cast<std::size_t>(std::min<int>(n, static_cast<int>(truncation.size()) - 1))];
    const long long n0 = std::max(2, 2 * degree);
    long long N = n0;
    for (int i = 0; i < n && N < n_cap; ++i) N *= 2;
    return static_cast<int>(std::min<long long>(N, std::max<long long>(n_cap, n0)));
}

double KamConfig::strip_at(int n) const {
    if (!strips.empty()) return strips[static_cast<std::size_t>(std::min<int>(n, static_cast<int>(strips.size()) - 1))];
    return nu0 * (0.5 + std::ldexp(1.0, -n - 1));
}

std::vector<std::string> validate(const KamConfig& c) {
    std::vector<std::string> errs;
    if (!(c.nu0 > 0.0)) errs.push_back("kam.nu0: must be > 0");
    if (c.max_steps < 1) errs.push_back("kam.max_steps: must be >= 1");
    if (c.n_cap < 1) errs.push_back("kam.n_cap: must be >= 1");
    if (!(c.divisor_floor > 0.0)) errs.push_back("kam.divisor_floor: must be > 0");
    if (!(c.threshold > 0.0)) errs.push_back("kam.threshold: must be > 0");
    for (std::size_t i = 1; i < c.strips.size(); ++i)
        if (!(c.strips[i] < c.strips[i - 1])) {
            errs.push_back("kam.strips: KamConfig invariant violated, nu_n must be strictly decreasing (index " +
                           std::to_string(i) + ")");
            break;
        }
    if (!c.strips.empty()) {
        if (!(c.strips.front() <= c.nu0)) errs.push_back("kam.strips: nu_0 must not exceed kam.nu0");
        if (c.strips.back() < c.nu0 / 2.0)
            errs.push_back("kam.strips: KamConfig invariant violated, final strip must be >= nu0 / 2");
    }
    for (std::size_t i = 0; i < c.truncation.size(); ++i) {
        if (c.truncation[i] < 1) {
            errs.push_back("kam.truncation: entries must be >= 1");
            break;
        }
        if (i > 0 && c.truncation[i] < c.truncation[i - 1]) {
            errs.push_back("kam.truncation: KamConfig invariant violated, N_n must be nondecreasing (index " +
                           std::to_string(i) + ")");
            break;
        }
    }
    return errs;
}

std::string to_string(KamVerdict v) {
    switch (v) {
    case KamVerdict::linearized: return "linearized";
    case KamVerdict::diverged: return "diverged";
    case KamVerdict::resonance_stop: return "resonance_stop";
    }
    return "?";
}

KamStepResult kam_step(const AnalyticCircleMap& f, double alpha, int N, int N_out, double nu, double divisor_floor,
                       double alias_fraction) {
    KamStepResult out;
    const auto sol = solve_homological(f.modes(), alpha, N, divisor_floor);
    out.h = AnalyticCircleMap(0.0, sol.w);
    out.record.norm_v = strip_norm(f, alpha, nu).upper;
    out.record.norm_w = strip_norm(0.0, sol.w, nu).upper;
    out.record.mean_shift = std::abs(f.mean_shift() - alpha);
    out.record.min_divisor = sol.min_divisor;
    out.record.truncation = N;
    out.record.nu = nu;
    out.record.min_dh = min_derivative(out.h);
    if (!(certify_diffeomorphism(out.h).certified)) throw ConjugacyNotDiffeo(out.record.min_dh);
    const int K = std::max({N_out, f.degree(), 1});
    const auto proj = project_lift([&](double x) { return out.h(f(inverse(out.h, x))); }, K, alias_fraction);
    out.f_next = proj.map;
    out.record.tail_energy = proj.tail_energy;
    return out;
}

KamResult kam_iterate(const AnalyticCircleMap& f, const KamConfig& config) {
    const auto errs = validate(config);
    if (!errs.empty()) throw PreconditionViolation(errs.front());
    require_diffeomorphism(f);
    const double alpha = config.alpha.value();

    KamResult res;
    {
        const auto b = arith::brjuno_function(config.alpha, 0, 40, 10.0);
        res.brjuno_strip = b.value / kTwoPi;
    }
    Composite comp;
    comp.f = &f;
    AnalyticCircleMap fn = f;
    double tail = 0.0;
    int steps = 0;
    int growth = 0;
    for (int n = 0;; ++n) {
        const double nu = config.strip_at(n);
        KamStepRecord rec;
        rec.step = n;
        rec.nu = nu;
        rec.truncation = config.truncation_at(n, f.degree());
        rec.norm_v = strip_norm(fn, alpha, nu).upper;
        rec.mean_shift = std::abs(fn.mean_shift() - alpha);
        rec.tail_energy = tail;
        if (!res.trace.empty()) {
            const double prev = res.trace.back().norm_v;
            rec.quad_constant = rec.norm_v / std::pow(prev, 1.5);
            res.max_quad_constant = std::max(res.max_quad_constant, rec.quad_constant);
            res.max_mean_shift_constant = std::max(res.max_mean_shift_constant, rec.mean_shift / (prev * prev));
            growth = rec.norm_v > prev ? growth + 1 : 0;
        }
        res.strip_final = nu;
        if (rec.norm_v < config.threshold) {
            res.trace.push_back(rec);
            res.verdict = KamVerdict::linearized;
            res.reason = "||v_n|| below threshold";
            break;
        }
        if (growth >= 2) {
            res.trace.push_back(rec);
            res.verdict = KamVerdict::diverged;
            res.reason = "||v_n|| grew on two consecutive steps";
            break;
        }
        if (n >= config.max_steps) {
            res.trace.push_back(rec);
            res.verdict = KamVerdict::diverged;
            res.reason = "max_steps reached";
            break;
        }
        HomologicalSolution sol;
        try {
            sol = solve_homological(fn.modes(), alpha, rec.truncation, config.divisor_floor);
        } catch (const SmallDivisor& e) {
            res.trace.push_back(rec);
            res.verdict = KamVerdict::resonance_stop;
            res.reason = e.what();
            break;
        } catch (const Resonance& e) {
            res.trace.push_back(rec);
            res.verdict = KamVerdict::resonance_stop;
            res.reason = e.what();
            break;
        }
        AnalyticCircleMap h(0.0, sol.w);
        rec.norm_w = strip_norm(0.0, sol.w, nu).upper;
        rec.min_divisor = sol.min_divisor;
        rec.min_dh = min_derivative(h);
        res.trace.push_back(rec);
        if (!certify_diffeomorphism(h).certified) {
            res.verdict = KamVerdict::diverged;
            res.reason = ConjugacyNotDiffeo(rec.min_dh).what();
            break;
        }
        comp.hs.push_back(std::move(h));
        ++steps;
        // re-form f_{n+1} from the original map so truncation errors do not pile up
        const int K_next = std::max(config.truncation_at(n + 1, f.degree()), f.degree());
        const auto proj = project_lift([&](double x) { return comp.conjugated(x); }, K_next, config.alias_fraction);
        fn = proj.map;
        tail = proj.tail_energy;
    }
    res.steps = steps;

    // h_total as a trigonometric polynomial
    const int K_h = 2 * std::max(config.truncation_at(steps, f.degree()), f.degree());
    if (comp.hs.empty()) {
        res.h_total = AnalyticCircleMap();
    } else {
        const auto ph = project_lift([&](double x) { return comp.H(x); }, K_h, config.alias_fraction);
        res.h_total = ph.map;
        res.h_tail_energy = ph.tail_energy;
    }
    double defect = 0.0;
    for (int i = 0; i < kNormGrid; ++i) {
        const double x = static_cast<double>(i) / kNormGrid;
        const double y = res.h_total(f(inverse(res.h_total, x)));
        defect = std::max(defect, std::abs(y - x - alpha));
    }
    res.final_defect = defect;

    // fitted decay exponent over consecutive pairs
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 1; i < res.trace.size(); ++i) {
        const double a = res.trace[i - 1].norm_v, b = res.trace[i].norm_v;
        if (!(a > 0.0 && b > 0.0)) continue;
        const double x = std::log(a), y = std::log(b);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    res.decay_pairs = m;
    if (m >= 2) {
        const double den = m * sxx - sx * sx;
        res.decay_exponent = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
    } else if (m == 1) {
        res.decay_exponent = sy / sx;
    }
    return res;
}

ThresholdScan kam_threshold_scan(const std::function<AnalyticCircleMap(double)>& make, const KamConfig& config,
                                 double lo, double hi, int iterations) {
    ThresholdScan s;
    s.eps_linearized = lo;
    s.eps_failed = hi;
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (s.eps_linearized + s.eps_failed);
        bool ok = false;
        try {
            ok = kam_iterate(make(mid), config).verdict == KamVerdict::linearized;
        } catch (const Error&) {
            ok = false;
        }
        ++s.runs;
        if (ok) s.eps_linearized = mid; else s.eps_failed = mid;
    }
    return s;
}

HermanResult herman_average(const AnalyticCircleMap& f, long long n, double rho, int grid, int degree) {
    if (n < 1) throw PreconditionViolation("herman_average needs n >= 1");
    if (grid < 1) throw PreconditionViolation("herman grid must be >= 1");
    HermanResult out;
    out.n = n;
    out.rho = rho;
    const double inv_n = 1.0 / static_cast<double>(n);

    // sum_{i<n} (F^i(y) - y) and F^n(y) - y, on the lift without large integers
    auto sums = [&](double y, double* dh) {
        const LiftPoint s = LiftPoint::from(y);
        LiftPoint p = s;
        double acc = 0.0, d = 1.0, dsum = 0.0;
        for (long long i = 0; i < n; ++i) {
            acc += static_cast<double>(p.turns - s.turns) + (p.frac - s.frac);
            dsum += d;
            d *= f.jet(p.frac).d[1];
            p = step(f, p);
        }
        if (dh) *dh = dsum * inv_n;
        return std::pair<double, double>(acc, static_cast<double>(p.turns - s.turns) + (p.frac - s.frac));
    };

    out.min_dh = std::numeric_limits<double>::infinity();
    for (int g = 0; g < grid; ++g) {
        const double x = static_cast<double>(g) / grid;
        double dh = 0.0;
        const auto [sx, fnx] = sums(x, &dh);
        const double fx = f(x);
        const auto [sfx, unused] = sums(fx, nullptr);
        (void)unused;
        // h_n(f x) - h_n(x) computed directly from the averages
        const double direct = (fx - x) + (sfx - sx) * inv_n;
        out.defect = std::max(out.defect, std::abs(direct - rho));
        out.identity_error = std::max(out.identity_error, std::abs(direct - fnx * inv_n));
        out.min_dh = std::min(out.min_dh, dh);
    }
    if (!(out.min_dh > 0.0)) throw NotMonotone(out.min_dh);
    const auto proj = project_lift([&](double x) { return x + sums(x, nullptr).first * inv_n; }, degree);
    out.h = proj.map;
    out.tail_energy = proj.tail_energy;
    return out;
}

}  // namespace circlelab
