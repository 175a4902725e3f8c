#include "circlelab/rotation.hpp"

#include "circlelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace circlelab {

std::string to_string(RotationEstimate::Method m) {
    return m == RotationEstimate::Method::birkhoff ? "birkhoff" : "closest_return";
}

namespace {

double mod1(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;
    return r;
}

// Lazily extended forward orbit of x0, stored as lift points.
class Orbit {
public:
    Orbit(const AnalyticCircleMap& f, double x0) : f_(f), start_(LiftPoint::from(x0)) { pts_.push_back(start_); }

    const LiftPoint& at(long long i) {
        while (static_cast<long long>(pts_.size()) <= i) pts_.push_back(step(f_, pts_.back()));
        return pts_[static_cast<std::size_t>(i)];
    }
    // F^i(x0) - x0, computed without forming the large lift value
    double disp(long long i) {
        const LiftPoint& p = at(i);
        return static_cast<double>(p.turns - start_.turns) + (p.frac - start_.frac);
    }
    long long size() const { return static_cast<long long>(pts_.size()); }

private:
    const AnalyticCircleMap& f_;
    LiftPoint start_;
    std::vector<LiftPoint> pts_;
};

// F^q(x0) - x0 - p lies strictly between 0 and e (e of either sign) for some integer p.
bool inside_side(double disp, double e) {
    if (e > 0.0) {
        const double t = disp - std::floor(disp);
        return t > 0.0 && t < e;
    }
    const double t = std::ceil(disp) - disp;
    return t > 0.0 && t < -e;
}

struct Level {
    long long q;
    long long p;  // lift numerator, integer part of rho included
    double e;     // F^q(x0) - x0 - p
};

struct Extraction {
    std::vector<Level> levels;  // levels[i] holds q_{i-1}: q_{-1} = 0, q_0 = 1, q_1, ...
    long long k = 0;            // floor of the lift rotation number
    bool exhausted = false;     // no entry found before n_max
    long long tried_j = 0;      // candidates tried at the exhausted level
    bool valid = true;
    std::string note;

    int extracted() const { return static_cast<int>(levels.size()) - 2; }  // q_1..q_extracted
};

// Lift-level enclosure of rho from the last two levels.
std::pair<double, double> enclosure(const Extraction& ex) {
    const auto& L = ex.levels;
    const Level& last = L.back();
    const Level& prev = L[L.size() - 2];
    const double r1 = static_cast<double>(last.p) / static_cast<double>(last.q);
    double r0;
    if (ex.exhausted) {
        // no entry for j <= tried_j: a_{n+1} > tried_j, so rho lies between
        // p_n/q_n and the mediant with j = tried_j
        const long long j = std::max<long long>(ex.tried_j, 1);
        r0 = static_cast<double>(prev.p + j * last.p) / static_cast<double>(prev.q + j * last.q);
    } else if (prev.q == 0) {
        r0 = static_cast<double>(ex.k + 1);
    } else {
        r0 = static_cast<double>(prev.p) / static_cast<double>(prev.q);
    }
    return {std::min(r0, r1), std::max(r0, r1)};
}

Extraction extract(Orbit& orbit, const AnalyticCircleMap& f, long long n_max, int max_levels,
                   const std::function<bool(double, double)>& stop) {
    Extraction ex;
    const double d1 = orbit.disp(1);
    ex.k = static_cast<long long>(std::floor(d1));
    if (std::abs(d1 - std::round(d1)) < kPeriodicTolerance)
        throw PeriodicOrbitDetected(static_cast<long long>(std::round(d1)), 1);

    ex.levels.push_back(Level{0, 1, 0.0});
    ex.levels.push_back(Level{1, ex.k, d1 - static_cast<double>(ex.k)});
    // F^2(x) - x - 2k - 1 keeps one sign for irrational rho; positive means
    // rho - k > 1/2, i.e. a_1 = 1 and q_1 = q_0 = 1
    const double s2 = orbit.disp(2) - static_cast<double>(2 * ex.k + 1);
    if (std::abs(s2) < kPeriodicTolerance) throw PeriodicOrbitDetected(2 * ex.k + 1, 2);
    if (s2 > 0.0) ex.levels.push_back(Level{1, ex.k + 1, d1 - static_cast<double>(ex.k + 1)});

    while (ex.extracted() < max_levels) {
        if (stop && ex.extracted() >= 1) {
            const auto [lo, hi] = enclosure(ex);
            if (stop(lo, hi)) return ex;
        }
        const Level p0 = ex.levels[ex.levels.size() - 2];
        const Level p1 = ex.levels.back();
        long long found = -1;
        long long j = 1;
        for (;; ++j) {
            const long long q = p0.q + j * p1.q;
            if (q > n_max) break;
            const double dq = orbit.disp(q);
            if (std::abs(dq - static_cast<double>(p0.p + j * p1.p)) < kPeriodicTolerance)
                throw PeriodicOrbitDetected(p0.p + j * p1.p, q);
            const bool same = inside_side(dq, p1.e);
            const bool other = !same && inside_side(orbit.disp(q + p1.q), p1.e);
            if (same || other) {
                found = j;
                break;
            }
        }
        if (found < 0) {
            ex.exhausted = true;
            ex.tried_j = j - 1;
            // locked onto a cycle? test a late orbit point for p_n/q_n periodicity
            const LiftPoint y = orbit.at(orbit.size() - 1);
            LiftPoint z = y;
            for (long long i = 0; i < p1.q; ++i) z = step(f, z);
            const double res = static_cast<double>(z.turns - y.turns - p1.p) + (z.frac - y.frac);
            if (std::abs(res) < kPeriodicTolerance) throw PeriodicOrbitDetected(p1.p, p1.q);
            ex.note = "no closest return before n_max";
            return ex;
        }
        Level next;
        next.q = p0.q + found * p1.q;
        next.p = p0.p + found * p1.p;
        next.e = orbit.disp(next.q) - static_cast<double>(next.p);
        if (std::abs(next.e) < kPeriodicTolerance) throw PeriodicOrbitDetected(next.p, next.q);
        // first entries alternate sides; the distances need not shrink for a
        // nonlinear map since the two halves of J_n differ in length
        if ((next.e > 0.0) == (p1.e > 0.0)) {
            ex.valid = false;
            ex.note = "closest-return sign alternation violated at q = " + std::to_string(next.q);
            return ex;
        }
        ex.levels.push_back(next);
    }
    return ex;
}

RotationEstimate from_extraction(const Extraction& ex, Orbit& orbit) {
    RotationEstimate est;
    est.method = RotationEstimate::Method::closest_return;
    est.note = ex.note;
    const auto& L = ex.levels;
    for (std::size_t i = 2; i < L.size(); ++i) {
        est.return_times.push_back(L[i].q);
        est.numerators.push_back(L[i].p);
        // a_n = (q_n - q_{n-2}) / q_{n-1}
        est.quotients.push_back(static_cast<std::uint64_t>((L[i].q - L[i - 2].q) / L[i - 1].q));
    }
    const auto [lo, hi] = enclosure(ex);
    est.lo = lo;
    est.hi = hi;
    // displacement average at the deepest return, kept inside the enclosure
    const Level& last = L.back();
    const double avg = last.q > 0 ? (static_cast<double>(last.p) + last.e) / static_cast<double>(last.q)
                                  : 0.5 * (lo + hi);
    est.lift_value = std::clamp(avg, lo, hi);
    est.value = mod1(est.lift_value);
    est.error_bound = hi - lo;
    // the last extracted level only bounds the convergent before it, unless
    // the search ran dry and the mediant bound was used instead
    if (!ex.exhausted && !est.quotients.empty()) est.quotients.pop_back();
    est.depth = static_cast<int>(est.quotients.size());
    est.n = orbit.size() - 1;
    return est;
}

}  // namespace

RotationEstimate rotation_number_birkhoff(const AnalyticCircleMap& f, double x0, long long n) {
    if (n < 1) throw PreconditionViolation("birkhoff needs n >= 1");
    const LiftPoint s = LiftPoint::from(x0);
    LiftPoint p = s;
    for (long long i = 0; i < n; ++i) p = step(f, p);
    const double disp = static_cast<double>(p.turns - s.turns) + (p.frac - s.frac);
    RotationEstimate est;
    est.method = RotationEstimate::Method::birkhoff;
    est.n = n;
    est.lift_value = disp / static_cast<double>(n);
    est.value = mod1(est.lift_value);
    est.error_bound = 1.0 / static_cast<double>(n);
    est.lo = est.lift_value - est.error_bound;
    est.hi = est.lift_value + est.error_bound;
    return est;
}

RotationEstimate rotation_number_closest_return(const AnalyticCircleMap& f, double x0, int depth, long long n_max) {
    if (depth < 1) throw PreconditionViolation("closest-return depth must be >= 1");
    if (n_max < 2) throw PreconditionViolation("n_max must be >= 2");
    Orbit orbit(f, x0);
    const Extraction ex = extract(orbit, f, n_max, depth + 1, {});
    if (!ex.valid) {
        RotationEstimate est = rotation_number_birkhoff(f, x0, n_max);
        est.downgraded = true;
        est.note = ex.note;
        return est;
    }
    return from_extraction(ex, orbit);
}

RotationEstimate rotation_enclosure(const AnalyticCircleMap& f, double x0, long long n_max,
                                    const std::function<bool(double, double)>& stop) {
    Orbit orbit(f, x0);
    const Extraction ex = extract(orbit, f, n_max, std::numeric_limits<int>::max(), stop);
    if (!ex.valid) {
        RotationEstimate est = rotation_number_birkhoff(f, x0, n_max);
        est.downgraded = true;
        est.note = ex.note;
        return est;
    }
    return from_extraction(ex, orbit);
}

TuneResult tune_parameter(const MapFamily& family, const arith::ContinuedFraction& target, double tol,
                          long long n_max) {
    if (!(tol > 0.0)) throw PreconditionViolation("tune tolerance must be > 0");
    if (target.tail().kind == arith::TailKind::finite) {
        const int d = target.available_depth();
        const auto conv = arith::convergents(target, d);
        const double q = conv.back().q ? static_cast<double>(*conv.back().q) : std::exp(conv.back().log_q);
        if (1.0 / (q * q) > tol)
            throw PreconditionViolation("target must be irrational: a finite prefix of " + std::to_string(d) +
                                        " quotients pins the value only to 1/q^2 = " + std::to_string(1.0 / (q * q)));
    }
    const double alpha = target.value();
    if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionViolation("target must lie in (0,1)");

    TuneResult out;
    out.target = alpha;
    if (family.base.is_rotation()) {
        out.a = alpha;
        out.achieved = rotation_number_birkhoff(family.at(alpha), 0.0, 1);
        return out;
    }

    // -1: rho below the target window, +1: above, 0: certified inside
    auto classify_at = [&](double a, RotationEstimate* keep) -> int {
        const AnalyticCircleMap f = family.at(a);
        try {
            RotationEstimate est = rotation_enclosure(f, 0.0, n_max, [&](double lo, double hi) {
                return hi < alpha || lo > alpha || (lo >= alpha - tol && hi <= alpha + tol);
            });
            if (keep) *keep = est;
            if (est.hi < alpha) return -1;
            if (est.lo > alpha) return 1;
            if (est.lo >= alpha - tol && est.hi <= alpha + tol) return 0;
            return 2;  // undecided within n_max
        } catch (const PeriodicOrbitDetected& e) {
            const double r = static_cast<double>(e.p) / static_cast<double>(e.q);
            return r < alpha ? -1 : 1;
        }
    };

    double lo = family.lo, hi = family.hi;
    if (classify_at(lo, nullptr) != -1 || classify_at(hi, nullptr) != 1)
        throw TargetUnreachable("rotation number does not bracket the target over [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        RotationEstimate est;
        const int c = classify_at(mid, &est);
        out.bisection_steps = it + 1;
        if (c == 0) {
            out.a = mid;
            out.achieved = est;
            return out;
        }
        if (c == 2)
            throw TargetUnreachable("enclosure at a = " + std::to_string(mid) + " still wider than tol after n_max = " +
                                    std::to_string(n_max) + " iterates");
        if (c < 0) lo = mid; else hi = mid;
    }
    throw TargetUnreachable("parameter bracket collapsed before the enclosure reached tol");
}

double eq_rot_check(const AnalyticCircleMap& f, long long n, double x0, int depth) {
    const RotationEstimate cr = rotation_number_closest_return(f, x0, depth);
    // the Birkhoff average of the displacement f(x) - x is the lift average
    const RotationEstimate bk = rotation_number_birkhoff(f, x0, n);
    return std::abs(bk.lift_value - cr.lift_value);
}

}  // namespace circlelab
