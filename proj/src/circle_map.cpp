#include "circlelab/circle_map.hpp"

#include "circlelab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace circlelab {

AnalyticCircleMap::AnalyticCircleMap(double mean_shift, std::vector<Complex> modes)
    : c_(mean_shift), modes_(std::move(modes)) {
    while (!modes_.empty() && modes_.back() == Complex{}) modes_.pop_back();
}

AnalyticCircleMap AnalyticCircleMap::arnold(double a, double b) {
    if (b == 0.0) return rotation(a);
    // (b / 2 pi) sin(2 pi x) = 2 Re( -i b / (4 pi) e^{2 pi i x} )
    return AnalyticCircleMap(a, {Complex(0.0, -b / (2.0 * kTwoPi))});
}

Complex AnalyticCircleMap::mode(int k) const {
    if (k == 0 || std::abs(k) > degree()) return {};
    const Complex m = modes_[static_cast<std::size_t>(std::abs(k) - 1)];
    return k > 0 ? m : std::conj(m);
}

bool AnalyticCircleMap::is_rotation() const { return modes_.empty(); }

double AnalyticCircleMap::displacement(double x) const {
    if (modes_.empty()) return c_;
    const Complex z = std::polar(1.0, kTwoPi * x);
    Complex zk = z;
    Complex acc{};
    for (const Complex& m : modes_) {
        acc += m * zk;
        zk *= z;
    }
    return c_ + 2.0 * acc.real();
}

Jet AnalyticCircleMap::jet(double x) const {
    Jet j;
    j.d[0] = x + c_;
    j.d[1] = 1.0;
    if (modes_.empty()) return j;
    const Complex z = std::polar(1.0, kTwoPi * x);
    Complex zk = z;
    Complex acc[5];
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        const Complex w(0.0, kTwoPi * static_cast<double>(i + 1));  // 2 pi i k
        Complex term = modes_[i] * zk;
        for (int r = 0; r < 5; ++r) {
            acc[r] += term;
            term *= w;
        }
        zk *= z;
    }
    for (int r = 0; r < 5; ++r) j.d[r] += 2.0 * acc[r].real();
    return j;
}

double AnalyticCircleMap::derivative(double x, int order) const {
    if (order < 0 || order > 4) throw PreconditionViolation("derivative order must be in 0..4");
    return jet(x).d[order];
}

double AnalyticCircleMap::derivative_bound(int order) const {
    double s = 0.0;
    for (std::size_t i = 0; i < modes_.size(); ++i)
        s += 2.0 * std::abs(modes_[i]) * std::pow(kTwoPi * static_cast<double>(i + 1), order);
    return s;
}

DiffeoCertificate certify_diffeomorphism(const AnalyticCircleMap& f, int grid) {
    DiffeoCertificate cert;
    cert.min_grid_df = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
        const double x = static_cast<double>(i) / grid;
        cert.min_grid_df = std::min(cert.min_grid_df, f.jet(x).d[1]);
    }
    cert.margin = 0.5 / grid * f.derivative_bound(2);
    cert.certified = cert.min_grid_df - cert.margin > 0.0;
    return cert;
}

void require_diffeomorphism(const AnalyticCircleMap& f) {
    const auto cert = certify_diffeomorphism(f);
    if (!cert.certified)
        throw NotADiffeomorphism("min Df on grid " + std::to_string(cert.min_grid_df) +
                                 " does not exceed margin " + std::to_string(cert.margin));
}

MapFamily MapFamily::arnold(double b) {
    if (!(std::abs(b) < 1.0)) throw NotADiffeomorphism("arnold family needs |b| < 1");
    MapFamily fam;
    fam.kind = Kind::arnold;
    fam.b = b;
    fam.base = AnalyticCircleMap::arnold(0.0, b);
    return fam;
}

MapFamily MapFamily::affine_in_c(AnalyticCircleMap base) {
    MapFamily fam;
    fam.kind = Kind::affine_in_c;
    fam.base = std::move(base);
    return fam;
}

LiftPoint LiftPoint::from(double x) {
    const double fl = std::floor(x);
    return LiftPoint{static_cast<long long>(fl), x - fl};
}

LiftPoint step(const AnalyticCircleMap& f, LiftPoint p) {
    const double y = f(p.frac);
    const double fl = std::floor(y);
    p.turns += static_cast<long long>(fl);
    p.frac = y - fl;
    return p;
}

double iterate(const AnalyticCircleMap& f, double x, long long n) {
    if (n < 0) throw PreconditionViolation("iterate needs n >= 0");
    LiftPoint p = LiftPoint::from(x);
    for (long long i = 0; i < n; ++i) p = step(f, p);
    return p.value();
}

void JetAccumulator::advance(const AnalyticCircleMap& f) {
    const Jet j = f.jet(jet_.end.frac);
    const double f1 = j.d[1], f2 = j.d[2], f3 = j.d[3], f4 = j.d[4];
    // derivatives of ln Df at the current point
    const double p1 = f2 / f1;
    const double p2 = f3 / f1 - p1 * p1;
    const double p3 = f4 / f1 - 3.0 * f2 * f3 / (f1 * f1) + 2.0 * p1 * p1 * p1;
    double& g1 = jet_.d[0];
    double& g2 = jet_.d[1];
    double& g3 = jet_.d[2];
    jet_.log_d[0] += std::log(f1);
    jet_.log_d[1] += p1 * g1;
    jet_.log_d[2] += p2 * g1 * g1 + p1 * g2;
    jet_.log_d[3] += p3 * g1 * g1 * g1 + 3.0 * p2 * g1 * g2 + p1 * g3;
    const double n1 = f1 * g1;
    const double n2 = f2 * g1 * g1 + f1 * g2;
    const double n3 = f3 * g1 * g1 * g1 + 3.0 * f2 * g1 * g2 + f1 * g3;
    g1 = n1;
    g2 = n2;
    g3 = n3;
    ++count_;
    if (!(std::abs(g1) < kDerivativeGuard && std::abs(g2) < kDerivativeGuard && std::abs(g3) < kDerivativeGuard &&
          g1 > 1.0 / kDerivativeGuard))
        throw DerivativeBlowup(static_cast<int>(count_));
    jet_.end = step(f, jet_.end);
}

OrbitJet orbit_jet(const AnalyticCircleMap& f, double x, long long n) {
    if (n < 0) throw PreconditionViolation("orbit_jet needs n >= 0");
    JetAccumulator acc(x);
    for (long long i = 0; i < n; ++i) acc.advance(f);
    return acc.state();
}

double orbit_log_derivative(const AnalyticCircleMap& f, double x, long long n, int order) {
    if (order < 0 || order > 3) throw PreconditionViolation("orbit_log_derivative order must be in 0..3");
    return orbit_jet(f, x, n).log_d[order];
}

double inverse(const AnalyticCircleMap& f, double y) {
    const double fl = std::floor(y);
    const double target = y - fl;
    const double spread = f.derivative_bound(0);
    double lo = target - f.mean_shift() - spread - 1e-12;
    double hi = target - f.mean_shift() + spread + 1e-12;
    double x = target - f.mean_shift();
    for (int it = 0; it < 200; ++it) {
        const Jet j = f.jet(x);
        const double r = j.d[0] - target;
        if (r == 0.0) return x + fl;
        if (r > 0.0) hi = std::min(hi, x); else lo = std::max(lo, x);
        double next = x - r / j.d[1];
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon())
            return next + fl;
        x = next;
    }
    throw NoConvergence("inverse did not converge for y = " + std::to_string(y));
}

Projection project_lift(const LiftFn& lift, int degree, double alias_fraction, int oversample) {
    if (degree < 0) throw PreconditionViolation("projection degree must be >= 0");
    const int m = std::max(degree * oversample, 32);
    std::vector<double> u(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double x = static_cast<double>(j) / m;
        u[static_cast<std::size_t>(j)] = lift(x) - x;
    }
    std::vector<Complex> twiddle(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) twiddle[static_cast<std::size_t>(j)] = std::polar(1.0, -kTwoPi * j / m);

    double mean = 0.0, power = 0.0;
    for (double s : u) {
        mean += s;
        power += s * s;
    }
    mean /= m;
    power /= m;

    std::vector<Complex> modes(static_cast<std::size_t>(degree));
    double retained = 0.0;
    for (int k = 1; k <= degree; ++k) {
        Complex acc{};
        for (int j = 0; j < m; ++j) {
            const auto idx = static_cast<std::size_t>((static_cast<long long>(j) * k) % m);
            acc += u[static_cast<std::size_t>(j)] * twiddle[idx];
        }
        acc /= static_cast<double>(m);
        modes[static_cast<std::size_t>(k - 1)] = acc;
        retained += 2.0 * std::norm(acc);
    }
    Projection out;
    out.samples = m;
    out.retained_energy = retained;
    out.tail_energy = std::max(0.0, power - mean * mean - retained);
    out.alias_warning = out.tail_energy > alias_fraction * std::max(retained, 1e-300);
    out.map = AnalyticCircleMap(mean, std::move(modes));
    return out;
}

Projection compose_project(const AnalyticCircleMap& g, const AnalyticCircleMap& f, int degree,
                           double alias_fraction) {
    if (degree < std::max(g.degree(), f.degree()))
        throw PreconditionViolation("compose_project needs K_out >= max degree");
    return project_lift([&](double x) { return g(f(x)); }, degree, alias_fraction);
}

StripNorm strip_norm(double constant, std::span<const Complex> modes, double nu) {
    if (nu < 0.0) throw PreconditionViolation("strip width must be >= 0");
    StripNorm out;
    out.upper = std::abs(constant);
    for (std::size_t i = 0; i < modes.size(); ++i)
        out.upper += 2.0 * std::abs(modes[i]) * std::exp(kTwoPi * static_cast<double>(i + 1) * nu);
    if (nu == 0.0) {
        const AnalyticCircleMap g(constant, std::vector<Complex>(modes.begin(), modes.end()));
        double sup = 0.0;
        for (int i = 0; i < kNormGrid; ++i)
            sup = std::max(sup, std::abs(g.displacement(static_cast<double>(i) / kNormGrid)));
        out.grid_lower = sup;
    }
    return out;
}

StripNorm strip_norm(const AnalyticCircleMap& f, double alpha, double nu) {
    return strip_norm(f.mean_shift() - alpha, f.modes(), nu);
}

double total_variation(const LiftFn& phi, const LiftFn& dphi, int grid) {
    std::vector<double> crit;
    double prev = dphi(0.0);
    for (int i = 1; i <= grid; ++i) {
        const double x = static_cast<double>(i) / grid;
        const double cur = dphi(x);
        const double x0 = static_cast<double>(i - 1) / grid;
        if (prev == 0.0) {
            crit.push_back(x0);
        } else if ((prev < 0.0) != (cur < 0.0) && cur != 0.0) {
            double a = x0, b = x, fa = prev;
            for (int it = 0; it < 80 && b - a > 1e-16; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = dphi(mid);
                if ((fm < 0.0) == (fa < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            crit.push_back(0.5 * (a + b));
        }
        prev = cur;
    }
    if (crit.size() < 2) return 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < crit.size(); ++i) {
        const double a = crit[i];
        const double b = i + 1 < crit.size() ? crit[i + 1] : crit[0] + 1.0;
        var += std::abs(phi(b) - phi(a));
    }
    return var;
}

double log_derivative_variation(const AnalyticCircleMap& f) {
    if (f.is_rotation()) return 0.0;
    const int grid = std::max(kNormGrid, 64 * f.degree());
    return total_variation([&](double x) { return std::log(f.jet(x).d[1]); },
                           [&](double x) { return f.jet(x).d[2]; }, grid);
}

}  // namespace circlelab
