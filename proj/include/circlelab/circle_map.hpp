#pragma once

// Lifts of analytic circle diffeomorphisms f(x) = x + c + v(x), where v is a
// real trigonometric polynomial stored by its positive-frequency coefficients.

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace circlelab {

using Complex = std::complex<double>;
using LiftFn = std::function<double(double)>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// f, Df, D^2 f, D^3 f, D^4 f at one point.
struct Jet {
    double d[5] = {0, 0, 0, 0, 0};
};

class AnalyticCircleMap {
public:
    AnalyticCircleMap() = default;  // identity
    /// modes[k-1] holds v^(k) for k = 1..K; v^(-k) is its conjugate.
    AnalyticCircleMap(double mean_shift, std::vector<Complex> modes);

    static AnalyticCircleMap rotation(double alpha) { return AnalyticCircleMap(alpha, {}); }
    /// x + a + (b / 2 pi) sin(2 pi x)
    static AnalyticCircleMap arnold(double a, double b);

    double mean_shift() const { return c_; }
    int degree() const { return static_cast<int>(modes_.size()); }
    const std::vector<Complex>& modes() const { return modes_; }
    /// v^(k) for any integer k (zero outside 1 <= |k| <= K and at k = 0).
    Complex mode(int k) const;
    bool is_rotation() const;

    AnalyticCircleMap with_mean_shift(double c) const { return AnalyticCircleMap(c, modes_); }

    double operator()(double x) const { return x + displacement(x); }
    /// f(x) - x = c + v(x), a 1-periodic function.
    double displacement(double x) const;
    double derivative(double x, int order) const;
    Jet jet(double x) const;

    /// sum_k |v^(k)| (2 pi k)^r over both signs of k: a bound on sup |v^(r)|.
    double derivative_bound(int order) const;

private:
    double c_ = 0.0;
    std::vector<Complex> modes_;
};

struct DiffeoCertificate {
    double min_grid_df = 0.0;
    double margin = 0.0;  // half grid spacing times a bound on |D^2 f|
    bool certified = false;
};

inline constexpr int kDiffeoGrid = 2048;

/// Df > 0 on the whole circle: grid minimum minus a Lipschitz margin.
DiffeoCertificate certify_diffeomorphism(const AnalyticCircleMap& f, int grid = kDiffeoGrid);

/// Throws NotADiffeomorphism when the certificate fails.
void require_diffeomorphism(const AnalyticCircleMap& f);

/// One-parameter family f_a = base with mean shift a, for a in [lo, hi].
struct MapFamily {
    enum class Kind { arnold, affine_in_c };
    Kind kind = Kind::arnold;
    double b = 0.0;  // arnold only
    AnalyticCircleMap base;
    double lo = 0.0;
    double hi = 1.0;

    static MapFamily arnold(double b);
    static MapFamily affine_in_c(AnalyticCircleMap base);
    AnalyticCircleMap at(double a) const { return base.with_mean_shift(a); }
};

// -- iteration --------------------------------------------------------------

/// A lift point kept as integer part plus fraction so long orbits do not lose
/// precision to the growing integer part.
struct LiftPoint {
    long long turns = 0;
    double frac = 0.0;

    static LiftPoint from(double x);
    double value() const { return static_cast<double>(turns) + frac; }
};

LiftPoint step(const AnalyticCircleMap& f, LiftPoint p);

/// f^n(x) on the lift.
double iterate(const AnalyticCircleMap& f, double x, long long n);

/// Derivatives of f^n and of ln Df^n at x, accumulated along the orbit.
struct OrbitJet {
    LiftPoint end;         // f^n(x)
    double d[4] = {1, 0, 0, 0};      // D^r f^n for r = 0..3 (d[0] is Df^n)
    double log_d[4] = {0, 0, 0, 0};  // D^r ln Df^n for r = 0..3
};

inline constexpr double kDerivativeGuard = 1e150;

/// Step-by-step form of orbit_jet: after i calls to advance(), holds the data
/// of f^i at the starting point.
class JetAccumulator {
public:
    explicit JetAccumulator(double x) { jet_.end = LiftPoint::from(x); }
    void advance(const AnalyticCircleMap& f);
    const OrbitJet& state() const { return jet_; }
    long long count() const { return count_; }

private:
    OrbitJet jet_;
    long long count_ = 0;
};

/// Throws DerivativeBlowup if |Df^i| or its higher derivatives pass the guard.
OrbitJet orbit_jet(const AnalyticCircleMap& f, double x, long long n);

/// D^r ln Df^n(x), r in 0..3.
double orbit_log_derivative(const AnalyticCircleMap& f, double x, long long n, int order);

/// Solves f(x) = y by safeguarded Newton; throws NoConvergence.
double inverse(const AnalyticCircleMap& f, double y);

// -- spectral projection ----------------------------------------------------

struct Projection {
    AnalyticCircleMap map;
    double retained_energy = 0.0;  // sum over 0 < |k| <= K of |u^(k)|^2
    double tail_energy = 0.0;      // sampled energy not captured by the retained modes
    bool alias_warning = false;
    int samples = 0;
};

inline constexpr double kDefaultAliasFraction = 1e-20;

/// Samples lift(x) - x on max(4K, 32) * oversample / 4 points and keeps modes |k| <= K.
Projection project_lift(const LiftFn& lift, int degree, double alias_fraction = kDefaultAliasFraction,
                        int oversample = 4);

/// g o f projected to degree K.
Projection compose_project(const AnalyticCircleMap& g, const AnalyticCircleMap& f, int degree,
                           double alias_fraction = kDefaultAliasFraction);

// -- norms and variation ----------------------------------------------------

struct StripNorm {
    double upper = 0.0;                // sum |c^(k)| e^{2 pi |k| nu}
    std::optional<double> grid_lower;  // grid sup on the real circle, nu = 0 only
};

inline constexpr int kNormGrid = 4096;

/// Norm of constant + sum_{k>=1} 2 Re(modes[k-1] e^{2 pi i k z}) on |Im z| <= nu.
StripNorm strip_norm(double constant, std::span<const Complex> modes, double nu);
/// ||f - T_alpha||_nu.
StripNorm strip_norm(const AnalyticCircleMap& f, double alpha, double nu);

/// Total variation over one period of a smooth 1-periodic function, from the
/// roots of its derivative located on a grid and refined by bisection.
double total_variation(const LiftFn& phi, const LiftFn& dphi, int grid = kNormGrid);

/// Var(ln Df): oscillation of ln Df between the roots of D^2 f.
double log_derivative_variation(const AnalyticCircleMap& f);

}  // namespace circlelab
