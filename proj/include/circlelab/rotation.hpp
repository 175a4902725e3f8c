#pragma once

// Rotation numbers: Birkhoff averages, closest-return extraction of the
// continued fraction, and tuning a family parameter onto a target number.

#include "circlelab/arithmetic.hpp"
#include "circlelab/circle_map.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace circlelab {

inline constexpr double kPeriodicTolerance = 1e-12;
inline constexpr long long kDefaultNmax = 4'000'000;

struct RotationEstimate {
    enum class Method { birkhoff, closest_return };
    Method method = Method::birkhoff;
    double value = 0.0;        // in [0, 1)
    double lift_value = 0.0;   // rotation number of the lift itself
    double error_bound = 0.0;
    double lo = 0.0;           // lift-level enclosure [lo, hi]
    double hi = 0.0;
    long long n = 0;           // birkhoff: orbit length; closest_return: last return time used
    int depth = 0;             // closest_return: number of extracted quotients
    std::vector<std::uint64_t> quotients;  // a_1..a_depth of value
    std::vector<long long> return_times;   // q_1, q_2, ... as extracted
    std::vector<long long> numerators;     // matching lift numerators p_n
    bool downgraded = false;   // closest-return validation failed, Birkhoff used instead
    std::string note;
};

std::string to_string(RotationEstimate::Method m);

/// ((F^n(x0) - x0) / n) mod 1 with error bound 1/n.
RotationEstimate rotation_number_birkhoff(const AnalyticCircleMap& f, double x0, long long n);

/// Reads q_1 < q_2 < ... off the first entries of the orbit of x0 into
/// J_n = (f^{-q_n} x0, f^{q_n} x0). Needs depth + 1 levels.
/// Throws PeriodicOrbitDetected when the orbit locks onto a p/q cycle.
RotationEstimate rotation_number_closest_return(const AnalyticCircleMap& f, double x0, int depth,
                                                long long n_max = kDefaultNmax);

/// Same extraction, stopping as soon as stop(lo, hi) accepts the current
/// lift-level enclosure. Used by tuning.
RotationEstimate rotation_enclosure(const AnalyticCircleMap& f, double x0, long long n_max,
                                    const std::function<bool(double, double)>& stop);

struct TuneResult {
    double a = 0.0;
    RotationEstimate achieved;
    int bisection_steps = 0;
    double target = 0.0;
};

/// Bisection on the family parameter until the closest-return enclosure of
/// rho(f_a) sits inside [alpha - tol, alpha + tol].
TuneResult tune_parameter(const MapFamily& family, const arith::ContinuedFraction& target, double tol,
                          long long n_max = kDefaultNmax);

/// |(Birkhoff average of f(x) - x over n steps) - rho|, rho from closest returns.
double eq_rot_check(const AnalyticCircleMap& f, long long n, double x0 = 0.0, int depth = 20);

}  // namespace circlelab
