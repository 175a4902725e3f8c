#pragma once

// Local linearization: the homological equation solved in Fourier space, the
// Newton conjugation step, the iterated scheme, and Herman's averaging.

#include "circlelab/arithmetic.hpp"
#include "circlelab/circle_map.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace circlelab {

struct HomologicalSolution {
    std::vector<Complex> w;    // w^(k), k = 1..N
    double min_divisor = 0.0;  // smallest |e^{2 pi i k alpha} - 1| over the solved modes
    int min_divisor_k = 0;
};

/// w^(k) = -v^(k) / (e^{2 pi i k alpha} - 1) for 0 < k <= N; v^(0) is ignored.
/// Throws Resonance when a divisor vanishes at working precision under a
/// nonzero mode, SmallDivisor when it falls below divisor_floor.
HomologicalSolution solve_homological(std::span<const Complex> v, double alpha, int N, double divisor_floor);

/// Fourier modes |k| <= N of w(x + alpha) - w(x) + v(x) - v^(0).
std::vector<Complex> homological_residual(std::span<const Complex> v, std::span<const Complex> w, double alpha,
                                          int N);

struct KamConfig {
    arith::ContinuedFraction alpha = arith::ContinuedFraction::golden_mean();
    double nu0 = 0.02;
    std::vector<int> truncation;  // N_n; empty means N_0 2^n capped at n_cap
    std::vector<double> strips;   // nu_n; empty means nu_0 (1/2 + 2^{-n-1})
    int max_steps = 10;
    int n_cap = 64;
    double divisor_floor = 1e-8;
    double threshold = 1e-10;
    double alias_fraction = 1e-20;

    int truncation_at(int n, int degree) const;
    double strip_at(int n) const;
};

/// Cross-field checks; one message per violated invariant.
std::vector<std::string> validate(const KamConfig& config);

struct KamStepRecord {
    int step = 0;
    int truncation = 0;
    double nu = 0.0;
    double norm_v = 0.0;      // ||f_n - T_alpha||_{nu_n}
    double norm_w = 0.0;      // ||w_n||_{nu_n}, 0 on the final row
    double mean_shift = 0.0;  // |v_n^(0)|
    double tail_energy = 0.0; // projection tail when f_n was formed
    double min_divisor = 0.0;
    double quad_constant = 0.0;  // ||v_n|| / ||v_{n-1}||^{1.5}, n >= 1
    double min_dh = 1.0;
};

enum class KamVerdict { linearized, diverged, resonance_stop };
std::string to_string(KamVerdict v);

struct KamResult {
    KamVerdict verdict = KamVerdict::diverged;
    std::string reason;
    std::vector<KamStepRecord> trace;
    int steps = 0;
    AnalyticCircleMap h_total;    // projected conjugacy, id + sum of corrections
    double h_tail_energy = 0.0;
    double final_defect = 0.0;    // grid sup |h(f(h^{-1} x)) - x - alpha|
    double decay_exponent = 0.0;  // least-squares slope of log||v_{n+1}|| against log||v_n||
    int decay_pairs = 0;
    double max_quad_constant = 0.0;
    double max_mean_shift_constant = 0.0;  // |v_n^(0)| / ||v_{n-1}||^2
    double strip_final = 0.0;
    double brjuno_strip = 0.0;  // B(alpha) / (2 pi), reported next to strip_final
};

/// One Newton step for f = T_alpha + v: h = id + w, f_next = h o f o h^{-1}
/// projected to degree N_out.
struct KamStepResult {
    AnalyticCircleMap h;
    AnalyticCircleMap f_next;
    KamStepRecord record;
};
KamStepResult kam_step(const AnalyticCircleMap& f, double alpha, int N, int N_out, double nu, double divisor_floor,
                       double alias_fraction = 1e-20);

KamResult kam_iterate(const AnalyticCircleMap& f, const KamConfig& config);

/// Largest eps in [lo, hi] whose map make(eps) still linearizes, by bisection.
struct ThresholdScan {
    double eps_linearized = 0.0;
    double eps_failed = 0.0;
    int runs = 0;
};
ThresholdScan kam_threshold_scan(const std::function<AnalyticCircleMap(double)>& make, const KamConfig& config,
                                 double lo, double hi, int iterations);

struct HermanResult {
    int n = 0;
    double rho = 0.0;
    double defect = 0.0;            // grid sup |h_n(f(x)) - h_n(x) - rho|
    double identity_error = 0.0;    // sup |h_n(f(x)) - h_n(x) - (F^n(x) - x)/n|
    double min_dh = 0.0;
    AnalyticCircleMap h;            // h_n projected
    double tail_energy = 0.0;
};

/// h_n = (id + F + ... + F^{n-1}) / n on a grid; rho is the reference rotation number.
HermanResult herman_average(const AnalyticCircleMap& f, long long n, double rho, int grid = 1024, int degree = 64);

}  // namespace circlelab
