#pragma once

// Dynamical partitions at closest-return times and the inequalities of the
// global theory, each measured on a grid and reported as the smallest
// constant that makes it hold, together with a witness point.

#include "circlelab/arithmetic.hpp"
#include "circlelab/circle_map.hpp"
#include "circlelab/kernels.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace circlelab::geometry {

inline constexpr int kGeometryGrid = 4096;
inline constexpr double kTilingTolerance = 1e-9;

/// Closest-return data of f read once and shared by every level.
struct Returns {
    double rho = 0.0;                // lift rotation number
    std::vector<long long> q;        // q[n] for n = 0, 1, ...
    std::vector<long long> p;        // lift numerators
};
Returns closest_returns(const AnalyticCircleMap& f, int levels, double x0 = 0.0);

struct PartitionLevel {
    int n = 0;
    long long q_n = 0, q_next = 0;
    long long p_n = 0, p_next = 0;
    double qn_distance = 0.0;   // alpha_n = |q_n rho - p_n|
    double M = 0.0, m = 0.0;    // refined max / min of beta_n
    double M_upper = 0.0;       // Lipschitz-certified bounds
    double m_lower = 0.0;
    double argmax = 0.0, argmin = 0.0;
    double tiling_total = 0.0;
    double tiling_overlap = 0.0;
    int intervals = 0;
    std::vector<double> beta;   // beta_n on the grid
};

struct PartitionOptions {
    int grid = kGeometryGrid;
    double x0 = 0.0;
    kernels::Exec exec;
};

/// Throws TilingFailure when the q_{n+1} + q_n intervals do not tile the circle.
PartitionLevel build_partition(const AnalyticCircleMap& f, const Returns& r, int n, const PartitionOptions& opt = {});
PartitionLevel build_partition(const AnalyticCircleMap& f, int n, const PartitionOptions& opt = {});

enum class Trend { bounded_trend, growing_trend, inconclusive };
std::string to_string(Trend t);

struct C1Result {
    std::vector<int> levels;
    std::vector<double> ratios;  // M_n / m_n
    Trend trend = Trend::inconclusive;
};
Trend classify_trend(const std::vector<double>& ratios);
C1Result c1_criterion(const AnalyticCircleMap& f, int n_max, int n_min = 1, const PartitionOptions& opt = {});

struct DenjoyResult {
    double max_log_df = 0.0;     // max_x |ln Df^{q_n}(x)|
    double witness = 0.0;
    double variation = 0.0;      // Var(ln Df)
    double classical_residual = 0.0;  // max_log_df - variation
    double improved_C = 0.0;     // max_log_df / M_n^{1/2}
};
DenjoyResult denjoy_checks(const AnalyticCircleMap& f, const PartitionLevel& level, const PartitionOptions& opt = {});

struct GrowthResult {
    int r = 1;
    double C = 0.0;              // max |D^r ln Df^j(x)| / (M_n^{1/2} / beta_n(x))^r
    double witness_x = 0.0;
    long long witness_j = 0;
    double lemma_C1 = 0.0;       // sum_{i<q_{n+1}} Df^i(x) * beta_n(x)
    double lemma_C2 = 0.0;       // sum_{i<q_{n+1}} (Df^i(x))^2 * beta_n(x)^2 / M_n
};
/// j_samples empty means every j in [1, q_{n+1}].
GrowthResult derivative_growth_check(const AnalyticCircleMap& f, const PartitionLevel& level, int r,
                                     std::vector<long long> j_samples = {}, const PartitionOptions& opt = {});

struct BetaRecursionResult {
    double C = 0.0;
    double witness = 0.0;
    int k = 3;
    double M_bound = 0.0;   // implied upper bound for M_{n+1}
    double m_bound = 0.0;   // implied lower bound for m_{n+1}
    bool M_respected = false;
    bool m_respected = false;
    bool vacuous = false;   // C M_n^{1/2} >= 1, the upper bound carries no information
};
BetaRecursionResult beta_recursion_check(const PartitionLevel& level, const PartitionLevel& next, int k = 3);

/// max over random pairs of |S(x) - S(y)| - Var(phi), S the Birkhoff sum of
/// phi along q_n steps of the rotation by alpha.
struct KoksmaResult {
    double max_violation = 0.0;
    double max_difference = 0.0;
    long long q_n = 0;
    int pairs = 0;
};
KoksmaResult koksma_check(const LiftFn& phi, double variation, const arith::ContinuedFraction& alpha, int n,
                          int pairs, std::uint64_t seed);

/// gamma_{k+1} = (gamma_k + g(gamma_k)) / 2 with g(t) = ((r-2-s) + t (1+s)) / (2+s).
std::vector<double> bootstrap_schedule(double r, double sigma, double gamma0, int steps);

struct LevelRow {
    PartitionLevel level;  // beta grid dropped
    double ratio = 0.0;
    DenjoyResult denjoy;
    GrowthResult growth_r1;
    std::optional<BetaRecursionResult> recursion;  // needs level n + 1
};

struct GeometryReport {
    std::vector<LevelRow> rows;
    Trend trend = Trend::inconclusive;
    double variation = 0.0;
    double rho = 0.0;
    bool denjoy_ok = true;  // every classical residual <= 1e-8
};

struct GeometryConfig {
    int n_min = 1;
    int n_max = 8;
    int k_smoothness = 3;
    PartitionOptions partition;
};
GeometryReport geometry_report(const AnalyticCircleMap& f, const GeometryConfig& config);

}  // namespace circlelab::geometry
