#pragma once

// Grid kernels with a serial reference and an OpenMP version. Every result is
// written to its own index, so both paths agree bit for bit; reductions are
// done afterwards in index order.

#include "circlelab/circle_map.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace circlelab::kernels {

struct Exec {
    bool parallel = true;
    int workers = 0;  // 0: OpenMP default

    static Exec serial() { return Exec{false, 1}; }
};

/// out[i] = fn(i) for i in [0, n).
void for_each_index(long long n, const std::function<void(long long)>& fn, const Exec& exec);

/// Uniform grid x_i = i / grid.
inline double grid_point(long long i, long long grid) { return static_cast<double>(i) / static_cast<double>(grid); }

/// F^q(x_i) - x_i - p on the grid (signed beta_n when q = q_n, p = p_n).
std::vector<double> displacement_grid(const AnalyticCircleMap& f, long long q, long long p, int grid,
                                      const Exec& exec);

/// ln Df^q(x_i) on the grid.
std::vector<double> log_derivative_grid(const AnalyticCircleMap& f, long long q, int grid, const Exec& exec);

/// Deterministic per-index seed derived from a base seed.
std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t index);

struct TongueSpec {
    double a_min = 0.0, a_max = 1.0;
    int a_cells = 50;
    double b_min = 0.0, b_max = 0.95;
    int b_cells = 20;
    int depth = 12;
    long long n_max = 20000;
    long long birkhoff_n = 2000;
    std::uint64_t seed = 0;
};

struct TongueCell {
    int i = 0, j = 0;      // a index, b index
    double a = 0.0, b = 0.0;
    double x0 = 0.0;
    double rho = 0.0;      // in [0,1)
    double error_bound = 0.0;
    double birkhoff = 0.0;
    bool locked = false;   // periodic orbit found
    long long p = 0, q = 0;
    int depth = 0;
};

/// Rotation number of x + a + (b / 2 pi) sin(2 pi x) on an (a, b) grid; cell
/// (i, j) sits at index j * a_cells + i.
std::vector<TongueCell> tongue_scan(const TongueSpec& spec, const Exec& exec);

}  // namespace circlelab::kernels
