#include "circlelab/kernels.hpp"

#include "circlelab/errors.hpp"
#include "circlelab/rotation.hpp"

#include <cmath>
#include <exception>
#include <random>

#include <omp.h>

namespace circlelab::kernels {

void for_each_index(long long n, const std::function<void(long long)>& fn, const Exec& exec) {
    if (!exec.parallel) {
        for (long long i = 0; i < n; ++i) fn(i);
        return;
    }
    const int threads = exec.workers > 0 ? exec.workers : omp_get_max_threads();
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (long long i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
#pragma omp critical(circlelab_kernel_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

std::vector<double> displacement_grid(const AnalyticCircleMap& f, long long q, long long p, int grid,
                                      const Exec& exec) {
    std::vector<double> out(static_cast<std::size_t>(grid));
    for_each_index(
        grid,
        [&](long long i) {
            const double x = grid_point(i, grid);
            LiftPoint pt = LiftPoint::from(x);
            const long long t0 = pt.turns;
            for (long long s = 0; s < q; ++s) pt = step(f, pt);
            out[static_cast<std::size_t>(i)] = static_cast<double>(pt.turns - t0 - p) + (pt.frac - x);
        },
        exec);
    return out;
}

std::vector<double> log_derivative_grid(const AnalyticCircleMap& f, long long q, int grid, const Exec& exec) {
    std::vector<double> out(static_cast<std::size_t>(grid));
    for_each_index(
        grid,
        [&](long long i) {
            const double x = grid_point(i, grid);
            LiftPoint pt = LiftPoint::from(x);
            double acc = 0.0;
            for (long long s = 0; s < q; ++s) {
                acc += std::log(f.jet(pt.frac).d[1]);
                pt = step(f, pt);
            }
            out[static_cast<std::size_t>(i)] = acc;
        },
        exec);
    return out;
}

std::uint64_t cell_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 on the combined state
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<TongueCell> tongue_scan(const TongueSpec& spec, const Exec& exec) {
    if (spec.a_cells < 1 || spec.b_cells < 1) throw PreconditionViolation("tongue grid needs at least one cell per axis");
    if (!(std::abs(spec.b_min) < 1.0 && std::abs(spec.b_max) < 1.0))
        throw NotADiffeomorphism("arnold family needs |b| < 1");
    const long long n = static_cast<long long>(spec.a_cells) * spec.b_cells;
    std::vector<TongueCell> out(static_cast<std::size_t>(n));
    auto axis = [](double lo, double hi, int cells, int i) {
        return cells == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells - 1);
    };
    for_each_index(
        n,
        [&](long long idx) {
            TongueCell c;
            c.i = static_cast<int>(idx % spec.a_cells);
            c.j = static_cast<int>(idx / spec.a_cells);
            c.a = axis(spec.a_min, spec.a_max, spec.a_cells, c.i);
            c.b = axis(spec.b_min, spec.b_max, spec.b_cells, c.j);
            std::mt19937_64 rng(cell_seed(spec.seed, static_cast<std::uint64_t>(idx)));
            c.x0 = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const AnalyticCircleMap f = AnalyticCircleMap::arnold(c.a, c.b);
            c.birkhoff = rotation_number_birkhoff(f, c.x0, spec.birkhoff_n).value;
            try {
                const RotationEstimate est = rotation_number_closest_return(f, c.x0, spec.depth, spec.n_max);
                c.rho = est.value;
                c.error_bound = est.error_bound;
                c.depth = est.depth;
            } catch (const PeriodicOrbitDetected& e) {
                c.locked = true;
                c.p = e.p;
                c.q = e.q;
                const double r = static_cast<double>(e.p) / static_cast<double>(e.q);
                c.rho = r - std::floor(r);
                c.error_bound = 0.0;
            }
            out[static_cast<std::size_t>(idx)] = c;
        },
        exec);
    return out;
}

}  // namespace circlelab::kernels
