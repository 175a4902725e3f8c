#include "circlelab/geometry.hpp"

#include "circlelab/errors.hpp"
#include "circlelab/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace circlelab::geometry {

namespace {

// golden-section search for the max of g on [a, b]
double refine_max(const std::function<double(double)>& g, double a, double b, double* at) {
    const double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
        if (gc > gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    const double x = 0.5 * (a + b);
    const double gx = g(x);
    if (at) *at = x;
    return gx;
}

double lift_diff(const LiftPoint& a, const LiftPoint& b) {
    return static_cast<double>(a.turns - b.turns) + (a.frac - b.frac);
}

double median3(double a, double b, double c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

}  // namespace

Returns closest_returns(const AnalyticCircleMap& f, int levels, double x0) {
    if (levels < 1) throw PreconditionViolation("closest_returns needs levels >= 1");
    // a deep enclosure of rho; it also carries the return times
    RotationEstimate est = rotation_enclosure(f, x0, kDefaultNmax, [](double lo, double hi) { return hi - lo < 1e-13; });
    if (static_cast<int>(est.return_times.size()) < levels) {
        const RotationEstimate more = rotation_number_closest_return(f, x0, levels + 1);
        if (more.return_times.size() > est.return_times.size()) {
            est.return_times = more.return_times;
            est.numerators = more.numerators;
        }
    }
    if (static_cast<int>(est.return_times.size()) < levels)
        throw DepthExhausted(levels, static_cast<int>(est.return_times.size()));
    Returns r;
    r.rho = est.lift_value;
    r.q.push_back(1);
    r.p.push_back(static_cast<long long>(std::floor(est.lo)));
    for (std::size_t i = 0; i < est.return_times.size(); ++i) {
        r.q.push_back(est.return_times[i]);
        r.p.push_back(est.numerators[i]);
    }
    return r;
}

PartitionLevel build_partition(const AnalyticCircleMap& f, int n, const PartitionOptions& opt) {
    return build_partition(f, closest_returns(f, n + 1, opt.x0), n, opt);
}

PartitionLevel build_partition(const AnalyticCircleMap& f, const Returns& r, int n, const PartitionOptions& opt) {
    if (n < 0) throw PreconditionViolation("partition level must be >= 0");
    if (static_cast<int>(r.q.size()) <= n + 1) throw DepthExhausted(n + 1, static_cast<int>(r.q.size()) - 1);
    if (opt.grid < 2) throw PreconditionViolation("partition grid must be >= 2");
    PartitionLevel L;
    L.n = n;
    L.q_n = r.q[static_cast<std::size_t>(n)];
    L.q_next = r.q[static_cast<std::size_t>(n + 1)];
    L.p_n = r.p[static_cast<std::size_t>(n)];
    L.p_next = r.p[static_cast<std::size_t>(n + 1)];
    L.qn_distance = std::abs(static_cast<double>(L.q_n) * r.rho - static_cast<double>(L.p_n));

    L.beta = kernels::displacement_grid(f, L.q_n, L.p_n, opt.grid, opt.exec);
    for (double& b : L.beta) b = std::abs(b);
    const auto [mn, mx] = std::minmax_element(L.beta.begin(), L.beta.end());
    const double h = 1.0 / opt.grid;
    const double grid_max = *mx, grid_min = *mn;
    auto beta_at = [&](double x) {
        LiftPoint p = LiftPoint::from(x);
        const LiftPoint s = p;
        for (long long i = 0; i < L.q_n; ++i) p = step(f, p);
        return std::abs(lift_diff(p, s) - static_cast<double>(L.p_n));
    };
    const double xmax = kernels::grid_point(mx - L.beta.begin(), opt.grid);
    const double xmin = kernels::grid_point(mn - L.beta.begin(), opt.grid);
    L.M = std::max(grid_max, refine_max(beta_at, xmax - h, xmax + h, &L.argmax));
    L.m = std::min(grid_min, -refine_max([&](double x) { return -beta_at(x); }, xmin - h, xmin + h, &L.argmin));
    if (L.M == grid_max) L.argmax = xmax;
    if (L.m == grid_min) L.argmin = xmin;
    // |D beta_n| <= |Df^{q_n} - 1| <= e^{Var} - 1
    const double lip = std::expm1(log_derivative_variation(f));
    L.M_upper = grid_max + 0.5 * h * lip;
    L.m_lower = grid_min - 0.5 * h * lip;

    // q_{n+1} images of I_n(x0) and q_n images of I_{n+1}(x0)
    const long long span = L.q_next + L.q_n;
    std::vector<LiftPoint> orbit;
    orbit.reserve(static_cast<std::size_t>(span + 1));
    orbit.push_back(LiftPoint::from(opt.x0));
    for (long long i = 0; i < span; ++i) orbit.push_back(step(f, orbit.back()));
    struct Piece {
        double start, length;
    };
    std::vector<Piece> pieces;
    auto add = [&](long long i, long long q, long long p) {
        const double d = lift_diff(orbit[static_cast<std::size_t>(i + q)], orbit[static_cast<std::size_t>(i)]) -
                         static_cast<double>(p);
        const double a = orbit[static_cast<std::size_t>(i)].frac;
        double left = d >= 0.0 ? a : a + d;
        left -= std::floor(left);
        pieces.push_back({left, std::abs(d)});
    };
    for (long long i = 0; i < L.q_next; ++i) add(i, L.q_n, L.p_n);
    for (long long i = 0; i < L.q_n; ++i) add(i, L.q_next, L.p_next);
    std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.start < b.start; });
    double total = 0.0, overlap = 0.0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        total += pieces[i].length;
        const double end = pieces[i].start + pieces[i].length;
        const double next_start = i + 1 < pieces.size() ? pieces[i + 1].start : pieces[0].start + 1.0;
        overlap += std::max(0.0, end - next_start);
    }
    L.tiling_total = total;
    L.tiling_overlap = overlap;
    L.intervals = static_cast<int>(pieces.size());
    if (std::abs(total - 1.0) > kTilingTolerance || overlap > kTilingTolerance) throw TilingFailure(total, overlap);
    return L;
}

std::string to_string(Trend t) {
    switch (t) {
    case Trend::bounded_trend: return "bounded_trend";
    case Trend::growing_trend: return "growing_trend";
    case Trend::inconclusive: return "inconclusive";
    }
    return "?";
}

Trend classify_trend(const std::vector<double>& ratios) {
    if (ratios.size() < 3) return Trend::inconclusive;
    const double a = ratios[ratios.size() - 3], b = ratios[ratios.size() - 2], c = ratios.back();
    if (b >= 1.5 * a && c >= 1.5 * b) return Trend::growing_trend;
    const double med = median3(a, b, c);
    auto near = [&](double x) { return x <= 1.5 * med && x >= med / 1.5; };
    if (near(a) && near(b) && near(c)) return Trend::bounded_trend;
    return Trend::inconclusive;
}

C1Result c1_criterion(const AnalyticCircleMap& f, int n_max, int n_min, const PartitionOptions& opt) {
    if (n_min < 0 || n_max < n_min) throw PreconditionViolation("c1_criterion needs 0 <= n_min <= n_max");
    const Returns r = closest_returns(f, n_max + 1, opt.x0);
    C1Result out;
    for (int n = n_min; n <= n_max; ++n) {
        const PartitionLevel L = build_partition(f, r, n, opt);
        out.levels.push_back(n);
        out.ratios.push_back(L.M / L.m);
    }
    out.trend = classify_trend(out.ratios);
    return out;
}

DenjoyResult denjoy_checks(const AnalyticCircleMap& f, const PartitionLevel& level, const PartitionOptions& opt) {
    DenjoyResult out;
    out.variation = log_derivative_variation(f);
    if (f.is_rotation()) return out;
    const auto g = kernels::log_derivative_grid(f, level.q_n, opt.grid, opt.exec);
    std::size_t best = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(g[i]) > std::abs(g[best])) best = i;
    const double h = 1.0 / opt.grid;
    const double x = kernels::grid_point(static_cast<long long>(best), opt.grid);
    double at = x;
    const double refined = refine_max(
        [&](double y) { return std::abs(orbit_log_derivative(f, y, level.q_n, 0)); }, x - h, x + h, &at);
    out.max_log_df = std::max(std::abs(g[best]), refined);
    out.witness = refined >= std::abs(g[best]) ? at : x;
    out.classical_residual = out.max_log_df - out.variation;
    out.improved_C = out.max_log_df / std::sqrt(level.M);
    return out;
}

GrowthResult derivative_growth_check(const AnalyticCircleMap& f, const PartitionLevel& level, int r,
                                     std::vector<long long> j_samples, const PartitionOptions& opt) {
    if (r < 1 || r > 3) throw PreconditionViolation("derivative_growth_check needs r in 1..3");
    if (level.beta.size() != static_cast<std::size_t>(opt.grid))
        throw PreconditionViolation("partition level was built on a different grid");
    std::sort(j_samples.begin(), j_samples.end());
    for (long long j : j_samples)
        if (j < 1 || j > level.q_next) throw PreconditionViolation("j samples must lie in [1, q_{n+1}]");
    const bool all_j = j_samples.empty();
    const double sqrtM = std::sqrt(level.M);

    struct PerX {
        double c = 0.0;
        long long j = 0;
        double l1 = 0.0, l2 = 0.0;
    };
    std::vector<PerX> per(static_cast<std::size_t>(opt.grid));
    kernels::for_each_index(
        opt.grid,
        [&](long long i) {
            const double x = kernels::grid_point(i, opt.grid);
            const double beta = level.beta[static_cast<std::size_t>(i)];
            const double scale = std::pow(sqrtM / beta, r);
            JetAccumulator acc(x);
            PerX px;
            double s1 = 0.0, s2 = 0.0;
            std::size_t next_sample = 0;
            for (long long j = 1; j <= level.q_next; ++j) {
                const double dfi = acc.state().d[0];  // Df^{j-1}(x)
                s1 += dfi;
                s2 += dfi * dfi;
                acc.advance(f);
                bool take = all_j;
                if (!all_j && next_sample < j_samples.size() && j_samples[next_sample] == j) {
                    take = true;
                    while (next_sample < j_samples.size() && j_samples[next_sample] == j) ++next_sample;
                }
                if (take) {
                    const double c = std::abs(acc.state().log_d[r]) / scale;
                    if (c > px.c) {
                        px.c = c;
                        px.j = j;
                    }
                }
            }
            px.l1 = s1 * beta;
            px.l2 = s2 * beta * beta / level.M;
            per[static_cast<std::size_t>(i)] = px;
        },
        opt.exec);
    GrowthResult out;
    out.r = r;
    for (int i = 0; i < opt.grid; ++i) {
        const PerX& px = per[static_cast<std::size_t>(i)];
        if (px.c > out.C) {
            out.C = px.c;
            out.witness_x = kernels::grid_point(i, opt.grid);
            out.witness_j = px.j;
        }
        out.lemma_C1 = std::max(out.lemma_C1, px.l1);
        out.lemma_C2 = std::max(out.lemma_C2, px.l2);
    }
    return out;
}

BetaRecursionResult beta_recursion_check(const PartitionLevel& level, const PartitionLevel& next, int k) {
    if (next.n != level.n + 1) throw PreconditionViolation("beta recursion needs consecutive levels");
    if (level.beta.size() != next.beta.size() || level.beta.empty())
        throw PreconditionViolation("levels were built on different grids");
    if (k < 2) throw PreconditionViolation("smoothness proxy k must be >= 2");
    BetaRecursionResult out;
    out.k = k;
    const double ratio = next.qn_distance / level.qn_distance;
    const double Mk = std::pow(level.M, 0.5 * (k - 1));
    const double Mh = std::sqrt(level.M);
    const int grid = static_cast<int>(level.beta.size());
    for (int i = 0; i < grid; ++i) {
        const double bn = level.beta[static_cast<std::size_t>(i)];
        const double bn1 = next.beta[static_cast<std::size_t>(i)];
        const double lhs = std::abs(bn1 - ratio * bn);
        const double bracket = Mk * bn + Mh * bn1;
        const double c = lhs / bracket;
        if (c > out.C) {
            out.C = c;
            out.witness = kernels::grid_point(i, grid);
        }
    }
    const double den = 1.0 - out.C * Mh;
    out.vacuous = !(den > 0.0);
    out.M_bound = out.vacuous ? std::numeric_limits<double>::infinity() : level.M * (ratio + out.C * Mk) / den;
    out.m_bound = level.m * (ratio - out.C * Mk) / (1.0 + out.C * Mh);
    // grid-based C, refined extrema: allow the refinement slack
    const double slack = 1e-9;
    out.M_respected = next.M <= out.M_bound * (1.0 + slack) + slack;
    out.m_respected = next.m >= out.m_bound * (1.0 - slack) - slack;
    return out;
}

KoksmaResult koksma_check(const LiftFn& phi, double variation, const arith::ContinuedFraction& alpha, int n,
                          int pairs, std::uint64_t seed) {
    if (n < 1) throw PreconditionViolation("koksma_check needs n >= 1");
    if (pairs < 1) throw PreconditionViolation("koksma_check needs pairs >= 1");
    const auto conv = arith::convergents(alpha, n);
    if (static_cast<int>(conv.size()) < n || !conv.back().q) throw DepthExhausted(n, static_cast<int>(conv.size()));
    const long long q = static_cast<long long>(*conv.back().q);
    const double a = alpha.value();
    auto birkhoff = [&](double x) {
        double s = 0.0;
        for (long long j = 0; j < q; ++j) {
            double y = x + static_cast<double>(j) * a;
            y -= std::floor(y);
            s += phi(y);
        }
        return s;
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    KoksmaResult out;
    out.q_n = q;
    out.pairs = pairs;
    out.max_violation = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < pairs; ++i) {
        const double x = u(rng), y = u(rng);
        const double d = std::abs(birkhoff(x) - birkhoff(y));
        out.max_difference = std::max(out.max_difference, d);
        out.max_violation = std::max(out.max_violation, d - variation);
    }
    return out;
}

std::vector<double> bootstrap_schedule(double r, double sigma, double gamma0, int steps) {
    const double fixed = r - 2.0 - sigma;
    if (!(fixed > 0.0)) throw EmptyWindow("r = " + std::to_string(r) + " <= 2 + sigma = " + std::to_string(2.0 + sigma));
    if (sigma < 0.0) throw PreconditionViolation("sigma must be >= 0");
    if (!(gamma0 >= 0.0 && gamma0 <= fixed)) throw PreconditionViolation("gamma0 must lie in [0, r - 2 - sigma]");
    if (steps < 0) throw PreconditionViolation("steps must be >= 0");
    auto g = [&](double t) { return (fixed + t * (1.0 + sigma)) / (2.0 + sigma); };
    std::vector<double> out{gamma0};
    for (int k = 0; k < steps; ++k) out.push_back(0.5 * (out.back() + g(out.back())));
    return out;
}

GeometryReport geometry_report(const AnalyticCircleMap& f, const GeometryConfig& config) {
    if (config.n_min < 0 || config.n_max < config.n_min)
        throw PreconditionViolation("geometry needs 0 <= n_min <= n_max");
    GeometryReport rep;
    const Returns r = closest_returns(f, config.n_max + 2, config.partition.x0);
    rep.rho = r.rho;
    rep.variation = log_derivative_variation(f);
    std::vector<double> ratios;
    PartitionLevel cur = build_partition(f, r, config.n_min, config.partition);
    for (int n = config.n_min; n <= config.n_max; ++n) {
        PartitionLevel next = build_partition(f, r, n + 1, config.partition);
        LevelRow row;
        row.ratio = cur.M / cur.m;
        row.denjoy = denjoy_checks(f, cur, config.partition);
        row.growth_r1 = derivative_growth_check(f, cur, 1, {}, config.partition);
        row.recursion = beta_recursion_check(cur, next, config.k_smoothness);
        if (row.denjoy.classical_residual > 1e-8) rep.denjoy_ok = false;
        ratios.push_back(row.ratio);
        row.level = std::move(cur);
        row.level.beta.clear();
        row.level.beta.shrink_to_fit();
        rep.rows.push_back(std::move(row));
        cur = std::move(next);
    }
    rep.trend = classify_trend(ratios);
    return rep;
}

}  // namespace circlelab::geometry
