#pragma once

// Experiment runner behind the circlelab executable. A run is a subcommand,
// a JSON config (optional) and a handful of flag overrides; the resolved
// config is embedded in every JSON document written.

#include "circlelab/arithmetic.hpp"
#include "circlelab/geometry.hpp"
#include "circlelab/io.hpp"
#include "circlelab/kam.hpp"
#include "circlelab/kernels.hpp"
#include "circlelab/rotation.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace circlelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNegative = 2;  // computed, and the answer is "diverged" / "fail"

const std::vector<std::string>& subcommands();

struct RotationSettings {
    double x0 = 0.0;
    int depth = 20;
    long long n_max = kDefaultNmax;
    long long birkhoff_n = 1'000'000;
    double tol = 1e-12;  // tuning tolerance
};

struct BootstrapSettings {
    double r = 5.0;
    double sigma = 0.0;
    double gamma0 = 0.0;
    int steps = 60;
};

struct ExperimentConfig {
    std::string subcommand;
    std::uint64_t seed = 0;
    int workers = 0;  // 0: OpenMP default, 1: serial reference
    std::string out;  // empty: primary output to stdout
    arith::ContinuedFraction target = arith::ContinuedFraction::golden_mean();
    io::MapSpec map;
    arith::ClassifyConfig arithmetic;
    RotationSettings rotation;
    KamConfig kam;
    geometry::GeometryConfig geometry;
    kernels::TongueSpec tongue;
    BootstrapSettings bootstrap;

    ExperimentConfig();
    kernels::Exec exec() const;
};

/// Everything that determines the results. workers and out are left out:
/// they change neither the numbers nor the bytes written.
io::Json to_json(const ExperimentConfig& config);

/// Schema and cross-field checks. Every problem is collected, each prefixed
/// with its field path.
ExperimentConfig resolve_config(const io::Json& doc, io::Problems& problems);

/// Reads and checks a config file without running anything.
io::Problems validate_config(const std::string& path);

struct Overrides {
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    std::optional<long long> depth;
    std::optional<double> tol;
    std::optional<long long> nmax;
};

/// Writes flag overrides into the config document at the fields they mirror.
void apply_overrides(io::Json& doc, const std::string& subcommand, const Overrides& o);

int run(const std::string& subcommand, const Overrides& overrides, std::ostream& out, std::ostream& err);

}  // namespace circlelab::cli
