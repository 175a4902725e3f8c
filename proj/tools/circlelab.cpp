// circlelab: batch experiments on analytic circle diffeomorphisms.
#include "circlelab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    namespace cli = circlelab::cli;
    CLI::App app{"circle diffeomorphism laboratory"};
    app.require_subcommand(1);

    cli::Overrides o;
    std::string config, out;
    int workers = 0;
    std::uint64_t seed = 0;
    long long depth = 0, nmax = 0;
    double tol = 0.0;

    const std::map<std::string, std::string> help{
        {"classify", "Diophantine / Brjuno / condition-H verdict for the target number"},
        {"rotnum", "Birkhoff and closest-return rotation numbers of a map"},
        {"tune", "tune the arnold parameter a onto the target rotation number"},
        {"kam", "KAM Newton iteration: CSV trace and verdict"},
        {"geometry", "dynamical-partition report over a range of levels"},
        {"tongue-scan", "rotation number over an (a, b) grid of the arnold family"},
        {"bootstrap", "the gamma schedule of the bootstrap map"},
        {"validate", "check a config file and report every problem"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& name : cli::subcommands()) {
        CLI::App* s = app.add_subcommand(name, help.at(name));
        s->add_option("--config", config, "JSON config file");
        s->add_option("--out", out, "output directory (default: primary output to stdout)");
        s->add_option("--workers", workers, "OpenMP threads; 1 runs the serial reference")->check(CLI::NonNegativeNumber);
        s->add_option("--seed", seed, "random seed");
        s->add_option("--depth", depth, "depth override for the subcommand");
        s->add_option("--tol", tol, "tolerance override");
        s->add_option("--nmax", nmax, "iteration budget override");
        subs.push_back(s);
    }
    CLI11_PARSE(app, argc, argv);

    for (CLI::App* s : subs) {
        if (!s->parsed()) continue;
        if (s->count("--config")) o.config = config;
        if (s->count("--out")) o.out = out;
        if (s->count("--workers")) o.workers = workers;
        if (s->count("--seed")) o.seed = seed;
        if (s->count("--depth")) o.depth = depth;
        if (s->count("--tol")) o.tol = tol;
        if (s->count("--nmax")) o.nmax = nmax;
        return cli::run(s->get_name(), o, std::cout, std::cerr);
    }
    return cli::kExitError;
}
