// gaugewalk: simulate, check and converge subcommands.
//
// Exit codes: 0 success or all checks pass, 1 invalid config, 2 check failure,
// 3 runtime error.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gaugewalk/harness.hpp"

namespace {

enum Exit { kOk = 0, kInvalid = 1, kCheckFailed = 2, kRuntime = 3 };

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

gaugewalk::RunConfig load(const Options& o) {
    gaugewalk::RunConfig c = gaugewalk::load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.output_dir = o.out;
    return c;
}

int simulate(const Options& o) {
    const gaugewalk::RunConfig c = load(o);
    const auto s = gaugewalk::run_simulate(c, c.output_dir);
    if (!o.quiet)
        std::printf("wrote %zu states to %s (max norm deviation %.3g, max continuity residual %.3g)\n", s.states,
                    c.output_dir.c_str(), s.max_norm_deviation, s.max_continuity_residual);
    return kOk;
}

int check(const Options& o) {
    const gaugewalk::RunConfig c = load(o);
    const gaugewalk::CheckReport rep = gaugewalk::run_checks(c);
    std::filesystem::create_directories(c.output_dir);
    std::ofstream(std::filesystem::path(c.output_dir) / "report.json", std::ios::binary) << rep.to_json().dump(2) << '\n';
    if (!o.quiet)
        for (const auto& r : rep.checks)
            std::printf("%-20s %-8s deviation %.3e  tolerance %.1e%s%s\n", r.name.c_str(), gaugewalk::to_string(r.status),
                        r.deviation, r.tolerance, r.note.empty() ? "" : "  ", r.note.c_str());
    if (rep.crashed()) return kRuntime;
    return rep.passed() ? kOk : kCheckFailed;
}

int converge(const Options& o) {
    const gaugewalk::RunConfig c = load(o);
    const auto r = gaugewalk::run_convergence(c, c.output_dir);
    if (!o.quiet) {
        for (const auto& row : r.rows) std::printf("epsilon %-12.6g l2_error %.6e\n", row.eps, row.l2_error);
        std::printf("slope %.4f\n", r.slope);
        if (!r.monotone) std::printf("warning: error sequence is not monotone\n");
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gauged discrete-time quantum walks: simulation, invariance checks, continuum convergence"};
    app.require_subcommand(1);
    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory (overrides output_dir)");
        sub->add_option("--seed", opt.seed, "seed for random initial states and gauge functions");
        sub->add_flag("--quiet", opt.quiet, "suppress progress output");
    };
    CLI::App* sim = app.add_subcommand("simulate", "evolve the walk and write snapshots and observables");
    CLI::App* chk = app.add_subcommand("check", "run the invariance checks and write report.json");
    CLI::App* conv = app.add_subcommand("converge", "compare against the Dirac reference over an eps list");
    for (CLI::App* s : {sim, chk, conv}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }

    try {
        if (sim->parsed()) return simulate(opt);
        if (chk->parsed()) return check(opt);
        return converge(opt);
    } catch (const gaugewalk::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kInvalid;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntime;
    }
}
