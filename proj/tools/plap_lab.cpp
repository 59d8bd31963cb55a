#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "plap/cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for degenerate parabolic systems of p-Laplace and Orlicz type"};
    app.require_subcommand(1);
    app.set_version_flag("--version", plap::tool_version);

    plap::RunOptions opt;
    std::string trajectory;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "scenario config file")->required();
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        sub->add_option("--seed", opt.seed, "seed of the sampling streams")->capture_default_str();
        sub->add_option("--threads", opt.threads, "worker threads")->capture_default_str()->check(CLI::Range(1u, 1024u));
    };
    common(app.add_subcommand("check-assumptions", "sampled inequality suite for the [model]"));
    common(app.add_subcommand("solve", "backward Euler grid solve with Newton log and energy diagnostics"));
    auto* reg = app.add_subcommand("regularity", "quotient curves and fitted exponents of u_t");
    common(reg);
    reg->add_option("--trajectory", trajectory, "stored trajectory.bin to analyse instead of solving");
    common(app.add_subcommand("galerkin-compare", "Galerkin solver against the grid solver"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : plap::exit_config;
    }
    if (!trajectory.empty()) opt.trajectory = trajectory;
    const std::string command = app.get_subcommands().front()->get_name();
    return plap::run_command(command, opt, std::cout);
}
