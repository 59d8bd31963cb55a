#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <json.hpp>

#include "plap/cli/config.hpp"
#include "plap/core/error.hpp"
#include "plap/core/io.hpp"
#include "plap/grid/field_io.hpp"
#include "plap/grid/norms.hpp"
#include "plap/lab/averaged.hpp"
#include "plap/lab/experiment.hpp"
#include "plap/orlicz/assumption_suite.hpp"
#include "plap/solver/energy_report.hpp"
#include "plap/solver/fd_solver.hpp"
#include "plap/solver/galerkin.hpp"

namespace plap {

inline constexpr const char* tool_version = "1.0.0";

enum ExitCode : int { exit_pass = 0, exit_failure = 1, exit_config = 2, exit_violation = 3 };

struct RunOptions {
    std::filesystem::path config;
    std::filesystem::path out = ".";
    std::uint64_t seed = 1;
    unsigned threads = 1;
    /// regularity only: reuse a stored trajectory instead of solving
    std::optional<std::filesystem::path> trajectory;
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Files of one run; everything goes through write_file_atomic.
class RunOutput {
  public:
    RunOutput(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    void write(const std::string& name, const std::string& bytes) {
        write_file_atomic(dir_ / name, bytes);
        files_[name] = hex64(fnv1a(bytes));
    }
    void write(const std::string& name, const CsvTable& t) { write(name, t.str()); }

    const std::map<std::string, std::string>& files() const { return files_; }
    const std::filesystem::path& dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> files_;
};

inline void write_manifest(RunOutput& out, const std::string& command, const RunOptions& opt,
                           const std::string& config_text, int code, const std::string& message) {
    nlohmann::ordered_json j;
    j["tool"] = "plap_lab";
    j["version"] = tool_version;
    j["command"] = command;
    j["config"] = opt.config.string();
    j["config_hash"] = hex64(fnv1a(config_text));
    j["seed"] = opt.seed;
    j["threads"] = opt.threads;
    j["exit_code"] = code;
    j["message"] = message;
    j["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                    "." + std::to_string(EIGEN_MINOR_VERSION)},
                      {"boost", BOOST_LIB_VERSION},
                      {"compiler", __VERSION__}};
    j["outputs"] = out.files();
    write_file_atomic(out.dir() / "manifest.json", j.dump(2) + "\n");
}

inline Field exact_field(const SpaceTimeGrid& g, const std::vector<Expr>& exact, unsigned threads) {
    return Field::sample(
        g, exact.size(),
        [&](double t, std::span<const double> x, std::size_t c) {
            return exact[c].eval(t, x[0], x.size() > 1 ? x[1] : 0.0);
        },
        threads);
}

inline double energy_trim(const ProblemSetup& p) {
    const double T = p.spec.final_time();
    return p.energy_trim > 0.0 ? p.energy_trim : std::max(T / 8.0, 2.0 * p.spec.dt);
}

inline Field obtain_trajectory(const ProblemSetup& p, const SolverConfig& s, const RunOptions& opt,
                               std::ostream& log) {
    if (opt.trajectory) {
        Field f = decode_binary(read_file(*opt.trajectory));
        if (!(f.grid() == p.spec.trajectory_grid()) || f.components() != p.spec.components)
            throw InputError("stored trajectory does not match the [problem] grid");
        log << "loaded trajectory " << opt.trajectory->string() << "\n";
        return f;
    }
    return solve(p.spec, s).u;
}

struct Outcome {
    int code = exit_pass;
    std::string message = "ok";
};

inline Outcome check_assumptions(const Config& c, const RunOptions& opt, RunOutput& out, std::ostream& log) {
    const GrowthModel model = model_from_config(c);
    SuiteOptions so;
    so.samples = c.count("model", "samples", so.samples);
    if (so.samples < 10) throw ConfigError("samples must be at least 10", c.line_of("model", "samples"));
    so.seed = opt.seed;
    so.threads = opt.threads;
    const auto rows = assumption_suite(model, so);
    out.write("assumptions.csv", suite_csv(rows));
    std::size_t bad = 0;
    for (const auto& r : rows)
        if (!r.passed) {
            ++bad;
            log << "check " << r.check << ": " << r.verdict << "\n";
        }
    log << model.describe() << ": " << rows.size() - bad << "/" << rows.size() << " checks pass\n";
    if (bad) return {exit_violation, std::to_string(bad) + " checks failed"};
    return {};
}

inline Outcome solve_command(const Config& c, const RunOptions& opt, RunOutput& out, std::ostream& log) {
    const ProblemSetup p = problem_from_config(c);
    const SolverConfig s = solver_from_config(c, opt.threads);
    const Trajectory tr = solve(p.spec, s);
    out.write("trajectory.bin", encode_binary(tr.u));
    out.write("trajectory.csv", field_csv(tr.u));
    CsvTable newton({"step", "iterations", "final_residual", "backtracks"});
    std::size_t worst = 0;
    for (const auto& n : tr.newton) {
        newton.row() << n.step << n.iterations << n.final_residual << n.backtracks;
        worst = std::max(worst, n.iterations);
    }
    out.write("newton.csv", newton);
    log << "solved " << p.spec.steps << " steps, at most " << worst << " Newton iterations per step\n";

    Outcome res;
    const EnergyReport e = energy_report(tr.u, p.spec, energy_trim(p), opt.threads);
    CsvTable energy({"quantity", "value"});
    energy.row() << "trim" << e.trim;
    for (const auto& [name, v] : e.entries()) energy.row() << name << v;
    out.write("energy.csv", energy);
    if (!e.all_finite_nonnegative()) res = {exit_violation, "energy diagnostics are not finite"};

    if (!p.exact.empty()) {
        const Field ex = exact_field(tr.u.grid(), p.exact, opt.threads);
        const double err = l2_norm(tr.u - ex, opt.threads), ref = l2_norm(ex, opt.threads);
        const double rel = ref > 0.0 ? err / ref : err;
        CsvTable t({"l2_error", "l2_exact", "relative", "budget", "verdict"});
        std::string verdict = "reported";
        {
            auto row = t.row();
            row << err << ref << rel;
            if (p.error_budget) {
                verdict = rel <= *p.error_budget ? "pass" : "fail";
                row << *p.error_budget;
            } else {
                row << "";
            }
            row << verdict;
        }
        out.write("error.csv", t);
        log << "relative L2 error vs exact " << format_double(rel) << " (" << verdict << ")\n";
        if (verdict == "fail") res = {exit_violation, "error above budget"};
    }
    return res;
}

inline Outcome regularity_command(const Config& c, const RunOptions& opt, RunOutput& out, std::ostream& log) {
    const ProblemSetup p = problem_from_config(c);
    const SolverConfig s = solver_from_config(c, opt.threads);
    const RegularitySetup r = regularity_from_config(c, opt.threads);
    const Field u = obtain_trajectory(p, s, opt, log);
    const RegularitySet set = ut_regularity_experiment(u, p.spec, r.config);
    out.write("curves.csv", curves_csv(set.curves));
    out.write("summary.csv", summary_csv(set.reports));
    for (const auto& rep : set.reports) {
        log << rep.label << ": alpha_hat " << format_double(rep.alpha_hat) << " " << rep.verdict;
        if (rep.refined) log << " (refined " << format_double(*rep.refined) << ": " << rep.refined_verdict << ")";
        log << "\n";
    }

    const AveragedCheck avg = ut_averaged_check(u, r.config.q, r.config.trim, r.averaged_window);
    out.write("averaged.csv", averaged_csv(avg));
    log << "averaged check factor " << format_double(avg.factor) << (avg.passed ? " pass" : " fail") << "\n";

    if (!set.passed()) return {exit_violation, "a measured exponent is below its prediction"};
    if (!avg.passed) return {exit_violation, "averaged characterisation bound violated"};
    return {};
}

inline Outcome galerkin_command(const Config& c, const RunOptions& opt, RunOutput& out, std::ostream& log) {
    const ProblemSetup p = problem_from_config(c);
    const SolverConfig s = solver_from_config(c, opt.threads);
    const GalerkinSetup gs = galerkin_from_config(c);
    const Field fd = solve(p.spec, s).u;
    const GalerkinResult gr = galerkin_solve(p.spec, gs.modes, s, gs.options);
    const double disc = l2_norm(fd - gr.u, opt.threads), ref = l2_norm(fd, opt.threads);
    const double rel = ref > 0.0 ? disc / ref : disc;
    const bool pass = rel <= gs.tolerance;
    std::vector<std::string> header = {"modes", "basis", "fd_norm", "discrepancy", "relative", "tolerance"};
    if (!p.exact.empty()) {
        header.push_back("fd_error");
        header.push_back("galerkin_error");
    }
    header.push_back("verdict");
    CsvTable t(header);
    {
        auto row = t.row();
        row << gs.modes << gr.basis << ref << disc << rel << gs.tolerance;
        if (!p.exact.empty()) {
            const Field ex = exact_field(fd.grid(), p.exact, opt.threads);
            row << l2_norm(fd - ex, opt.threads) << l2_norm(gr.u - ex, opt.threads);
        }
        row << (pass ? "pass" : "fail");
    }
    out.write("galerkin.csv", t);
    log << "Galerkin (" << gr.basis << " basis functions) vs grid solver: relative L2 discrepancy "
        << format_double(rel) << (pass ? " pass" : " fail") << "\n";
    if (!pass) return {exit_violation, "solvers disagree beyond tolerance"};
    return {};
}

} // namespace detail

/// Runs one subcommand and maps failures to exit codes; diagnostics go to `log`.
inline int run_command(const std::string& command, const RunOptions& opt, std::ostream& log) {
    std::string text;
    try {
        text = read_file(opt.config);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_config;
    }
    std::optional<detail::RunOutput> out;
    detail::Outcome res;
    try {
        const Config c = Config::parse(text);
        out.emplace(opt.out);
        if (command == "check-assumptions") res = detail::check_assumptions(c, opt, *out, log);
        else if (command == "solve") res = detail::solve_command(c, opt, *out, log);
        else if (command == "regularity") res = detail::regularity_command(c, opt, *out, log);
        else if (command == "galerkin-compare") res = detail::galerkin_command(c, opt, *out, log);
        else throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        res = {exit_config, std::string("config error: ") + e.what()};
    } catch (const std::invalid_argument& e) {
        res = {exit_config, std::string("invalid input: ") + e.what()};
    } catch (const std::out_of_range& e) {
        res = {exit_config, std::string("invalid input: ") + e.what()};
    } catch (const std::exception& e) {
        res = {exit_failure, std::string("failure: ") + e.what()};
    }
    if (res.code != exit_pass) log << res.message << "\n";
    try {
        if (!out && res.code == exit_config && !opt.out.empty()) out.emplace(opt.out);
        if (out) detail::write_manifest(*out, command, opt, text, res.code, res.message);
    } catch (const std::exception& e) {
        log << "error: could not write manifest: " << e.what() << "\n";
        if (res.code == exit_pass) res.code = exit_failure;
    }
    return res.code;
}

} // namespace plap
