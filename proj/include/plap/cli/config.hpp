#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "plap/core/error.hpp"
#include "plap/grid/grid.hpp"
#include "plap/lab/experiment.hpp"
#include "plap/lab/predict.hpp"
#include "plap/orlicz/growth_model.hpp"
#include "plap/orlicz/orlicz_function.hpp"
#include "plap/solver/expression.hpp"
#include "plap/solver/galerkin.hpp"
#include "plap/solver/problem.hpp"

namespace plap {

/// Line-based `key = value` text with `[section]` headers. `#` starts a comment.
class Config {
  public:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };

    static const std::map<std::string, std::set<std::string>>& schema() {
        static const std::map<std::string, std::set<std::string>> s = {
            {"model", {"variant", "p", "mu", "phi", "scale", "q_exp", "nu", "nu_inf", "phi_mu", "samples"}},
            {"problem",
             {"dim", "boundary", "nx", "ny", "length", "length_y", "steps", "dt", "final_time", "u0", "forcing",
              "manufactured", "exact", "error_budget", "energy_trim"}},
            {"solver",
             {"newton_tol", "newton_max_iter", "jacobian_floor", "damping", "galerkin_modes", "galerkin_scheme",
              "galerkin_substeps", "compare_tolerance"}},
            {"regularity",
             {"q", "trim", "time_ladder", "time_fit", "space_ladder", "space_fit", "diagonal_ladder", "diagonal_fit",
              "diagonal", "space_setting", "refined_setting", "slack", "averaged_window"}},
        };
        return s;
    }

    static Config parse(const std::string& text) {
        Config c;
        std::istringstream in(text);
        std::string raw, section;
        std::size_t line = 0;
        while (std::getline(in, raw)) {
            ++line;
            std::string s = trim(raw.substr(0, raw.find('#')));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']') throw ConfigError("unterminated section header", line);
                section = trim(s.substr(1, s.size() - 2));
                if (!schema().count(section)) throw ConfigError("unknown section [" + section + "]", line);
                if (c.sections_.count(section)) throw ConfigError("section [" + section + "] repeated", line);
                c.sections_[section];
                c.section_lines_[section] = line;
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line);
            if (section.empty()) throw ConfigError("key outside of any section", line);
            const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
            if (key.empty()) throw ConfigError("empty key", line);
            if (!schema().at(section).count(key))
                throw ConfigError("unknown key '" + key + "' in [" + section + "]", line);
            if (value.empty()) throw ConfigError("key '" + key + "' has no value", line);
            auto& sec = c.sections_[section];
            if (sec.count(key)) throw ConfigError("key '" + key + "' repeated", line);
            sec[key] = {value, line};
        }
        return c;
    }

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

    void require_section(const std::string& section) const {
        if (!has_section(section)) throw ConfigError("missing section [" + section + "]");
    }

    bool has(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        return it != sections_.end() && it->second.count(key);
    }

    const Entry& entry(const std::string& section, const std::string& key) const {
        if (!has(section, key)) {
            auto it = section_lines_.find(section);
            throw ConfigError("[" + section + "] is missing required key '" + key + "'",
                              it == section_lines_.end() ? 0 : it->second);
        }
        return sections_.at(section).at(key);
    }

    std::string text(const std::string& section, const std::string& key) const { return entry(section, key).value; }
    std::string text(const std::string& section, const std::string& key, const std::string& fallback) const {
        return has(section, key) ? text(section, key) : fallback;
    }

    double number(const std::string& section, const std::string& key) const {
        const Entry& e = entry(section, key);
        return to_number(e.value, key, e.line);
    }
    double number(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? number(section, key) : fallback;
    }

    std::size_t count(const std::string& section, const std::string& key) const {
        const Entry& e = entry(section, key);
        const double v = to_number(e.value, key, e.line);
        if (v < 0.0 || v != std::floor(v) || v > 1e15)
            throw ConfigError("key '" + key + "' must be a non-negative integer", e.line);
        return static_cast<std::size_t>(v);
    }
    std::size_t count(const std::string& section, const std::string& key, std::size_t fallback) const {
        return has(section, key) ? count(section, key) : fallback;
    }

    bool flag(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        const Entry& e = entry(section, key);
        if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
        if (e.value == "false" || e.value == "no" || e.value == "0") return false;
        throw ConfigError("key '" + key + "' must be true or false", e.line);
    }

    /// Whitespace-separated integers, for ladder specs.
    std::vector<int> integers(const std::string& section, const std::string& key) const {
        const Entry& e = entry(section, key);
        std::istringstream in(e.value);
        std::vector<int> out;
        std::string tok;
        while (in >> tok) {
            const double v = to_number(tok, key, e.line);
            if (v != std::floor(v) || std::abs(v) > 1e6) throw ConfigError("key '" + key + "' needs integers", e.line);
            out.push_back(static_cast<int>(v));
        }
        return out;
    }

    /// Line of a key, or of its section header, or 0.
    std::size_t line_of(const std::string& section, const std::string& key) const {
        if (has(section, key)) return sections_.at(section).at(key).line;
        auto it = section_lines_.find(section);
        return it == section_lines_.end() ? 0 : it->second;
    }

  private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    }

    static double to_number(const std::string& v, const std::string& key, std::size_t line) {
        double out = 0.0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
            throw ConfigError("key '" + key + "': '" + v + "' is not a finite number", line);
        return out;
    }

    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::map<std::string, std::size_t> section_lines_;
};

namespace detail {

/// Runs a builder step and turns its InputError into a ConfigError at `line`.
template <class F>
auto at_line(std::size_t line, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InputError& e) {
        throw ConfigError(e.what(), line);
    }
}

inline std::vector<Expr> expressions(const Config& c, const std::string& section, const std::string& key) {
    const auto& e = c.entry(section, key);
    std::vector<Expr> out;
    std::size_t start = 0;
    while (true) {
        const auto stop = e.value.find(';', start);
        const std::string part = e.value.substr(start, stop == std::string::npos ? std::string::npos : stop - start);
        try {
            out.push_back(Expr::parse(part));
        } catch (const std::exception& ex) {
            throw ConfigError("key '" + key + "': " + ex.what(), e.line);
        }
        if (stop == std::string::npos) break;
        start = stop + 1;
    }
    return out;
}

} // namespace detail

inline GrowthModel model_from_config(const Config& c) {
    c.require_section("model");
    const std::string variant = c.text("model", "variant", "p_growth");
    const double mu = c.number("model", "mu", 0.0);
    return detail::at_line(c.line_of("model", "variant"), [&] {
        if (variant == "p_growth") return GrowthModel::p_growth(c.number("model", "p"), mu);
        if (variant != "orlicz") throw ConfigError("unknown model variant '" + variant + "'", c.line_of("model", "variant"));
        const std::string kind = c.text("model", "phi", "power");
        const double p = c.number("model", "p");
        if (kind == "power") return GrowthModel::orlicz(OrliczFunction::power(p, c.number("model", "scale", 1.0)), mu);
        if (kind == "max_power") return GrowthModel::orlicz(OrliczFunction::max_power(p, c.number("model", "q_exp")), mu);
        if (kind == "carreau")
            return GrowthModel::orlicz(OrliczFunction::carreau(p, c.number("model", "nu", 1.0),
                                                               c.number("model", "nu_inf", 0.0),
                                                               c.number("model", "phi_mu", 0.0)),
                                       mu);
        throw ConfigError("unknown phi '" + kind + "'", c.line_of("model", "phi"));
    });
}

/// Problem plus the optional exact solution and error budget.
struct ProblemSetup {
    ProblemSpec spec;
    std::vector<Expr> exact;
    std::optional<double> error_budget;
    /// Window margin of the energy diagnostics; 0 means T / 8.
    double energy_trim = 0.0;
};

inline ProblemSetup problem_from_config(const Config& c) {
    c.require_section("problem");
    ProblemSetup out;
    ProblemSpec& s = out.spec;
    s.model = model_from_config(c);
    const std::size_t dim = c.count("problem", "dim", 1);
    const std::string bnd = c.text("problem", "boundary", "periodic");
    const Boundary b = detail::at_line(c.line_of("problem", "boundary"), [&] { return parse_boundary(bnd); });
    const std::size_t nx = c.count("problem", "nx");
    const double lx = c.number("problem", "length", 1.0);
    detail::at_line(c.line_of("problem", "nx"), [&] {
        if (dim == 1) s.space = SpaceGrid::line(nx, lx, b);
        else if (dim == 2)
            s.space = SpaceGrid::square(nx, c.count("problem", "ny", nx), lx, c.number("problem", "length_y", lx), b);
        else throw ConfigError("dim must be 1 or 2", c.line_of("problem", "dim"));
        return 0;
    });
    s.steps = c.count("problem", "steps");
    if (c.has("problem", "dt") == c.has("problem", "final_time"))
        throw ConfigError("[problem] needs exactly one of 'dt' and 'final_time'", c.line_of("problem", "steps"));
    s.dt = c.has("problem", "dt") ? c.number("problem", "dt")
                                  : c.number("problem", "final_time") / static_cast<double>(std::max<std::size_t>(s.steps, 1));

    if (c.has("problem", "manufactured")) {
        for (const char* k : {"u0", "forcing", "exact"})
            if (c.has("problem", k))
                throw ConfigError(std::string("'") + k + "' conflicts with 'manufactured'", c.line_of("problem", k));
        out.exact = detail::expressions(c, "problem", "manufactured");
        s.components = out.exact.size();
        s.u0_expr = out.exact;
        s.u0 = from_expressions(out.exact);
        detail::at_line(c.line_of("problem", "manufactured"), [&] {
            s.forcing = manufactured_forcing(s.model, out.exact, dim).as_function();
            return 0;
        });
    } else {
        s.u0_expr = detail::expressions(c, "problem", "u0");
        s.components = s.u0_expr.size();
        s.u0 = from_expressions(s.u0_expr);
        if (c.has("problem", "forcing")) {
            s.forcing_expr = detail::expressions(c, "problem", "forcing");
            if (s.forcing_expr.size() != s.components)
                throw ConfigError("'forcing' and 'u0' have different component counts", c.line_of("problem", "forcing"));
            s.forcing = from_expressions(s.forcing_expr);
        }
        if (c.has("problem", "exact")) {
            out.exact = detail::expressions(c, "problem", "exact");
            if (out.exact.size() != s.components)
                throw ConfigError("'exact' and 'u0' have different component counts", c.line_of("problem", "exact"));
        }
    }
    if (c.has("problem", "error_budget")) {
        if (out.exact.empty()) throw ConfigError("'error_budget' needs an exact solution", c.line_of("problem", "error_budget"));
        out.error_budget = c.number("problem", "error_budget");
    }
    out.energy_trim = c.number("problem", "energy_trim", 0.0);
    detail::at_line(c.line_of("problem", "steps"), [&] {
        s.validate();
        return 0;
    });
    return out;
}

inline SolverConfig solver_from_config(const Config& c, unsigned threads) {
    SolverConfig s;
    s.newton_tol = c.number("solver", "newton_tol", s.newton_tol);
    s.newton_max_iter = c.count("solver", "newton_max_iter", s.newton_max_iter);
    s.jacobian_floor = c.number("solver", "jacobian_floor", s.jacobian_floor);
    s.damping = c.number("solver", "damping", s.damping);
    s.threads = threads;
    detail::at_line(c.line_of("solver", "newton_tol"), [&] {
        s.validate();
        return 0;
    });
    return s;
}

struct GalerkinSetup {
    std::size_t modes = 16;
    GalerkinOptions options;
    double tolerance = 1e-3;
};

inline GalerkinSetup galerkin_from_config(const Config& c) {
    GalerkinSetup g;
    g.modes = c.count("solver", "galerkin_modes", g.modes);
    const std::string scheme = c.text("solver", "galerkin_scheme", "sdirk2");
    if (scheme == "sdirk2") g.options.scheme = GalerkinScheme::sdirk2;
    else if (scheme == "backward_euler") g.options.scheme = GalerkinScheme::backward_euler;
    else throw ConfigError("unknown galerkin_scheme '" + scheme + "'", c.line_of("solver", "galerkin_scheme"));
    g.options.substeps = c.count("solver", "galerkin_substeps", g.options.substeps);
    if (g.modes < 1 || g.options.substeps < 1)
        throw ConfigError("galerkin_modes and galerkin_substeps must be positive", c.line_of("solver", "galerkin_modes"));
    g.tolerance = c.number("solver", "compare_tolerance", g.tolerance);
    return g;
}

/// Regularity settings plus the window H of the averaged check (0 means T / 16).
struct RegularitySetup {
    RegularityConfig config;
    double averaged_window = 0.0;
};

inline RegularitySetup regularity_from_config(const Config& c, unsigned threads) {
    RegularitySetup out;
    RegularityConfig& r = out.config;
    r.q = c.number("regularity", "q", r.q);
    r.trim = c.number("regularity", "trim", r.trim);
    auto ladder = [&](const char* name, LadderSpec& l) {
        const std::string lk = std::string(name) + "_ladder", fk = std::string(name) + "_fit";
        if (c.has("regularity", lk)) {
            const auto v = c.integers("regularity", lk);
            if (v.size() != 2) throw ConfigError("'" + lk + "' needs 'k_min k_max'", c.line_of("regularity", lk));
            l.k_min = v[0];
            l.k_max = v[1];
        }
        if (c.has("regularity", fk)) {
            const auto v = c.integers("regularity", fk);
            if (v.size() != 2) throw ConfigError("'" + fk + "' needs 'k_min k_max'", c.line_of("regularity", fk));
            l.fit_min = v[0];
            l.fit_max = v[1];
        }
        if (l.k_min < 0 || l.k_max < l.k_min || l.fit_min < l.k_min || l.fit_max > l.k_max || l.fit_max - l.fit_min < 3)
            throw ConfigError(std::string(name) + " ladder: need 0 <= k_min <= fit_min, fit_max <= k_max and 4 fit points",
                              c.line_of("regularity", c.has("regularity", fk) ? fk : lk));
    };
    ladder("time", r.time);
    ladder("space", r.space);
    ladder("diagonal", r.diagonal);
    r.diagonal_direction = c.flag("regularity", "diagonal", true);
    auto setting = [&](const char* key) {
        return detail::at_line(c.line_of("regularity", key), [&] { return parse_setting(c.text("regularity", key)); });
    };
    if (c.has("regularity", "space_setting")) r.space_setting = setting("space_setting");
    if (c.has("regularity", "refined_setting")) r.refined_setting = setting("refined_setting");
    r.slack = c.number("regularity", "slack", r.slack);
    out.averaged_window = c.number("regularity", "averaged_window", 0.0);
    if (!(r.q >= 1.0) || r.trim < 0.0 || r.slack < 0.0 || out.averaged_window < 0.0)
        throw ConfigError("regularity: need q >= 1 and non-negative trim, slack, averaged_window",
                          c.line_of("regularity", "q"));
    r.threads = threads;
    return out;
}

} // namespace plap
