#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plap {

/// Invalid arguments: non-finite entries, out-of-domain parameters.
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A quotient step or window does not fit the grid.
class RangeError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// Q == P or similar inputs for which a ratio has no meaning.
class DegenerateInputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Quadrature or 1D maximisation did not reach its tolerance.
class NumericError : public std::runtime_error {
  public:
    NumericError(const std::string& what, double estimate, double error_estimate)
        : std::runtime_error(what), estimate_(estimate), error_estimate_(error_estimate) {}

    double estimate() const noexcept { return estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

  private:
    double estimate_;
    double error_estimate_;
};

/// Newton or ODE stepping failure. Carries where it happened.
class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string& what, std::size_t step, double time, double residual)
        : std::runtime_error(what), step_(step), time_(time), residual_(residual) {}

    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }
    double residual() const noexcept { return residual_; }

  private:
    std::size_t step_;
    double time_;
    double residual_;
};

/// Closed-form expression that cannot be parsed or differentiated.
class DescriptorError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Experiment config problems; `line` is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

} // namespace plap
