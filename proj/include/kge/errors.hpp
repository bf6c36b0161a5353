#pragma once

#include <stdexcept>
#include <string>

namespace kge {

/// Bad input file or inconsistent option set. CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg, int line = -1)
        : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// Base for failures of a numerical run. CLI maps these to exit code 2.
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands live on different grids.
class GridMismatchError : public SolverFailure {
public:
    using SolverFailure::SolverFailure;
};

/// Inverse transform asked for a real field but the coefficients are not
/// conjugate-symmetric.
class SymmetryError : public SolverFailure {
public:
    using SolverFailure::SolverFailure;
};

/// Fixed-point iteration for the implicit scheme did not converge.
class NonlinearSolveError : public SolverFailure {
public:
    NonlinearSolveError(const std::string& msg, int iterations, double residual)
        : SolverFailure(msg), iterations(iterations), residual(residual) {}
    int iterations;
    double residual;
    long step = -1;  ///< filled in when thrown from inside a time loop
};

/// Solution left the finite range (NaN/Inf or amplitude past the cap).
class BlowUpError : public SolverFailure {
public:
    BlowUpError(const std::string& msg, long step, double amplitude)
        : SolverFailure(msg), step(step), amplitude(amplitude) {}
    long step;
    double amplitude;
};

/// Step size violates the stability bound while enforcement is on.
class StabilityError : public SolverFailure {
public:
    StabilityError(const std::string& msg, double dt, double bound)
        : SolverFailure(msg), dt(dt), bound(bound) {}
    double dt;
    double bound;
};

}  // namespace kge
