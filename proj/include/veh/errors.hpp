#pragma once

#include <stdexcept>
#include <string>

namespace veh {

// All library failures derive from Error. The module name is carried along so
// the CLI can report where a numeric failure came from.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// A parameter violates its domain (nonpositive mass, negative power, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Gains outside the open set K_m > 0, K_e > -1.
class InfeasibleGainsError : public Error {
public:
    using Error::Error;
};

/// The system matrix is not Hurwitz.
class UnstableError : public Error {
public:
    using Error::Error;
};

/// A linear solve was numerically rank deficient.
class SingularSolveError : public Error {
public:
    using Error::Error;
};

/// Generic numeric failure (non-finite result, residual check failed, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class ToleranceError : public Error {
public:
    using Error::Error;
};

/// A denominator of the closed-form transfer functions vanished.
class PoleOnGridError : public Error {
public:
    using Error::Error;
};

/// Configuration or input-shape problem (bad JSON, unknown key, short trajectory).
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace veh
