#pragma once

#include <stdexcept>
#include <string>

namespace unionlap {

/// Bad inputs: domain violations, malformed configs, unsupported cases.
/// Maps to exit code 2 at the CLI and UL_EINVAL in the C API.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Iterative solver did not reach the requested residual.
/// Maps to exit code 3 at the CLI and UL_ESOLVER in the C API.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double worst_residual)
        : std::runtime_error(what), worst_residual_(worst_residual) {}
    double worst_residual() const { return worst_residual_; }

private:
    double worst_residual_;
};

}  // namespace unionlap
