// ============================================================================
// Shared aliases and error types.
// ============================================================================

#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace hdproj {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Bad user input: malformed files, invalid flag combinations, precondition
// violations.  The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// An in-fold projected score variance of exactly zero.  Test statistics are
// undefined in this case; the Monte Carlo engine counts such replicates
// separately and the CLI maps the error to exit code 3.
class DegenerateVarianceError : public std::runtime_error {
public:
    explicit DegenerateVarianceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure outside user control (eigensolver non-convergence and
// similar).  Also exits with code 3 at the CLI.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hdproj
