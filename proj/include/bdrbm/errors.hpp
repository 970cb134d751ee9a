#pragma once

#include <stdexcept>
#include <string>

namespace bdrbm {

// Bad arguments or malformed data.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation not defined for this object (e.g. filters of a nonlinear model).
struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative method failed to reach tolerance.
struct ConvergenceError : std::runtime_error {
    double residual;
    ConvergenceError(const std::string& msg, double res)
        : std::runtime_error(msg), residual(res) {}
};

}  // namespace bdrbm
