#pragma once

#include <stdexcept>
#include <string>

namespace q2b {

// Bad run configuration (grid sizes, CFL, unknown names).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside its admissible domain (e.g. volatility outside the band).
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Generator returned a non-finite value.
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exponential scale too large for double precision.
struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Picard iteration failed to contract within the iteration budget.
struct ConvergenceError : std::runtime_error {
    int step;
    int node;
    double residual;
    ConvergenceError(int step_, int node_, double residual_)
        : std::runtime_error("picard iteration did not converge at step " + std::to_string(step_) +
                             ", node " + std::to_string(node_) +
                             ", residual " + std::to_string(residual_) +
                             " (dt too large relative to the y-Lipschitz constant?)"),
          step(step_), node(node_), residual(residual_) {}
};

} // namespace q2b
