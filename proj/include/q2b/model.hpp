#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace q2b {

// Driver of the backward equation, f(t, x, y, z, a), where a is the
// quadratic-variation density of the driving martingale.
using GeneratorFn = std::function<double(double t, double x, double y, double z, double a)>;

// A generator together with its declared growth/regularity constants.
// The constants are declarations; validate_problem audits them by sampling.
struct GeneratorSpec {
    GeneratorFn f;
    double alpha = 0.0;      // constant part of the growth bound
    double beta = 0.0;       // |y| coefficient of the growth bound
    double gamma_q = 1.0;    // quadratic growth coefficient, |f| <= alpha + beta|y| + (gamma_q/2) a z^2
    double lip_y = 0.0;      // Lipschitz constant in y
    double mu = 0.0;         // local-Lipschitz-in-z coefficient
    double phi_bound = 0.0;  // bound on the linear-in-z part
    bool depends_on_y = false;
    bool depends_on_x = false;
    // Set when f is exactly (g/2) * a * z^2; enables the exponential-transform
    // solver path, which is the exact solution of the per-step problem.
    std::optional<double> pure_quadratic_gamma;
    std::string name = "custom";
};

// The volatility band [a_low, a_high] and its finite discretization grid.
struct ControlSet {
    double a_low = 0.0;
    double a_high = 0.0;
    std::vector<double> grid;  // sorted, endpoints included

    bool valid() const;
    bool contains(double a) const { return a >= a_low && a <= a_high; }
    // Band with n grid points (endpoints always present; n >= 2 unless degenerate).
    static ControlSet band(double a_low, double a_high, int n_points = 2);
};

struct TerminalSpec {
    std::function<double(double)> g;
    double bound = 0.0;  // must dominate sup |g| over the lattice range
    std::string name = "custom";
};

struct ProblemSpec {
    double horizon = 1.0;
    double x0 = 0.0;
    GeneratorSpec generator;
    TerminalSpec terminal;
    ControlSet controls;
};

struct ValidationItem {
    std::string check;
    bool pass;
    std::string witness;  // sample point where the check failed, empty on pass
};

struct ValidationReport {
    std::vector<ValidationItem> items;
    bool all_pass() const;
};

// Randomized audit of the declared invariants (growth bound, y-Lipschitz,
// terminal bound, band well-formedness). Failures are reported, never thrown.
ValidationReport validate_problem(const ProblemSpec& p, std::uint64_t seed = 42,
                                  int samples = 10000);

struct HamiltonianValue {
    double value;
    double argmax_a;
};

// sup over the control grid of { (1/2) a M - f(t,x,y,p,a) }, ties broken by the
// smallest grid point. Throws EvaluationError if f is non-finite at a sample.
HamiltonianValue conjugate_hamiltonian(const GeneratorSpec& gen, const ControlSet& controls,
                                       double t, double x, double y, double p, double M);

// Generator with z clipped to magnitude n (sign preserved); constants inherited.
GeneratorSpec truncate_generator(const GeneratorSpec& gen, double n);

// Generator evaluating to -f; constants inherited. The fully nonlinear PDE
// Hamiltonian sup_a { (1/2) a M + f } is conjugate_hamiltonian of the negation.
GeneratorSpec negate_generator(const GeneratorSpec& gen);

} // namespace q2b
