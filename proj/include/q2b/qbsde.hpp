#pragma once

#include <vector>

#include "q2b/lattice.hpp"
#include "q2b/model.hpp"

namespace q2b {

// Node-indexed field, outer index = time step, inner index = lattice node.
using Field = std::vector<std::vector<double>>;

struct BsdeSolution {
    Field y;                                   // (N+1) x M, y[N] = terminal
    Field z;                                   // N x M
    std::vector<std::vector<int>> picard_iterations;  // N x M
    double max_residual = 0.0;

    double value_at_origin(const Lattice& lat) const {
        return y.front()[static_cast<std::size_t>(lat.index(0))];
    }
};

struct StepResult {
    std::vector<double> y;
    std::vector<double> z;
    std::vector<int> iterations;
    double max_residual = 0.0;
};

// One backward step under a single measure a: conditional mean plus Picard
// iteration on y = m1 + dt f(t, x, y, z, a), with z extracted as the discrete
// covariation E[v dB] / (a dt) (central difference in the interior, one-sided
// at the reflecting boundary).
StepResult bsde_step(const std::vector<double>& values_next, const Lattice& lat,
                     const GeneratorSpec& gen, double a, double t, double tol, int kmax,
                     int step_index = -1);

// Backward induction under a Markov policy. Generators flagged purely quadratic
// are solved through the exponential transform, which solves each step exactly.
BsdeSolution solve_bsde(const ProblemSpec& p, const Lattice& lat, const Policy& policy,
                        double tol = 1e-12, int kmax = 200);

// Value field of the purely quadratic equation by the exponential change of
// variables: linear backward expectation of exp(sign * gamma * g), then
// (1/gamma) log. `sup_over_band` switches on the per-step max over the control
// grid (the worst-case / 2BSDE variant); otherwise `policy` fixes the measure.
Field solve_purely_quadratic(const ProblemSpec& p, const Lattice& lat, const Policy& policy,
                             int sign = +1, bool sup_over_band = false);

// z extracted from a value field for one control (recomputable on demand).
std::vector<double> extract_z(const std::vector<double>& values_next, const Lattice& lat,
                              double a);

} // namespace q2b
