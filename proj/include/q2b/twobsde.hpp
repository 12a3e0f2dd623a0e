#pragma once

#include <optional>
#include <vector>

#include "q2b/qbsde.hpp"

namespace q2b {

struct TwoBsdeSolution {
    Field v;                          // (N+1) x M value field
    Field z;                          // N x M, z of the argmax control
    Field astar;                      // N x M, argmax control values
    std::vector<Field> per_control_k; // grid.size() fields of one-step K-increments, N x M
    double min_gap = 0.0;             // output of min_condition_gap

    double value_at_origin(const Lattice& lat) const {
        return v.front()[static_cast<std::size_t>(lat.index(0))];
    }
};

// Generator resolved at lattice coordinates; used where the driver depends on
// the step/node directly (e.g. Markov control fields).
using NodeGenerator = std::function<double(int n, int j, double y, double z, double a)>;

// Dynamic programming core: v(n,j) = max over the control grid of the one-step
// backward value, argmax ties to the smallest grid index. Exposed for solvers
// that build their generator per node (risk module).
TwoBsdeSolution solve_2bsde_nodes(const Lattice& lat, const ControlSet& controls,
                                  const NodeGenerator& f,
                                  const std::vector<double>& terminal_values,
                                  double tol, int kmax);

// Worst-case value process over the volatility band, with per-measure
// K-increments and the minimum-condition gap.
TwoBsdeSolution solve_2bsde(const ProblemSpec& p, const Lattice& lat, double tol = 1e-12,
                            int kmax = 200);

struct RepresentationReport {
    std::vector<double> controls;         // grid
    std::vector<double> constant_values;  // y^a(0, x0) per constant control
    double best_constant = 0.0;
    double v0 = 0.0;
    double gap = 0.0;                     // max_a y^a(0,x0) - v0, <= 0 expected
    bool astar_constant = false;
    bool pass = false;
};

// Solves the single-measure equation for every constant control and checks the
// worst-case value dominates each of them (with equality at the best constant
// control when the argmax field is constant).
RepresentationReport representation_check(const TwoBsdeSolution& sol, const ProblemSpec& p,
                                          const Lattice& lat, double tol = 1e-9);

// Second dynamic program threading the cheapest K-path; the argmax control has
// zero increments, so the result is a structural zero up to solver noise.
double min_condition_gap(const TwoBsdeSolution& sol, const ProblemSpec& p,
                         const Lattice& lat);

// E[K_T] under the given Markov policy (policy values must lie on the grid).
double expected_k(const TwoBsdeSolution& sol, const ProblemSpec& p, const Lattice& lat,
                  const Policy& policy);

struct StationarityReport {
    std::vector<double> n_values;
    std::vector<double> v0_values;
    std::optional<double> n_star;    // first n after which values are bitwise-stable
    double sup_z_untruncated = 0.0;  // max |z| of the untruncated solution
};

// Solves with the generator truncated at each n in n_list (increasing) and
// locates the stationarity threshold.
StationarityReport stationarity_experiment(const ProblemSpec& p, const Lattice& lat,
                                           const std::vector<double>& n_list,
                                           double tol = 1e-12, int kmax = 200);

} // namespace q2b
