#pragma once

#include <vector>

#include "q2b/twobsde.hpp"

namespace q2b {

// Explicit monotone finite-difference solution of the fully nonlinear PDE
//   dv/dt + sup_a { (1/2) a D2v + f(t, x, v, Dv, a) } = 0,  v(T, x) = g(x),
// on its own uniform grid, independent of the trinomial lattice.
struct PdeSolution {
    int n_steps = 0;       // time steps
    double dt = 0.0;       // effective dt (T / n_steps <= requested dt)
    double dx = 0.0;
    int half_width = 0;    // space nodes i in {-I, ..., I}
    double x0 = 0.0;
    Field v;               // (n_steps+1) x (2I+1)
    double cfl_ratio = 0.0;          // a_high dt / dx^2
    int max_argmax_switches = 0;     // max over steps of argmax changes across space
    bool non_affine_in_a = false;    // grid sup may differ from the band sup

    int node_count() const { return 2 * half_width + 1; }
    double x(int i) const { return x0 + i * dx; }
    double time(int n) const { return n * dt; }
    double value_at_origin() const {
        return v.front()[static_cast<std::size_t>(half_width)];
    }
    // Piecewise-linear interpolation of the t = time(n) slice.
    double interpolate(int n, double xq) const;
};

// Throws ConfigError before any computation when a_high dt / dx^2 > 1.
PdeSolution solve_fnpde(const ProblemSpec& p, double dt_p, double dx_p,
                        double stddev_mult = 4.0);

struct FkReport {
    std::vector<double> grid;        // control values probed
    std::vector<double> min_k;       // per control: min over samples of the FK density
    std::vector<double> max_k;
    double max_abs_residual = 0.0;   // max |dv/dt + h|
    double min_k_overall = 0.0;
    bool k_nonneg = false;           // min_k_overall >= -tol
};

// Probes a candidate classical solution v(t, x) with central finite
// differences: reports the PDE residual and the Feynman-Kac density
// k(a) = h(t,x,v,Dv,D2v) - (1/2) a D2v - f(t,x,v,Dv,a), which must be >= 0
// for the K-increments to be non-decreasing. Report only, nothing throws.
FkReport feynman_kac_residual(const ProblemSpec& p,
                              const std::function<double(double, double)>& v_candidate,
                              int t_samples = 21, int x_samples = 41,
                              double fd_h = 1e-3, double tol = 1e-7);

struct CrossValReport {
    double v_lattice0 = 0.0;
    double v_pde0 = 0.0;
    double diff0 = 0.0;              // |v_lattice0 - v_pde0|
    double nodewise_max_diff = 0.0;  // t = 0 slice over the common range (informational)
    double tol = 0.0;
    bool pass = false;
};

// Runs the two structurally different discretizations and compares the values
// at (0, x0). Default tolerance 0.02 (1 + terminal bound).
CrossValReport cross_validate(const ProblemSpec& p, const Lattice& lat, double pde_dt,
                              double pde_dx, double tol_xv = -1.0);

} // namespace q2b
