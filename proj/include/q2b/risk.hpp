#pragma once

#include <vector>

#include "q2b/twobsde.hpp"

namespace q2b {

// Robust risk-sensitive control problem: drift control u on a finite set U,
// exponential-of-integral reward with sensitivity theta, worst case over the
// volatility band.
struct RiskSensitiveSpec {
    double theta = 1.0;
    std::vector<double> controls_u;                       // the compact U
    std::function<double(double t, double x, double u)> g_drift;
    std::function<double(double t, double x, double u)> h_cost;
    double g_bound = 0.0;  // declared sup |g_drift|
    double h_bound = 0.0;  // declared sup |h_cost|
    TerminalSpec psi;
};

ValidationReport validate_risk_spec(const RiskSensitiveSpec& rs, const ProblemSpec& p,
                                    std::uint64_t seed = 42, int samples = 10000);

// Quasi-sure entropic risk of the terminal functional xi(B_T):
// (1/gamma) log of the worst-case expectation of exp(-gamma xi). The problem's
// generator must be purely quadratic (it supplies gamma).
double entropic_risk(const ProblemSpec& p, const Lattice& lat);

// u-policy field over (step, node), values in controls_u.
using UPolicy = std::function<double(int n, int j)>;

inline UPolicy constant_u_policy(double u) {
    return [u](int, int) { return u; };
}

struct FixedControlResult {
    TwoBsdeSolution sol;
    double y0 = 0.0;
    double J = 0.0;  // exp(theta * y0)
};

// Value of a fixed drift control: worst-case solve with generator
// z g(t,x,u) + h(t,x,u) + (theta/2) a z^2, u resolved per node.
FixedControlResult evaluate_fixed_control(const RiskSensitiveSpec& rs, const UPolicy& u_policy,
                                          const ProblemSpec& p, const Lattice& lat,
                                          double tol = 1e-12, int kmax = 200);

// Cross-check realization of the same measure change: the drift is moved from
// the generator into tilted transition probabilities p_pm +- g dt/(2 dx).
// Throws DomainError when the tilt would make a probability negative.
FixedControlResult evaluate_fixed_control_tilted(const RiskSensitiveSpec& rs,
                                                 const UPolicy& u_policy,
                                                 const ProblemSpec& p, const Lattice& lat,
                                                 double tol = 1e-12, int kmax = 200);

struct RiskSensitiveSolution {
    TwoBsdeSolution sol;     // value field with the maximized generator
    Field ustar;             // N x M feedback drift policy
    double y0 = 0.0;
    double J = 0.0;
};

// Feedback optimum: innermost max of z g + h over u (smallest-index ties),
// outer max over the band.
RiskSensitiveSolution solve_risk_sensitive(const RiskSensitiveSpec& rs, const ProblemSpec& p,
                                           const Lattice& lat, double tol = 1e-12,
                                           int kmax = 200);

} // namespace q2b
