#pragma once

#include <string>
#include <vector>

#include "q2b/twobsde.hpp"

namespace q2b {

struct CheckResult {
    std::string check;
    std::string parameters;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

// Discrete BMO norm (squared-norm convention): sup over nodes reachable with
// positive probability of E_{(n,j)}[ sum_{m >= n} a z^2 dt ] under the policy.
// Conditioning runs over deterministic times only, so this is a lower bound
// for the sup over stopping times; the theoretical bounds must still
// dominate it.
double bmo_norm(const Field& z, const ProblemSpec& p, const Lattice& lat,
                const Policy& policy);

// Energy inequality E[(sum a z^2 dt)^p] <= 2 p! (4 B)^p with B the measured
// BMO norm. lhs by an exact backward moment recursion along the chain.
CheckResult energy_inequality_check(const Field& z, const ProblemSpec& p, const Lattice& lat,
                                    const Policy& policy, int p_exp);

// |y| <= alpha (e^{beta T} - 1)/beta + e^{beta T} ||xi|| (beta -> 0 limit
// alpha T + ||xi||), checked against the nodewise sup of the value field.
CheckResult apriori_check(const Field& v, const ProblemSpec& p);

// E_tau[int |a^{1/2} Z|^2] <= (1/gamma) e^{4 gamma ||Y||} (1 + 2 gamma T
// (alpha + beta ||Y||)) with ||Y|| the measured sup |v|.
CheckResult z_bmo_bound_check(const Field& v, const Field& z, const ProblemSpec& p,
                              const Lattice& lat, const Policy& policy);

// r-th moment of the discrete stochastic exponential of int z dB under the
// policy, by backward recursion; the folded boundary branch carries dB = 0.
double doleans_moment_probe(const Field& z, const ProblemSpec& p, const Lattice& lat,
                            const Policy& policy, double r);

struct BmoReport {
    double bmo_norm_sq = 0.0;                              // under the argmax policy
    std::vector<std::pair<std::string, double>> per_measure;
    std::vector<CheckResult> energy_checks;                // p = 1, 2
    std::vector<std::pair<double, double>> doleans_moments; // (r, estimate)
    CheckResult apriori;
    CheckResult z_bmo;
};

// Runs the full battery on a worst-case solution.
BmoReport diagnostics_report(const TwoBsdeSolution& sol, const ProblemSpec& p,
                             const Lattice& lat);

} // namespace q2b
