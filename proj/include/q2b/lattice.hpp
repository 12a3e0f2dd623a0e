#pragma once

#include <functional>
#include <vector>

#include "q2b/model.hpp"

namespace q2b {

// Uniform trinomial lattice for the canonical process, nodes x_j = x0 + j dx,
// j in {-J, ..., J}. The boundary reflects: outward mass folds back onto the
// boundary node.
struct Lattice {
    int n_steps = 0;      // N
    double dt = 0.0;      // T / N
    double dx = 0.0;
    int half_width = 0;   // J
    double x0 = 0.0;
    double a_low = 0.0;   // band copied from the problem's control set
    double a_high = 0.0;

    int node_count() const { return 2 * half_width + 1; }
    double x(int j) const { return x0 + j * dx; }
    int index(int j) const { return j + half_width; }          // j -> vector index
    int j_of(int i) const { return i - half_width; }
    int up(int j) const { return j < half_width ? j + 1 : half_width; }
    int down(int j) const { return j > -half_width ? j - 1 : -half_width; }
    double time(int n) const { return n * dt; }
    double cfl_ratio(double a) const { return a * dt / (dx * dx); }
};

struct TransitionKernel {
    double a = 0.0;
    double p_plus = 0.0;
    double p_zero = 0.0;
    double p_minus = 0.0;
};

// Markov control field a(n, j), values in the band.
using Policy = std::function<double(int n, int j)>;

inline Policy constant_policy(double a) {
    return [a](int, int) { return a; };
}

// dt = T/N; dx = sqrt(a_high dt), nudged up by the smallest factor that keeps
// the CFL ratio <= 1 in floating point; J covers stddev_mult standard
// deviations at the top of the band.
Lattice build_lattice(const ProblemSpec& p, int n_steps, double stddev_mult = 4.0);

// Throws DomainError when a is outside [a_low, a_high].
TransitionKernel kernel_for(const Lattice& lat, double a);

// One forward Kolmogorov step of `dist` under the policy at step n.
std::vector<double> push_forward(const Lattice& lat, const std::vector<double>& dist,
                                 const Policy& policy, int n);

// Marginal law of the chain at step N started from x0 under the policy.
std::vector<double> terminal_distribution(const Lattice& lat, const Policy& policy);

} // namespace q2b
