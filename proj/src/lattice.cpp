#include "q2b/lattice.hpp"

#include <cmath>
#include <limits>

#include "q2b/errors.hpp"

namespace q2b {

Lattice build_lattice(const ProblemSpec& p, int n_steps, double stddev_mult) {
    if (n_steps < 1) throw ConfigError("build_lattice: N must be >= 1");
    if (!p.controls.valid()) throw ConfigError("build_lattice: invalid control band");

    Lattice lat;
    lat.n_steps = n_steps;
    lat.dt = p.horizon / n_steps;
    lat.x0 = p.x0;
    lat.a_low = p.controls.a_low;
    lat.a_high = p.controls.a_high;

    double dx = std::sqrt(lat.a_high * lat.dt);
    if (!(dx > 1e-300) || !std::isfinite(dx))
        throw ConfigError("build_lattice: dx underflow, N too large");
    // Rounding in sqrt can leave dx^2 one ulp short of a_high*dt; nudge up.
    while (lat.a_high * lat.dt > dx * dx)
        dx = std::nextafter(dx, std::numeric_limits<double>::infinity());
    lat.dx = dx;

    const double width = stddev_mult * std::sqrt(lat.a_high * p.horizon);
    const int J = static_cast<int>(std::ceil(width / dx * (1.0 - 1e-13)));
    if (J < 1 || J > 20'000'000) throw ConfigError("build_lattice: half-width out of range");
    lat.half_width = J;
    return lat;
}

TransitionKernel kernel_for(const Lattice& lat, double a) {
    if (!(a >= lat.a_low && a <= lat.a_high))
        throw DomainError("kernel_for: a=" + std::to_string(a) + " outside band [" +
                          std::to_string(lat.a_low) + ", " + std::to_string(lat.a_high) + "]");
    TransitionKernel k;
    k.a = a;
    k.p_plus = a * lat.dt / (2.0 * lat.dx * lat.dx);
    k.p_minus = k.p_plus;
    k.p_zero = 1.0 - a * lat.dt / (lat.dx * lat.dx);
    return k;
}

std::vector<double> push_forward(const Lattice& lat, const std::vector<double>& dist,
                                 const Policy& policy, int n) {
    const int M = lat.node_count();
    std::vector<double> next(static_cast<std::size_t>(M), 0.0);
    for (int i = 0; i < M; ++i) {
        const double mass = dist[static_cast<std::size_t>(i)];
        if (mass == 0.0) continue;
        const int j = lat.j_of(i);
        const TransitionKernel k = kernel_for(lat, policy(n, j));
        next[static_cast<std::size_t>(lat.index(lat.up(j)))] += mass * k.p_plus;
        next[static_cast<std::size_t>(i)] += mass * k.p_zero;
        next[static_cast<std::size_t>(lat.index(lat.down(j)))] += mass * k.p_minus;
    }
    return next;
}

std::vector<double> terminal_distribution(const Lattice& lat, const Policy& policy) {
    std::vector<double> dist(static_cast<std::size_t>(lat.node_count()), 0.0);
    dist[static_cast<std::size_t>(lat.index(0))] = 1.0;
    for (int n = 0; n < lat.n_steps; ++n) dist = push_forward(lat, dist, policy, n);
    return dist;
}

} // namespace q2b
