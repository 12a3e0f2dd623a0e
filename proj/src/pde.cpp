#include "q2b/pde.hpp"

#include <algorithm>
#include <cmath>

#include "q2b/errors.hpp"

namespace q2b {

namespace {

// The band sup is taken over the finite grid; exact when f is affine in a.
// Probe the midpoint against the chord at a few sample points.
bool probe_non_affine(const ProblemSpec& p) {
    const ControlSet& c = p.controls;
    if (c.grid.size() < 2 || c.a_high == c.a_low) return false;
    const double am = 0.5 * (c.a_low + c.a_high);
    const double pts[][4] = {{0.0, 0.0, 0.0, 0.0},
                             {0.3 * p.horizon, 0.7, 0.2, 1.3},
                             {0.9 * p.horizon, -1.1, -0.4, -0.8}};
    for (const auto& q : pts) {
        const double lo = p.generator.f(q[0], q[1], q[2], q[3], c.a_low);
        const double hi = p.generator.f(q[0], q[1], q[2], q[3], c.a_high);
        const double mid = p.generator.f(q[0], q[1], q[2], q[3], am);
        if (std::abs(mid - 0.5 * (lo + hi)) > 1e-9 * (1.0 + std::abs(hi) + std::abs(lo)))
            return true;
    }
    return false;
}

} // namespace

double PdeSolution::interpolate(int n, double xq) const {
    const std::vector<double>& row = v[static_cast<std::size_t>(n)];
    const double s = (xq - x(-half_width)) / dx;
    const int i0 = std::clamp(static_cast<int>(std::floor(s)), 0, node_count() - 2);
    const double w = s - i0;
    return (1.0 - w) * row[static_cast<std::size_t>(i0)] +
           w * row[static_cast<std::size_t>(i0 + 1)];
}

PdeSolution solve_fnpde(const ProblemSpec& p, double dt_p, double dx_p, double stddev_mult) {
    if (dt_p <= 0.0 || dx_p <= 0.0)
        throw ConfigError("solve_fnpde: dt and dx must be positive");
    if (p.controls.a_high * dt_p / (dx_p * dx_p) > 1.0)
        throw ConfigError("solve_fnpde: scheme not monotone, a_high dt/dx^2 = " +
                          std::to_string(p.controls.a_high * dt_p / (dx_p * dx_p)) + " > 1");

    PdeSolution sol;
    sol.n_steps = std::max(1, static_cast<int>(std::ceil(p.horizon / dt_p - 1e-12)));
    sol.dt = p.horizon / sol.n_steps;
    sol.dx = dx_p;
    sol.half_width = std::max(
        2, static_cast<int>(std::ceil(stddev_mult *
                                      std::sqrt(p.controls.a_high * p.horizon) / dx_p)));
    sol.x0 = p.x0;
    sol.cfl_ratio = p.controls.a_high * sol.dt / (sol.dx * sol.dx);
    sol.non_affine_in_a = probe_non_affine(p);

    const int M = sol.node_count();
    const int I = sol.half_width;
    const GeneratorSpec neg = negate_generator(p.generator);

    sol.v.assign(static_cast<std::size_t>(sol.n_steps + 1),
                 std::vector<double>(static_cast<std::size_t>(M), 0.0));
    for (int i = 0; i < M; ++i)
        sol.v[static_cast<std::size_t>(sol.n_steps)][static_cast<std::size_t>(i)] =
            p.terminal.g(sol.x(i - I));

    std::vector<double> argmax(static_cast<std::size_t>(M), 0.0);
    for (int n = sol.n_steps - 1; n >= 0; --n) {
        const std::vector<double>& vn = sol.v[static_cast<std::size_t>(n + 1)];
        std::vector<double>& vm = sol.v[static_cast<std::size_t>(n)];
        const double t = sol.time(n + 1);
        int switches = 0;
        for (int i = 0; i < M; ++i) {
            const double xi = sol.x(i - I);
            double d1, d2;
            if (i == 0) {
                d1 = (vn[1] - vn[0]) / sol.dx;
                d2 = (vn[0] - 2.0 * vn[1] + vn[2]) / (sol.dx * sol.dx);
            } else if (i == M - 1) {
                d1 = (vn[static_cast<std::size_t>(i)] - vn[static_cast<std::size_t>(i - 1)]) /
                     sol.dx;
                d2 = (vn[static_cast<std::size_t>(i)] -
                      2.0 * vn[static_cast<std::size_t>(i - 1)] +
                      vn[static_cast<std::size_t>(i - 2)]) / (sol.dx * sol.dx);
            } else {
                d1 = (vn[static_cast<std::size_t>(i + 1)] -
                      vn[static_cast<std::size_t>(i - 1)]) / (2.0 * sol.dx);
                d2 = (vn[static_cast<std::size_t>(i + 1)] -
                      2.0 * vn[static_cast<std::size_t>(i)] +
                      vn[static_cast<std::size_t>(i - 1)]) / (sol.dx * sol.dx);
            }
            // sup_a { (1/2) a d2 + f } via the conjugate of the negated driver.
            const HamiltonianValue h = conjugate_hamiltonian(
                neg, p.controls, t, xi, vn[static_cast<std::size_t>(i)], d1, d2);
            vm[static_cast<std::size_t>(i)] = vn[static_cast<std::size_t>(i)] + sol.dt * h.value;
            if (i > 0 && h.argmax_a != argmax[static_cast<std::size_t>(i - 1)]) ++switches;
            argmax[static_cast<std::size_t>(i)] = h.argmax_a;
        }
        sol.max_argmax_switches = std::max(sol.max_argmax_switches, switches);
    }
    return sol;
}

FkReport feynman_kac_residual(const ProblemSpec& p,
                              const std::function<double(double, double)>& v_candidate,
                              int t_samples, int x_samples, double fd_h, double tol) {
    FkReport rep;
    rep.grid = p.controls.grid;
    rep.min_k.assign(rep.grid.size(), std::numeric_limits<double>::infinity());
    rep.max_k.assign(rep.grid.size(), -std::numeric_limits<double>::infinity());
    const GeneratorSpec neg = negate_generator(p.generator);
    const double x_range = std::abs(p.x0) + 4.0 * std::sqrt(p.controls.a_high * p.horizon);
    const double h = fd_h;

    for (int it = 0; it < t_samples; ++it) {
        // Keep t in [h, T-h] so the central time difference stays in-domain.
        const double t = h + (p.horizon - 2.0 * h) *
                                 (t_samples == 1 ? 0.5 : double(it) / (t_samples - 1));
        for (int ix = 0; ix < x_samples; ++ix) {
            const double x = -x_range + 2.0 * x_range *
                                            (x_samples == 1 ? 0.5 : double(ix) / (x_samples - 1));
            const double v = v_candidate(t, x);
            const double vt = (v_candidate(t + h, x) - v_candidate(t - h, x)) / (2.0 * h);
            const double d1 = (v_candidate(t, x + h) - v_candidate(t, x - h)) / (2.0 * h);
            const double d2 =
                (v_candidate(t, x + h) - 2.0 * v + v_candidate(t, x - h)) / (h * h);
            const HamiltonianValue ham =
                conjugate_hamiltonian(neg, p.controls, t, x, v, d1, d2);
            rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(vt + ham.value));
            for (std::size_t gi = 0; gi < rep.grid.size(); ++gi) {
                const double a = rep.grid[gi];
                const double k = ham.value - 0.5 * a * d2 + p.generator.f(t, x, v, d1, a);
                rep.min_k[gi] = std::min(rep.min_k[gi], k);
                rep.max_k[gi] = std::max(rep.max_k[gi], k);
            }
        }
    }
    rep.min_k_overall = *std::min_element(rep.min_k.begin(), rep.min_k.end());
    rep.k_nonneg = rep.min_k_overall >= -tol;
    return rep;
}

CrossValReport cross_validate(const ProblemSpec& p, const Lattice& lat, double pde_dt,
                              double pde_dx, double tol_xv) {
    CrossValReport rep;
    rep.tol = tol_xv > 0.0 ? tol_xv : 0.02 * (1.0 + p.terminal.bound);

    const TwoBsdeSolution dp = solve_2bsde(p, lat);
    const PdeSolution fd = solve_fnpde(p, pde_dt, pde_dx);
    rep.v_lattice0 = dp.value_at_origin(lat);
    rep.v_pde0 = fd.value_at_origin();
    rep.diff0 = std::abs(rep.v_lattice0 - rep.v_pde0);

    const double lo = fd.x(-fd.half_width), hi = fd.x(fd.half_width);
    for (int i = 0; i < lat.node_count(); ++i) {
        const double xj = lat.x(lat.j_of(i));
        if (xj < lo || xj > hi) continue;
        rep.nodewise_max_diff =
            std::max(rep.nodewise_max_diff,
                     std::abs(dp.v.front()[static_cast<std::size_t>(i)] - fd.interpolate(0, xj)));
    }
    rep.pass = rep.diff0 <= rep.tol;
    return rep;
}

} // namespace q2b
