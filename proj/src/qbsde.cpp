#include "q2b/qbsde.hpp"

#include <algorithm>
#include <cmath>

#include "q2b/errors.hpp"

namespace q2b {

std::vector<double> extract_z(const std::vector<double>& v, const Lattice& lat, double a) {
    const int M = lat.node_count();
    const int J = lat.half_width;
    const TransitionKernel k = kernel_for(lat, a);
    std::vector<double> z(static_cast<std::size_t>(M), 0.0);
    for (int i = 0; i < M; ++i) {
        const int j = lat.j_of(i);
        if (j == J) {
            z[static_cast<std::size_t>(i)] = (v[static_cast<std::size_t>(i)] -
                                              v[static_cast<std::size_t>(i - 1)]) / lat.dx;
        } else if (j == -J) {
            z[static_cast<std::size_t>(i)] = (v[static_cast<std::size_t>(i + 1)] -
                                              v[static_cast<std::size_t>(i)]) / lat.dx;
        } else {
            // E[v dB] / (a dt); reduces to the central difference here.
            z[static_cast<std::size_t>(i)] =
                (k.p_plus * v[static_cast<std::size_t>(i + 1)] -
                 k.p_minus * v[static_cast<std::size_t>(i - 1)]) * lat.dx / (a * lat.dt);
        }
    }
    return z;
}

StepResult bsde_step(const std::vector<double>& values_next, const Lattice& lat,
                     const GeneratorSpec& gen, double a, double t, double tol, int kmax,
                     int step_index) {
    const int M = lat.node_count();
    const TransitionKernel k = kernel_for(lat, a);
    StepResult out;
    out.y.resize(static_cast<std::size_t>(M));
    out.z = extract_z(values_next, lat, a);
    out.iterations.assign(static_cast<std::size_t>(M), 0);

    for (int i = 0; i < M; ++i) {
        const int j = lat.j_of(i);
        const double vu = values_next[static_cast<std::size_t>(lat.index(lat.up(j)))];
        const double vm = values_next[static_cast<std::size_t>(i)];
        const double vd = values_next[static_cast<std::size_t>(lat.index(lat.down(j)))];
        const double m1 = k.p_plus * vu + k.p_zero * vm + k.p_minus * vd;
        const double zj = out.z[static_cast<std::size_t>(i)];
        const double xj = lat.x(j);

        double y = m1;
        double res = 0.0;
        int it = 0;
        bool converged = false;
        for (it = 1; it <= kmax; ++it) {
            const double yn = m1 + lat.dt * gen.f(t, xj, y, zj, a);
            res = std::abs(yn - y);
            y = yn;
            if (res < tol) { converged = true; break; }
        }
        if (!converged) throw ConvergenceError(step_index, j, res);
        out.y[static_cast<std::size_t>(i)] = y;
        out.iterations[static_cast<std::size_t>(i)] = it;
        out.max_residual = std::max(out.max_residual, res);
    }
    return out;
}

namespace {

// Shared exponential-transform recursion. Returns the y field (1/gamma) log w
// where w follows the linear backward expectation, maximized over the control
// grid when sup_over_band is set. The w recursion is kept on the exponential
// scale so that the per-step max and the tower property are exact.
Field transform_recursion(const ProblemSpec& p, const Lattice& lat, const Policy& policy,
                          double gamma, int sign, bool sup_over_band,
                          Field* z_out) {
    const int M = lat.node_count();
    const int N = lat.n_steps;
    if (gamma * p.terminal.bound > 700.0)
        throw RangeError("exponential transform overflows: gamma * terminal bound = " +
                         std::to_string(gamma * p.terminal.bound) +
                         " > 700; rescale the terminal condition or gamma");

    std::vector<TransitionKernel> kernels;
    kernels.reserve(p.controls.grid.size());
    for (double a : p.controls.grid) kernels.push_back(kernel_for(lat, a));

    Field y(static_cast<std::size_t>(N + 1),
            std::vector<double>(static_cast<std::size_t>(M), 0.0));
    if (z_out)
        z_out->assign(static_cast<std::size_t>(N),
                      std::vector<double>(static_cast<std::size_t>(M), 0.0));

    std::vector<double> w(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        const double g = p.terminal.g(lat.x(lat.j_of(i)));
        y[static_cast<std::size_t>(N)][static_cast<std::size_t>(i)] = sign * g;
        w[static_cast<std::size_t>(i)] = std::exp(sign * gamma * g);
    }

    std::vector<double> wn(static_cast<std::size_t>(M));
    for (int n = N - 1; n >= 0; --n) {
        for (int i = 0; i < M; ++i) {
            const int j = lat.j_of(i);
            const int iu = lat.index(lat.up(j));
            const int id = lat.index(lat.down(j));
            double best = -std::numeric_limits<double>::infinity();
            if (sup_over_band) {
                for (const TransitionKernel& k : kernels) {
                    const double e = k.p_plus * w[static_cast<std::size_t>(iu)] +
                                     k.p_zero * w[static_cast<std::size_t>(i)] +
                                     k.p_minus * w[static_cast<std::size_t>(id)];
                    if (e > best) best = e;
                }
            } else {
                const TransitionKernel k = kernel_for(lat, policy(n, j));
                best = k.p_plus * w[static_cast<std::size_t>(iu)] +
                       k.p_zero * w[static_cast<std::size_t>(i)] +
                       k.p_minus * w[static_cast<std::size_t>(id)];
            }
            wn[static_cast<std::size_t>(i)] = best;
            y[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                std::log(best) / gamma;
        }
        if (z_out) {
            // z from the y-scale values of the next level; a-independent in the
            // interior, so use the top-of-band kernel for the covariation.
            (*z_out)[static_cast<std::size_t>(n)] =
                extract_z(y[static_cast<std::size_t>(n + 1)], lat, lat.a_high);
        }
        w.swap(wn);
    }
    return y;
}

} // namespace

BsdeSolution solve_bsde(const ProblemSpec& p, const Lattice& lat, const Policy& policy,
                        double tol, int kmax) {
    const int M = lat.node_count();
    const int N = lat.n_steps;
    BsdeSolution sol;

    if (p.generator.pure_quadratic_gamma) {
        sol.y = transform_recursion(p, lat, policy, *p.generator.pure_quadratic_gamma,
                                    +1, false, &sol.z);
        sol.picard_iterations.assign(static_cast<std::size_t>(N),
                                     std::vector<int>(static_cast<std::size_t>(M), 1));
        sol.max_residual = 0.0;
        return sol;
    }

    sol.y.assign(static_cast<std::size_t>(N + 1),
                 std::vector<double>(static_cast<std::size_t>(M), 0.0));
    sol.z.assign(static_cast<std::size_t>(N),
                 std::vector<double>(static_cast<std::size_t>(M), 0.0));
    sol.picard_iterations.assign(static_cast<std::size_t>(N),
                                 std::vector<int>(static_cast<std::size_t>(M), 0));
    for (int i = 0; i < M; ++i)
        sol.y[static_cast<std::size_t>(N)][static_cast<std::size_t>(i)] =
            p.terminal.g(lat.x(lat.j_of(i)));

    for (int n = N - 1; n >= 0; --n) {
        const std::vector<double>& vnext = sol.y[static_cast<std::size_t>(n + 1)];
        const double t = lat.time(n);
        // Node-dependent policies get a kernel per node; constant policies hit
        // the single-a fast case below.
        bool constant_a = true;
        const double a0 = policy(n, -lat.half_width);
        for (int j = -lat.half_width + 1; j <= lat.half_width && constant_a; ++j)
            constant_a = (policy(n, j) == a0);
        if (constant_a) {
            StepResult step = bsde_step(vnext, lat, p.generator, a0, t, tol, kmax, n);
            sol.y[static_cast<std::size_t>(n)] = std::move(step.y);
            sol.z[static_cast<std::size_t>(n)] = std::move(step.z);
            sol.picard_iterations[static_cast<std::size_t>(n)] = std::move(step.iterations);
            sol.max_residual = std::max(sol.max_residual, step.max_residual);
        } else {
            for (int i = 0; i < M; ++i) {
                const int j = lat.j_of(i);
                StepResult step = bsde_step(vnext, lat, p.generator, policy(n, j), t, tol,
                                            kmax, n);
                sol.y[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                    step.y[static_cast<std::size_t>(i)];
                sol.z[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                    step.z[static_cast<std::size_t>(i)];
                sol.picard_iterations[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                    step.iterations[static_cast<std::size_t>(i)];
                sol.max_residual = std::max(sol.max_residual, step.max_residual);
            }
        }
    }
    return sol;
}

Field solve_purely_quadratic(const ProblemSpec& p, const Lattice& lat, const Policy& policy,
                             int sign, bool sup_over_band) {
    if (!p.generator.pure_quadratic_gamma)
        throw DomainError("solve_purely_quadratic: generator is not purely quadratic");
    return transform_recursion(p, lat, policy, *p.generator.pure_quadratic_gamma, sign,
                               sup_over_band, nullptr);
}

} // namespace q2b
