#include "q2b/twobsde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "q2b/errors.hpp"

namespace q2b {

namespace {

std::size_t grid_index_of(const ControlSet& controls, double a) {
    for (std::size_t gi = 0; gi < controls.grid.size(); ++gi)
        if (std::abs(controls.grid[gi] - a) <= 1e-12 * std::max(1.0, std::abs(a)))
            return gi;
    throw DomainError("policy value " + std::to_string(a) + " is not on the control grid");
}

std::vector<double> terminal_values_on(const ProblemSpec& p, const Lattice& lat) {
    std::vector<double> g(static_cast<std::size_t>(lat.node_count()));
    for (int i = 0; i < lat.node_count(); ++i)
        g[static_cast<std::size_t>(i)] = p.terminal.g(lat.x(lat.j_of(i)));
    return g;
}

// Worst-case value of the purely quadratic equation through the exponential
// change of variables; each backward step is solved exactly on the
// exponential scale, so the per-control increments come out non-negative by
// construction.
TwoBsdeSolution solve_2bsde_pure(const ProblemSpec& p, const Lattice& lat, double gamma) {
    const int M = lat.node_count();
    const int N = lat.n_steps;
    const std::size_t n_controls = p.controls.grid.size();
    if (gamma * p.terminal.bound > 700.0)
        throw RangeError("exponential transform overflows: gamma * terminal bound = " +
                         std::to_string(gamma * p.terminal.bound) + " > 700; rescale");

    std::vector<TransitionKernel> kernels;
    kernels.reserve(n_controls);
    for (double a : p.controls.grid) kernels.push_back(kernel_for(lat, a));

    TwoBsdeSolution sol;
    sol.v.assign(static_cast<std::size_t>(N + 1),
                 std::vector<double>(static_cast<std::size_t>(M), 0.0));
    sol.z.assign(static_cast<std::size_t>(N),
                 std::vector<double>(static_cast<std::size_t>(M), 0.0));
    sol.astar.assign(static_cast<std::size_t>(N),
                     std::vector<double>(static_cast<std::size_t>(M), 0.0));
    sol.per_control_k.assign(n_controls,
                             Field(static_cast<std::size_t>(N),
                                   std::vector<double>(static_cast<std::size_t>(M), 0.0)));

    std::vector<double> w(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        const double g = p.terminal.g(lat.x(lat.j_of(i)));
        sol.v[static_cast<std::size_t>(N)][static_cast<std::size_t>(i)] = g;
        w[static_cast<std::size_t>(i)] = std::exp(gamma * g);
    }

    std::vector<double> wn(static_cast<std::size_t>(M));
    std::vector<double> wa(n_controls);
    for (int n = N - 1; n >= 0; --n) {
        for (int i = 0; i < M; ++i) {
            const int j = lat.j_of(i);
            const int iu = lat.index(lat.up(j));
            const int id = lat.index(lat.down(j));
            std::size_t best = 0;
            for (std::size_t gi = 0; gi < n_controls; ++gi) {
                const TransitionKernel& k = kernels[gi];
                wa[gi] = k.p_plus * w[static_cast<std::size_t>(iu)] +
                         k.p_zero * w[static_cast<std::size_t>(i)] +
                         k.p_minus * w[static_cast<std::size_t>(id)];
                if (wa[gi] > wa[best]) best = gi;
            }
            const double vbest = std::log(wa[best]) / gamma;
            wn[static_cast<std::size_t>(i)] = wa[best];
            sol.v[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] = vbest;
            sol.astar[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                p.controls.grid[best];
            for (std::size_t gi = 0; gi < n_controls; ++gi)
                sol.per_control_k[gi][static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                    gi == best ? 0.0 : vbest - std::log(wa[gi]) / gamma;
        }
        sol.z[static_cast<std::size_t>(n)] =
            extract_z(sol.v[static_cast<std::size_t>(n + 1)], lat, lat.a_high);
        w.swap(wn);
    }
    return sol;
}

} // namespace

TwoBsdeSolution solve_2bsde_nodes(const Lattice& lat, const ControlSet& controls,
                                  const NodeGenerator& f,
                                  const std::vector<double>& terminal_values,
                                  double tol, int kmax) {
    const int M = lat.node_count();
    const int N = lat.n_steps;
    const std::size_t n_controls = controls.grid.size();

    std::vector<TransitionKernel> kernels;
    kernels.reserve(n_controls);
    for (double a : controls.grid) kernels.push_back(kernel_for(lat, a));

    TwoBsdeSolution sol;
    sol.v.assign(static_cast<std::size_t>(N + 1),
                 std::vector<double>(static_cast<std::size_t>(M), 0.0));
    sol.z.assign(static_cast<std::size_t>(N),
                 std::vector<double>(static_cast<std::size_t>(M), 0.0));
    sol.astar.assign(static_cast<std::size_t>(N),
                     std::vector<double>(static_cast<std::size_t>(M), 0.0));
    sol.per_control_k.assign(n_controls,
                             Field(static_cast<std::size_t>(N),
                                   std::vector<double>(static_cast<std::size_t>(M), 0.0)));
    sol.v[static_cast<std::size_t>(N)] = terminal_values;

    std::vector<std::vector<double>> za(n_controls);
    std::vector<double> ya(n_controls);
    for (int n = N - 1; n >= 0; --n) {
        const std::vector<double>& vnext = sol.v[static_cast<std::size_t>(n + 1)];
        for (std::size_t gi = 0; gi < n_controls; ++gi)
            za[gi] = extract_z(vnext, lat, controls.grid[gi]);

        for (int i = 0; i < M; ++i) {
            const int j = lat.j_of(i);
            const int iu = lat.index(lat.up(j));
            const int id = lat.index(lat.down(j));
            std::size_t best = 0;
            for (std::size_t gi = 0; gi < n_controls; ++gi) {
                const TransitionKernel& k = kernels[gi];
                const double m1 = k.p_plus * vnext[static_cast<std::size_t>(iu)] +
                                  k.p_zero * vnext[static_cast<std::size_t>(i)] +
                                  k.p_minus * vnext[static_cast<std::size_t>(id)];
                const double zj = za[gi][static_cast<std::size_t>(i)];
                double y = m1;
                double res = 0.0;
                bool converged = false;
                for (int it = 1; it <= kmax; ++it) {
                    const double yn = m1 + lat.dt * f(n, j, y, zj, k.a);
                    res = std::abs(yn - y);
                    y = yn;
                    if (res < tol) { converged = true; break; }
                }
                if (!converged) throw ConvergenceError(n, j, res);
                ya[gi] = y;
                if (ya[gi] > ya[best]) best = gi;
            }
            const double vbest = ya[best];
            sol.v[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] = vbest;
            sol.astar[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                controls.grid[best];
            sol.z[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                za[best][static_cast<std::size_t>(i)];
            for (std::size_t gi = 0; gi < n_controls; ++gi)
                sol.per_control_k[gi][static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                    gi == best ? 0.0 : vbest - ya[gi];
        }
    }
    return sol;
}

TwoBsdeSolution solve_2bsde(const ProblemSpec& p, const Lattice& lat, double tol, int kmax) {
    TwoBsdeSolution sol;
    if (p.generator.pure_quadratic_gamma) {
        sol = solve_2bsde_pure(p, lat, *p.generator.pure_quadratic_gamma);
    } else {
        const GeneratorFn& f = p.generator.f;
        NodeGenerator node_f = [&lat, &f](int n, int j, double y, double z, double a) {
            return f(lat.time(n), lat.x(j), y, z, a);
        };
        sol = solve_2bsde_nodes(lat, p.controls, node_f, terminal_values_on(p, lat), tol,
                                kmax);
    }
    sol.min_gap = min_condition_gap(sol, p, lat);
    return sol;
}

RepresentationReport representation_check(const TwoBsdeSolution& sol, const ProblemSpec& p,
                                          const Lattice& lat, double tol) {
    RepresentationReport rep;
    rep.controls = p.controls.grid;
    rep.v0 = sol.value_at_origin(lat);
    rep.best_constant = -std::numeric_limits<double>::infinity();
    for (double a : p.controls.grid) {
        const BsdeSolution single = solve_bsde(p, lat, constant_policy(a));
        const double y0 = single.value_at_origin(lat);
        rep.constant_values.push_back(y0);
        rep.best_constant = std::max(rep.best_constant, y0);
    }
    rep.gap = rep.best_constant - rep.v0;

    rep.astar_constant = true;
    const double a00 = sol.astar.front().front();
    for (const auto& row : sol.astar)
        for (double a : row)
            if (a != a00) { rep.astar_constant = false; break; }

    rep.pass = rep.gap <= tol &&
               (!rep.astar_constant || std::abs(rep.best_constant - rep.v0) <= tol);
    return rep;
}

double min_condition_gap(const TwoBsdeSolution& sol, const ProblemSpec& p,
                         const Lattice& lat) {
    const int M = lat.node_count();
    const int N = lat.n_steps;
    const std::size_t n_controls = p.controls.grid.size();
    std::vector<TransitionKernel> kernels;
    for (double a : p.controls.grid) kernels.push_back(kernel_for(lat, a));

    std::vector<double> w(static_cast<std::size_t>(M), 0.0);
    std::vector<double> wn(static_cast<std::size_t>(M));
    for (int n = N - 1; n >= 0; --n) {
        for (int i = 0; i < M; ++i) {
            const int j = lat.j_of(i);
            const int iu = lat.index(lat.up(j));
            const int id = lat.index(lat.down(j));
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t gi = 0; gi < n_controls; ++gi) {
                const TransitionKernel& k = kernels[gi];
                const double cont = k.p_plus * w[static_cast<std::size_t>(iu)] +
                                    k.p_zero * w[static_cast<std::size_t>(i)] +
                                    k.p_minus * w[static_cast<std::size_t>(id)];
                const double cand =
                    sol.per_control_k[gi][static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] +
                    cont;
                best = std::min(best, cand);
            }
            wn[static_cast<std::size_t>(i)] = best;
        }
        w.swap(wn);
    }
    return w[static_cast<std::size_t>(lat.index(0))];
}

double expected_k(const TwoBsdeSolution& sol, const ProblemSpec& p, const Lattice& lat,
                  const Policy& policy) {
    const int M = lat.node_count();
    std::vector<double> dist(static_cast<std::size_t>(M), 0.0);
    dist[static_cast<std::size_t>(lat.index(0))] = 1.0;
    double total = 0.0;
    for (int n = 0; n < lat.n_steps; ++n) {
        for (int i = 0; i < M; ++i) {
            const double mass = dist[static_cast<std::size_t>(i)];
            if (mass == 0.0) continue;
            const int j = lat.j_of(i);
            const std::size_t gi = grid_index_of(p.controls, policy(n, j));
            total += mass * sol.per_control_k[gi][static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
        }
        dist = push_forward(lat, dist, policy, n);
    }
    return total;
}

StationarityReport stationarity_experiment(const ProblemSpec& p, const Lattice& lat,
                                           const std::vector<double>& n_list, double tol,
                                           int kmax) {
    StationarityReport rep;
    const TwoBsdeSolution base = solve_2bsde(p, lat, tol, kmax);
    for (const auto& row : base.z)
        for (double zv : row)
            rep.sup_z_untruncated = std::max(rep.sup_z_untruncated, std::abs(zv));

    for (double n : n_list) {
        ProblemSpec pn = p;
        pn.generator = truncate_generator(p.generator, n);
        const TwoBsdeSolution sol = solve_2bsde(pn, lat, tol, kmax);
        rep.n_values.push_back(n);
        rep.v0_values.push_back(sol.value_at_origin(lat));
    }

    // Smallest entry from which all successive values are bitwise identical.
    const std::size_t m = rep.v0_values.size();
    if (m >= 2) {
        std::size_t first_stable = m - 1;
        for (std::size_t i = m - 1; i-- > 0;) {
            if (rep.v0_values[i + 1] == rep.v0_values[i])
                first_stable = i;
            else
                break;
        }
        if (first_stable < m - 1) rep.n_star = rep.n_values[first_stable];
    }
    return rep;
}

} // namespace q2b
