#include "q2b/risk.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "q2b/errors.hpp"

namespace q2b {

namespace {

std::vector<double> psi_on_nodes(const RiskSensitiveSpec& rs, const Lattice& lat) {
    std::vector<double> g(static_cast<std::size_t>(lat.node_count()));
    for (int i = 0; i < lat.node_count(); ++i)
        g[static_cast<std::size_t>(i)] = rs.psi.g(lat.x(lat.j_of(i)));
    return g;
}

} // namespace

ValidationReport validate_risk_spec(const RiskSensitiveSpec& rs, const ProblemSpec& p,
                                    std::uint64_t seed, int samples) {
    ValidationReport report;
    report.items.push_back({"controls_u_nonempty", !rs.controls_u.empty(),
                            rs.controls_u.empty() ? "U is empty" : ""});
    report.items.push_back({"theta_positive", rs.theta > 0.0, rs.theta > 0.0 ? "" : "theta <= 0"});
    if (rs.controls_u.empty()) return report;

    const double x_range = std::abs(p.x0) + 4.0 * std::sqrt(p.controls.a_high * p.horizon);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, p.horizon);
    std::uniform_real_distribution<double> ux(-x_range, x_range);
    std::uniform_int_distribution<std::size_t> uu(0, rs.controls_u.size() - 1);

    ValidationItem gb{"g_drift_bound", true, ""};
    ValidationItem hb{"h_cost_bound", true, ""};
    for (int s = 0; s < samples; ++s) {
        const double t = ut(rng), x = ux(rng), u = rs.controls_u[uu(rng)];
        if (gb.pass && !(std::abs(rs.g_drift(t, x, u)) <= rs.g_bound + 1e-9)) {
            gb.pass = false;
            gb.witness = "t=" + std::to_string(t) + " x=" + std::to_string(x) +
                         " u=" + std::to_string(u);
        }
        if (hb.pass && !(std::abs(rs.h_cost(t, x, u)) <= rs.h_bound + 1e-9)) {
            hb.pass = false;
            hb.witness = "t=" + std::to_string(t) + " x=" + std::to_string(x) +
                         " u=" + std::to_string(u);
        }
    }
    report.items.push_back(gb);
    report.items.push_back(hb);
    return report;
}

double entropic_risk(const ProblemSpec& p, const Lattice& lat) {
    const Field y = solve_purely_quadratic(p, lat, constant_policy(p.controls.a_high), -1,
                                           /*sup_over_band=*/true);
    return y.front()[static_cast<std::size_t>(lat.index(0))];
}

FixedControlResult evaluate_fixed_control(const RiskSensitiveSpec& rs, const UPolicy& u_policy,
                                          const ProblemSpec& p, const Lattice& lat, double tol,
                                          int kmax) {
    const double theta = rs.theta;
    NodeGenerator f = [&rs, &u_policy, &lat, theta](int n, int j, double, double z, double a) {
        const double t = lat.time(n);
        const double x = lat.x(j);
        const double u = u_policy(n, j);
        return z * rs.g_drift(t, x, u) + rs.h_cost(t, x, u) + 0.5 * theta * a * z * z;
    };
    FixedControlResult out;
    out.sol = solve_2bsde_nodes(lat, p.controls, f, psi_on_nodes(rs, lat), tol, kmax);
    out.y0 = out.sol.value_at_origin(lat);
    out.J = std::exp(theta * out.y0);
    return out;
}

FixedControlResult evaluate_fixed_control_tilted(const RiskSensitiveSpec& rs,
                                                 const UPolicy& u_policy, const ProblemSpec& p,
                                                 const Lattice& lat, double tol, int kmax) {
    const int M = lat.node_count();
    const int N = lat.n_steps;
    const std::size_t n_controls = p.controls.grid.size();
    std::vector<TransitionKernel> kernels;
    for (double a : p.controls.grid) kernels.push_back(kernel_for(lat, a));

    FixedControlResult out;
    TwoBsdeSolution& sol = out.sol;
    sol.v.assign(static_cast<std::size_t>(N + 1),
                 std::vector<double>(static_cast<std::size_t>(M), 0.0));
    sol.z.assign(static_cast<std::size_t>(N),
                 std::vector<double>(static_cast<std::size_t>(M), 0.0));
    sol.astar.assign(static_cast<std::size_t>(N),
                     std::vector<double>(static_cast<std::size_t>(M), 0.0));
    sol.v[static_cast<std::size_t>(N)] = psi_on_nodes(rs, lat);

    std::vector<std::vector<double>> za(n_controls);
    for (int n = N - 1; n >= 0; --n) {
        const std::vector<double>& vnext = sol.v[static_cast<std::size_t>(n + 1)];
        for (std::size_t gi = 0; gi < n_controls; ++gi)
            za[gi] = extract_z(vnext, lat, p.controls.grid[gi]);
        const double t = lat.time(n);
        for (int i = 0; i < M; ++i) {
            const int j = lat.j_of(i);
            const int iu = lat.index(lat.up(j));
            const int id = lat.index(lat.down(j));
            const double x = lat.x(j);
            const double u = u_policy(n, j);
            const double gd = rs.g_drift(t, x, u);
            const double tilt = gd * lat.dt / (2.0 * lat.dx);
            double best = -std::numeric_limits<double>::infinity();
            double best_a = p.controls.grid.front();
            double best_z = 0.0;
            for (std::size_t gi = 0; gi < n_controls; ++gi) {
                const TransitionKernel& k = kernels[gi];
                if (std::abs(tilt) > std::min(k.p_plus, k.p_minus))
                    throw DomainError("kernel tilt |g| dt/(2 dx) = " + std::to_string(std::abs(tilt)) +
                                      " exceeds p_pm = " + std::to_string(k.p_plus) +
                                      "; refine the lattice");
                const double m1 = (k.p_plus + tilt) * vnext[static_cast<std::size_t>(iu)] +
                                  k.p_zero * vnext[static_cast<std::size_t>(i)] +
                                  (k.p_minus - tilt) * vnext[static_cast<std::size_t>(id)];
                const double zj = za[gi][static_cast<std::size_t>(i)];
                double y = m1;
                double res = 0.0;
                bool converged = false;
                for (int it = 1; it <= kmax; ++it) {
                    const double yn =
                        m1 + lat.dt * (rs.h_cost(t, x, u) + 0.5 * rs.theta * k.a * zj * zj);
                    res = std::abs(yn - y);
                    y = yn;
                    if (res < tol) { converged = true; break; }
                }
                if (!converged) throw ConvergenceError(n, j, res);
                if (y > best) { best = y; best_a = k.a; best_z = zj; }
            }
            sol.v[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] = best;
            sol.astar[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] = best_a;
            sol.z[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] = best_z;
        }
    }
    out.y0 = sol.value_at_origin(lat);
    out.J = std::exp(rs.theta * out.y0);
    return out;
}

RiskSensitiveSolution solve_risk_sensitive(const RiskSensitiveSpec& rs, const ProblemSpec& p,
                                           const Lattice& lat, double tol, int kmax) {
    if (rs.controls_u.empty()) throw ConfigError("solve_risk_sensitive: U is empty");
    const double theta = rs.theta;
    // Innermost max over u of z g + h, then the outer max over a in the DP core.
    auto inner_max = [&rs](double t, double x, double z) {
        double best = -std::numeric_limits<double>::infinity();
        double best_u = rs.controls_u.front();
        for (double u : rs.controls_u) {
            const double cand = z * rs.g_drift(t, x, u) + rs.h_cost(t, x, u);
            if (cand > best) { best = cand; best_u = u; }
        }
        return std::pair<double, double>(best, best_u);
    };
    NodeGenerator f = [&lat, &inner_max, theta](int n, int j, double, double z, double a) {
        return inner_max(lat.time(n), lat.x(j), z).first + 0.5 * theta * a * z * z;
    };

    RiskSensitiveSolution out;
    out.sol = solve_2bsde_nodes(lat, p.controls, f, psi_on_nodes(rs, lat), tol, kmax);
    out.ustar.assign(static_cast<std::size_t>(lat.n_steps),
                     std::vector<double>(static_cast<std::size_t>(lat.node_count()), 0.0));
    for (int n = 0; n < lat.n_steps; ++n)
        for (int i = 0; i < lat.node_count(); ++i) {
            const int j = lat.j_of(i);
            const double z = out.sol.z[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)];
            out.ustar[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] =
                inner_max(lat.time(n), lat.x(j), z).second;
        }
    out.y0 = out.sol.value_at_origin(lat);
    out.J = std::exp(theta * out.y0);
    return out;
}

} // namespace q2b
