#include "doctest.h"

#include <cmath>

#include "q2b/catalog.hpp"
#include "q2b/diagnostics.hpp"

using namespace q2b;

namespace {

ProblemSpec make_problem(GeneratorSpec gen, TerminalSpec term) {
    ProblemSpec p;
    p.horizon = 1.0;
    p.x0 = 0.0;
    p.generator = std::move(gen);
    p.terminal = std::move(term);
    p.controls = ControlSet::band(0.25, 1.0);
    return p;
}

// z field identically equal to c.
Field constant_z(const Lattice& lat, double c) {
    return Field(static_cast<std::size_t>(lat.n_steps),
                 std::vector<double>(static_cast<std::size_t>(lat.node_count()), c));
}

} // namespace

TEST_CASE("bmo norm vanishes for constant terminals") {
    const auto p = make_problem(make_generator("zero", {}, 0.25),
                                make_terminal("constant", 4.0, 0.7));
    const Lattice lat = build_lattice(p, 50);
    const TwoBsdeSolution sol = solve_2bsde(p, lat);
    CHECK(bmo_norm(sol.z, p, lat, constant_policy(1.0)) == 0.0);
}

TEST_CASE("bmo norm of the linear terminal is close to T") {
    const auto p = make_problem(make_generator("zero", {}, 0.25),
                                make_terminal("identity", 4.0));
    const Lattice lat = build_lattice(p, 100);
    const BsdeSolution sol = solve_bsde(p, lat, constant_policy(1.0));
    // z = 1 in the interior, so the remaining energy from t = 0 is about T.
    CHECK(bmo_norm(sol.z, p, lat, constant_policy(1.0)) ==
          doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("bmo norm scales quadratically in the terminal for f = 0") {
    const auto p1 = make_problem(make_generator("zero", {}, 0.25),
                                 make_terminal("identity", 4.0));
    auto p2 = p1;
    const auto base = p1.terminal.g;
    p2.terminal.g = [base](double x) { return 2.0 * base(x); };
    p2.terminal.bound = 2.0 * p1.terminal.bound;
    const Lattice lat = build_lattice(p1, 100);
    const double n1 = bmo_norm(solve_bsde(p1, lat, constant_policy(1.0)).z, p1, lat,
                               constant_policy(1.0));
    const double n2 = bmo_norm(solve_bsde(p2, lat, constant_policy(1.0)).z, p2, lat,
                               constant_policy(1.0));
    CHECK(n2 == doctest::Approx(4.0 * n1).epsilon(0.1));
}

TEST_CASE("energy inequality on the trivial and linear cases") {
    const auto pc = make_problem(make_generator("zero", {}, 0.25),
                                 make_terminal("constant", 4.0, 0.7));
    const Lattice lc = build_lattice(pc, 25);
    const TwoBsdeSolution sc = solve_2bsde(pc, lc);
    for (int pe : {1, 2}) {
        const CheckResult r = energy_inequality_check(sc.z, pc, lc, constant_policy(1.0), pe);
        CHECK(r.lhs == 0.0);
        CHECK(r.pass);
    }

    const auto pl = make_problem(make_generator("zero", {}, 0.25),
                                 make_terminal("identity", 4.0));
    const Lattice ll = build_lattice(pl, 100);
    const BsdeSolution sl = solve_bsde(pl, ll, constant_policy(1.0));
    const CheckResult r1 = energy_inequality_check(sl.z, pl, ll, constant_policy(1.0), 1);
    CHECK(r1.lhs == doctest::Approx(1.0).epsilon(0.05));
    CHECK(r1.rhs == doctest::Approx(8.0).epsilon(0.2));  // 2 * 1! * (4 * norm)^1
    CHECK(r1.pass);
    const CheckResult r2 = energy_inequality_check(sl.z, pl, ll, constant_policy(1.0), 2);
    const double norm = bmo_norm(sl.z, pl, ll, constant_policy(1.0));
    CHECK(r2.rhs == doctest::Approx(4.0 * 16.0 * norm * norm).epsilon(1e-12));
    CHECK(r2.pass);
}

TEST_CASE("a priori bound arithmetic") {
    // f with alpha = 0.5, beta = 1, T = 1, terminal bound 1:
    // bound = 0.5 (e - 1) + e = 3.5774...
    ProblemSpec p = make_problem(make_generator("zero", {}, 0.25),
                                 make_terminal("identity", 1.0));
    p.generator.alpha = 0.5;
    p.generator.beta = 1.0;
    const Field v(1, std::vector<double>(3, 0.9));
    const CheckResult r = apriori_check(v, p);
    CHECK(r.rhs == doctest::Approx(0.5 * (std::exp(1.0) - 1.0) + std::exp(1.0))
                       .epsilon(1e-14));
    CHECK(r.pass);
}

TEST_CASE("a priori bound beta to zero limit and catalog runs") {
    const auto pc = make_problem(make_generator("zero", {}, 0.25),
                                 make_terminal("constant", 4.0, 0.7));
    const Lattice lat = build_lattice(pc, 25);
    const TwoBsdeSolution sol = solve_2bsde(pc, lat);
    const CheckResult r = apriori_check(sol.v, pc);
    CHECK(r.rhs == doctest::Approx(0.7).epsilon(1e-14));  // alpha T + bound with alpha = 0
    CHECK(r.lhs == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(r.pass);

    // Purely quadratic: transform preserves the terminal bound.
    const auto pq = make_problem(make_generator("purely_quadratic", {{"gamma", 2.0}}, 0.25),
                                 make_terminal("identity", 4.0));
    const Lattice lq = build_lattice(pq, 50);
    const CheckResult rq = apriori_check(solve_2bsde(pq, lq).v, pq);
    CHECK(rq.pass);
}

TEST_CASE("z bmo bound display arithmetic and looseness") {
    // gamma = 2, ||Y|| = 1, alpha = 1, beta = 0, T = 1:
    // bound = (1/2) e^8 (1 + 4) = 7451.66...
    ProblemSpec p = make_problem(make_generator("purely_quadratic", {{"gamma", 2.0}}, 0.25),
                                 make_terminal("identity", 1.0));
    p.generator.alpha = 1.0;
    const Lattice lat = build_lattice(p, 50);
    Field v(1, std::vector<double>(1, 1.0));
    const CheckResult r = z_bmo_bound_check(v, constant_z(lat, 0.0), p, lat,
                                            constant_policy(1.0));
    CHECK(r.rhs == doctest::Approx(0.5 * std::exp(8.0) * 5.0).epsilon(1e-12));
    CHECK(r.pass);
}

TEST_CASE("z bmo bound passes on the computed linear-terminal solution") {
    const auto p = make_problem(make_generator("purely_quadratic", {{"gamma", 2.0}}, 0.25),
                                make_terminal("identity", 4.0));
    const Lattice lat = build_lattice(p, 100);
    const TwoBsdeSolution sol = solve_2bsde(p, lat);
    const CheckResult r = z_bmo_bound_check(sol.v, sol.z, p, lat, constant_policy(1.0));
    CHECK(r.pass);
    CHECK(r.lhs < r.rhs / 100.0);  // the display is loose by design
}

TEST_CASE("doleans moments: zero integrand gives exactly one") {
    const auto p = make_problem(make_generator("zero", {}, 0.25),
                                make_terminal("constant", 4.0, 0.0));
    const Lattice lat = build_lattice(p, 25);
    for (double r : {1.5, 2.0, 3.0})
        CHECK(doleans_moment_probe(constant_z(lat, 0.0), p, lat, constant_policy(1.0), r) ==
              doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("doleans moments match the lognormal closed form") {
    const auto p = make_problem(make_generator("zero", {}, 0.25),
                                make_terminal("constant", 4.0, 0.0));
    // The r-tilted measure drifts the chain by r t, so the domain must extend
    // well past r standard deviations for the clipped tail to be negligible.
    const Lattice lat = build_lattice(p, 200, 8.0);
    const Field z1 = constant_z(lat, 1.0);
    // E[E(B)_T^r] = e^{r(r-1)T/2} for z = 1, a = 1.
    CHECK(doleans_moment_probe(z1, p, lat, constant_policy(1.0), 2.0) ==
          doctest::Approx(std::exp(1.0)).epsilon(0.03));
    CHECK(doleans_moment_probe(z1, p, lat, constant_policy(1.0), 3.0) ==
          doctest::Approx(std::exp(3.0)).epsilon(0.05));
}

TEST_CASE("full report on a catalog run") {
    const auto p = make_problem(make_generator("purely_quadratic", {{"gamma", 2.0}}, 0.25),
                                make_terminal("identity", 4.0));
    const Lattice lat = build_lattice(p, 100);
    const TwoBsdeSolution sol = solve_2bsde(p, lat);
    const BmoReport rep = diagnostics_report(sol, p, lat);
    CHECK(rep.bmo_norm_sq >= 0.0);
    CHECK(rep.per_measure.size() == 1 + p.controls.grid.size());
    for (const auto& e : rep.energy_checks) CHECK(e.pass);
    CHECK(rep.apriori.pass);
    CHECK(rep.z_bmo.pass);
    for (const auto& [r, m] : rep.doleans_moments) CHECK(m >= 1.0);
}
