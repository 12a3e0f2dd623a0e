#include "doctest.h"

#include <array>
#include <cmath>
#include <numeric>

#include "q2b/catalog.hpp"
#include "q2b/errors.hpp"
#include "q2b/lattice.hpp"

using namespace q2b;

namespace {

ProblemSpec simple_problem(double a_low = 0.25, double a_high = 1.0) {
    ProblemSpec p;
    p.horizon = 1.0;
    p.generator = make_generator("zero", {}, a_low);
    p.terminal = make_terminal("constant", 4.0, 0.0);
    p.controls = ControlSet::band(a_low, a_high);
    return p;
}

} // namespace

TEST_CASE("build_lattice hits the CFL equality case") {
    const Lattice lat = build_lattice(simple_problem(), 100);
    CHECK(lat.dt == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(lat.dx == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(lat.cfl_ratio(lat.a_high) <= 1.0);
    CHECK(lat.cfl_ratio(lat.a_high) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lat.half_width == 40);  // ceil(4 * 1 / 0.1)
    CHECK(lat.half_width * lat.dx >= 4.0 * std::sqrt(lat.a_high * 1.0) - 1e-9);
}

TEST_CASE("build_lattice scales dx with the top of the band") {
    const Lattice lat = build_lattice(simple_problem(0.1, 0.25), 100);
    CHECK(lat.dx == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(lat.cfl_ratio(0.25) <= 1.0);
}

TEST_CASE("build_lattice rejects bad arguments") {
    CHECK_THROWS_AS(build_lattice(simple_problem(), 0), ConfigError);
    ProblemSpec p = simple_problem();
    p.controls.grid.clear();
    CHECK_THROWS_AS(build_lattice(p, 100), ConfigError);
}

TEST_CASE("kernel probabilities by hand") {
    Lattice lat;
    lat.n_steps = 100;
    lat.dt = 0.01;
    lat.dx = 0.2;
    lat.half_width = 20;
    lat.a_low = 0.25;
    lat.a_high = 1.0;

    TransitionKernel k = kernel_for(lat, 1.0);
    CHECK(k.p_plus == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(k.p_minus == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(k.p_zero == doctest::Approx(0.75).epsilon(1e-15));

    lat.dx = 0.1;
    k = kernel_for(lat, 0.5);
    CHECK(k.p_plus == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(k.p_zero == doctest::Approx(0.5).epsilon(1e-15));

    CHECK_THROWS_AS(kernel_for(lat, 0.0), DomainError);
    CHECK_THROWS_AS(kernel_for(lat, 1.5), DomainError);
}

TEST_CASE("kernel moments are exact for every band point") {
    const Lattice lat = build_lattice(simple_problem(), 64);
    for (double a : {0.25, 0.4, 0.7, 1.0}) {
        const TransitionKernel k = kernel_for(lat, a);
        CHECK(k.p_plus >= 0.0);
        CHECK(k.p_zero >= 0.0);
        CHECK(k.p_plus + k.p_zero + k.p_minus == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(k.p_plus * lat.dx - k.p_minus * lat.dx == 0.0);  // martingale
        CHECK(k.p_plus * lat.dx * lat.dx + k.p_minus * lat.dx * lat.dx ==
              doctest::Approx(a * lat.dt).epsilon(1e-14));     // quadratic variation
    }
}

TEST_CASE("one-step terminal law is the kernel itself") {
    const Lattice lat = build_lattice(simple_problem(), 1);
    const TransitionKernel k = kernel_for(lat, 0.5);
    const auto dist = terminal_distribution(lat, constant_policy(0.5));
    CHECK(dist[static_cast<std::size_t>(lat.index(-1))] == doctest::Approx(k.p_minus));
    CHECK(dist[static_cast<std::size_t>(lat.index(0))] == doctest::Approx(k.p_zero));
    CHECK(dist[static_cast<std::size_t>(lat.index(1))] == doctest::Approx(k.p_plus));
}

TEST_CASE("terminal variance telescopes to a T") {
    // Reflection at the boundary eats variance from the tail beyond the
    // domain edge: the deficit is the tail second moment, about 1.4e-4 at
    // 4 standard deviations and below 1e-12 at 7. Check both regimes.
    const auto stats = [](const Lattice& lat) {
        const auto dist = terminal_distribution(lat, constant_policy(1.0));
        double mass = 0.0, mean = 0.0, var = 0.0;
        for (int i = 0; i < lat.node_count(); ++i) {
            const double x = lat.x(lat.j_of(i));
            mass += dist[static_cast<std::size_t>(i)];
            mean += dist[static_cast<std::size_t>(i)] * x;
            var += dist[static_cast<std::size_t>(i)] * x * x;
        }
        return std::array<double, 3>{mass, mean, var};
    };

    const auto [m4, mu4, v4] = stats(build_lattice(simple_problem(), 100));
    CHECK(m4 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(mu4) < 1e-12);
    CHECK(1.0 - v4 > 1e-5);   // the 4-sigma deficit is real ...
    CHECK(1.0 - v4 < 1e-3);   // ... and small

    const auto [m7, mu7, v7] = stats(build_lattice(simple_problem(), 100, 7.0));
    CHECK(m7 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(mu7) < 1e-12);
    CHECK(v7 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two-step alternating-policy law by hand") {
    ProblemSpec p = simple_problem();
    const Lattice lat = build_lattice(p, 2);
    const Policy alt = [](int n, int) { return n == 0 ? 0.25 : 1.0; };
    const auto dist = terminal_distribution(lat, alt);

    // Hand convolution of kernel(0.25) then kernel(1.0) started at j = 0.
    const TransitionKernel k0 = kernel_for(lat, 0.25);
    const TransitionKernel k1 = kernel_for(lat, 1.0);
    std::vector<double> step1 = {k0.p_minus, k0.p_zero, k0.p_plus};  // j = -1, 0, 1
    std::vector<double> expect(5, 0.0);                              // j = -2..2
    for (int j = -1; j <= 1; ++j) {
        const double m = step1[static_cast<std::size_t>(j + 1)];
        expect[static_cast<std::size_t>(j + 1)] += m * k1.p_minus;
        expect[static_cast<std::size_t>(j + 2)] += m * k1.p_zero;
        expect[static_cast<std::size_t>(j + 3)] += m * k1.p_plus;
    }
    for (int j = -2; j <= 2; ++j)
        CHECK(dist[static_cast<std::size_t>(lat.index(j))] ==
              doctest::Approx(expect[static_cast<std::size_t>(j + 2)]).epsilon(1e-14));
}

TEST_CASE("reflection conserves mass at the boundary") {
    ProblemSpec p = simple_problem();
    const Lattice lat = build_lattice(p, 4);
    std::vector<double> dist(static_cast<std::size_t>(lat.node_count()), 0.0);
    dist[static_cast<std::size_t>(lat.index(lat.half_width))] = 1.0;  // start on the wall
    for (int n = 0; n < 4; ++n) {
        dist = push_forward(lat, dist, constant_policy(1.0), n);
        CHECK(std::accumulate(dist.begin(), dist.end(), 0.0) ==
              doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("terminal law is symmetric under a symmetric policy") {
    const Lattice lat = build_lattice(simple_problem(), 16);
    const Policy sym = [](int, int j) { return j % 2 == 0 ? 1.0 : 0.5; };  // even in j
    const auto dist = terminal_distribution(lat, sym);
    for (int j = 1; j <= lat.half_width; ++j)
        CHECK(dist[static_cast<std::size_t>(lat.index(j))] ==
              doctest::Approx(dist[static_cast<std::size_t>(lat.index(-j))]).epsilon(1e-13));
}
