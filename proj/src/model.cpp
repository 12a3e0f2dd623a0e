#include "q2b/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "q2b/errors.hpp"

namespace q2b {

bool ControlSet::valid() const {
    if (grid.empty()) return false;
    if (!(a_low > 0.0) || !(a_high >= a_low)) return false;
    if (grid.front() != a_low || grid.back() != a_high) return false;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) return false;
    return true;
}

ControlSet ControlSet::band(double a_low, double a_high, int n_points) {
    ControlSet c;
    c.a_low = a_low;
    c.a_high = a_high;
    if (a_high == a_low || n_points < 2) {
        c.grid = {a_low};
        if (a_high > a_low) c.grid.push_back(a_high);
        return c;
    }
    c.grid.resize(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i)
        c.grid[static_cast<std::size_t>(i)] =
            a_low + (a_high - a_low) * static_cast<double>(i) / (n_points - 1);
    c.grid.front() = a_low;
    c.grid.back() = a_high;
    return c;
}

bool ValidationReport::all_pass() const {
    return std::all_of(items.begin(), items.end(),
                       [](const ValidationItem& it) { return it.pass; });
}

namespace {

std::string witness_point(double t, double x, double y, double z, double a) {
    std::ostringstream os;
    os << "t=" << t << " x=" << x << " y=" << y << " z=" << z << " a=" << a;
    return os.str();
}

} // namespace

ValidationReport validate_problem(const ProblemSpec& p, std::uint64_t seed, int samples) {
    ValidationReport report;

    const bool band_ok = p.controls.valid();
    report.items.push_back({"control_band", band_ok,
                            band_ok ? "" : "grid must be strictly increasing with both endpoints"});
    report.items.push_back({"horizon_positive", p.horizon > 0.0,
                            p.horizon > 0.0 ? "" : "T <= 0"});
    if (!band_ok || !(p.horizon > 0.0)) return report;

    const GeneratorSpec& gen = p.generator;
    const double x_range = std::abs(p.x0) + 4.0 * std::sqrt(p.controls.a_high * p.horizon);
    const double y_range = p.terminal.bound + 1.0;
    const double z_range = 5.0;
    const double slack = 1e-9;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, p.horizon);
    std::uniform_real_distribution<double> ux(-x_range, x_range);
    std::uniform_real_distribution<double> uy(-y_range, y_range);
    std::uniform_real_distribution<double> uz(-z_range, z_range);
    std::uniform_real_distribution<double> ua(p.controls.a_low, p.controls.a_high);

    ValidationItem growth{"generator_growth", true, ""};
    ValidationItem lipy{"generator_lipschitz_y", true, ""};
    ValidationItem term{"terminal_bound", true, ""};

    for (int s = 0; s < samples; ++s) {
        const double t = ut(rng), x = ux(rng), y = uy(rng), z = uz(rng), a = ua(rng);
        const double fv = gen.f(t, x, y, z, a);
        if (growth.pass) {
            const double rhs = gen.alpha + gen.beta * std::abs(y) + 0.5 * gen.gamma_q * a * z * z;
            if (!(std::abs(fv) <= rhs * (1.0 + slack) + slack)) {
                growth.pass = false;
                growth.witness = witness_point(t, x, y, z, a) + " |f|=" + std::to_string(std::abs(fv)) +
                                 " bound=" + std::to_string(rhs);
            }
        }
        if (lipy.pass) {
            const double y2 = uy(rng);
            const double fv2 = gen.f(t, x, y2, z, a);
            if (!(std::abs(fv - fv2) <= gen.lip_y * std::abs(y - y2) * (1.0 + slack) + slack)) {
                lipy.pass = false;
                lipy.witness = witness_point(t, x, y, z, a) + " y'=" + std::to_string(y2);
            }
        }
        if (term.pass) {
            const double gv = p.terminal.g(x);
            if (!(std::abs(gv) <= p.terminal.bound * (1.0 + slack) + slack)) {
                term.pass = false;
                term.witness = "x=" + std::to_string(x) + " |g|=" + std::to_string(std::abs(gv)) +
                               " bound=" + std::to_string(p.terminal.bound);
            }
        }
    }
    report.items.push_back(growth);
    report.items.push_back(lipy);
    report.items.push_back(term);
    return report;
}

HamiltonianValue conjugate_hamiltonian(const GeneratorSpec& gen, const ControlSet& controls,
                                       double t, double x, double y, double p, double M) {
    if (!controls.valid()) throw DomainError("conjugate_hamiltonian: invalid control set");
    HamiltonianValue best{-std::numeric_limits<double>::infinity(), controls.grid.front()};
    for (double a : controls.grid) {
        const double fv = gen.f(t, x, y, p, a);
        if (!std::isfinite(fv)) {
            std::ostringstream os;
            os << "generator non-finite at t=" << t << " x=" << x << " a=" << a;
            throw EvaluationError(os.str());
        }
        const double cand = 0.5 * a * M - fv;
        if (cand > best.value) best = {cand, a};
    }
    return best;
}

GeneratorSpec truncate_generator(const GeneratorSpec& gen, double n) {
    GeneratorSpec out = gen;
    GeneratorFn base = gen.f;
    out.f = [base, n](double t, double x, double y, double z, double a) {
        const double zc = std::clamp(z, -n, n);
        return base(t, x, y, zc, a);
    };
    // No longer exactly purely quadratic once the cap can bind.
    out.pure_quadratic_gamma.reset();
    out.name = gen.name + "_trunc";
    return out;
}

GeneratorSpec negate_generator(const GeneratorSpec& gen) {
    GeneratorSpec out = gen;
    GeneratorFn base = gen.f;
    out.f = [base](double t, double x, double y, double z, double a) {
        return -base(t, x, y, z, a);
    };
    out.pure_quadratic_gamma.reset();
    out.name = "neg_" + gen.name;
    return out;
}

} // namespace q2b
