// q2bsde: batch driver for the volatility-band quadratic 2BSDE laboratory.
// One subcommand per run; all numerics come from a flat key = value config
// file so every artifact can be reproduced from the manifest echo.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "q2b/catalog.hpp"
#include "q2b/config.hpp"
#include "q2b/diagnostics.hpp"
#include "q2b/errors.hpp"
#include "q2b/pde.hpp"
#include "q2b/risk.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace q2b;

namespace {

constexpr const char* kVersion = "1.0.0";

struct RunContext {
    std::string subcommand;
    std::string config_path;
    Config cfg;
    fs::path out_dir;
    json manifest;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    std::ofstream open_csv(const std::string& name) {
        const fs::path path = out_dir / name;
        std::ofstream f(path);
        if (!f) throw ConfigError("cannot write to " + path.string() +
                                  "; check output_dir permissions");
        manifest["artifacts"].push_back(name);
        return f;
    }

    int finish(int code, const std::string& error = "") {
        manifest["exit_code"] = code;
        if (!error.empty()) manifest["error"] = error;
        manifest["elapsed_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
        std::ofstream f(out_dir / "manifest.json");
        if (f) f << manifest.dump(2) << "\n";
        if (!error.empty()) std::cerr << "error: " << error << "\n";
        return code;
    }
};

ProblemSpec problem_from_config(const Config& cfg) {
    ProblemSpec p;
    p.horizon = cfg.number("horizon", 1.0);
    p.x0 = cfg.number("x0", 0.0);
    const double a_low = cfg.number("a_low", 0.25);
    const double a_high = cfg.number("a_high", 1.0);
    const int a_points = static_cast<int>(cfg.number("a_points", 2.0));
    p.controls = ControlSet::band(a_low, a_high, a_points);

    std::map<std::string, double> params;
    for (const char* key : {"gamma", "k", "theta", "g0", "h0"})
        if (cfg.has(key)) params[key] = cfg.number(key);
    p.generator = make_generator(cfg.str("generator", "zero"), params, a_low);

    const double default_clip = std::abs(p.x0) + 4.0 * std::sqrt(a_high * p.horizon);
    p.terminal = make_terminal(cfg.str("terminal", "constant"),
                               cfg.number("terminal_clip", default_clip),
                               cfg.number("terminal_c", 0.0));
    if (cfg.has("terminal_shift"))
        p.terminal = shift_terminal(p.terminal, cfg.number("terminal_shift"));
    return p;
}

Lattice lattice_from_config(const ProblemSpec& p, const Config& cfg) {
    return build_lattice(p, static_cast<int>(cfg.number("n_steps", 200.0)),
                         cfg.number("stddev_mult", 4.0));
}

RiskSensitiveSpec risk_from_config(const ProblemSpec& p, const Config& cfg) {
    RiskSensitiveSpec rs;
    rs.theta = cfg.number("theta", 1.0);
    rs.controls_u = cfg.list("u_set", {-1.0, 1.0});
    const double g_scale = cfg.number("g_scale", 1.0);
    const double h_lin = cfg.number("h_lin", 0.0);
    rs.g_drift = [g_scale](double, double, double u) { return g_scale * u; };
    rs.h_cost = [h_lin](double, double, double u) { return h_lin * u; };
    double umax = 0.0;
    for (double u : rs.controls_u) umax = std::max(umax, std::abs(u));
    rs.g_bound = std::abs(g_scale) * umax;
    rs.h_bound = std::abs(h_lin) * umax;
    rs.psi = p.terminal;
    return rs;
}

// Shared validation gate; returns false (and records witnesses) on failure.
bool validate_or_record(RunContext& ctx, const ProblemSpec& p) {
    const ValidationReport rep =
        validate_problem(p, static_cast<std::uint64_t>(ctx.cfg.number("seed", 42.0)));
    json items = json::array();
    for (const auto& it : rep.items)
        items.push_back({{"check", it.check}, {"pass", it.pass}, {"witness", it.witness}});
    ctx.manifest["validation"] = items;
    return rep.all_pass();
}

void write_field_csv(std::ofstream& f, const Lattice& lat, const Field& y, const Field& z,
                     const Field* astar, const char* value_name) {
    f << "n,j,t,x," << value_name << ",z";
    if (astar) f << ",astar";
    f << "\n";
    for (std::size_t n = 0; n < y.size(); ++n)
        for (int i = 0; i < lat.node_count(); ++i) {
            const int j = lat.j_of(i);
            f << n << ',' << j << ',' << csv_num(lat.time(static_cast<int>(n))) << ','
              << csv_num(lat.x(j)) << ',' << csv_num(y[n][static_cast<std::size_t>(i)]) << ','
              << csv_num(n < z.size() ? z[n][static_cast<std::size_t>(i)]
                                      : std::numeric_limits<double>::quiet_NaN());
            if (astar)
                f << ','
                  << csv_num(n < astar->size()
                                 ? (*astar)[n][static_cast<std::size_t>(i)]
                                 : std::numeric_limits<double>::quiet_NaN());
            f << "\n";
        }
}

int run_solve_bsde(RunContext& ctx) {
    const ProblemSpec p = problem_from_config(ctx.cfg);
    if (!validate_or_record(ctx, p)) return ctx.finish(1, "problem validation failed");
    const Lattice lat = lattice_from_config(p, ctx.cfg);
    const Policy pol = constant_policy(ctx.cfg.number("policy_a", p.controls.a_high));
    const BsdeSolution sol = solve_bsde(p, lat, pol, ctx.cfg.number("tol", 1e-12),
                                        static_cast<int>(ctx.cfg.number("kmax", 200.0)));
    std::ofstream f = ctx.open_csv("solution.csv");
    write_field_csv(f, lat, sol.y, sol.z, nullptr, "y");
    ctx.manifest["results"] = {{"y0", sol.value_at_origin(lat)},
                               {"max_residual", sol.max_residual}};
    std::cout << csv_num(sol.value_at_origin(lat)) << "\n";
    return ctx.finish(0);
}

int run_solve_2bsde(RunContext& ctx) {
    const ProblemSpec p = problem_from_config(ctx.cfg);
    if (!validate_or_record(ctx, p)) return ctx.finish(1, "problem validation failed");
    const Lattice lat = lattice_from_config(p, ctx.cfg);
    const TwoBsdeSolution sol = solve_2bsde(p, lat, ctx.cfg.number("tol", 1e-12),
                                            static_cast<int>(ctx.cfg.number("kmax", 200.0)));
    std::ofstream f = ctx.open_csv("v.csv");
    write_field_csv(f, lat, sol.v, sol.z, &sol.astar, "v");
    if (ctx.cfg.boolean("write_k", false)) {
        std::ofstream kf = ctx.open_csv("k.csv");
        kf << "control_index,a,n,j,dk\n";
        for (std::size_t gi = 0; gi < sol.per_control_k.size(); ++gi)
            for (std::size_t n = 0; n < sol.per_control_k[gi].size(); ++n)
                for (int i = 0; i < lat.node_count(); ++i)
                    kf << gi << ',' << csv_num(p.controls.grid[gi]) << ',' << n << ','
                       << lat.j_of(i) << ','
                       << csv_num(sol.per_control_k[gi][n][static_cast<std::size_t>(i)])
                       << "\n";
    }
    ctx.manifest["results"] = {{"v0", sol.value_at_origin(lat)},
                               {"min_condition_gap", sol.min_gap}};
    std::cout << csv_num(sol.value_at_origin(lat)) << "\n";
    return ctx.finish(0);
}

int run_entropic(RunContext& ctx) {
    const ProblemSpec p = problem_from_config(ctx.cfg);
    if (!p.generator.pure_quadratic_gamma)
        return ctx.finish(1, "entropic requires generator = \"purely_quadratic\"");
    if (!validate_or_record(ctx, p)) return ctx.finish(1, "problem validation failed");
    const Lattice lat = lattice_from_config(p, ctx.cfg);
    const double e = entropic_risk(p, lat);
    ctx.manifest["results"] = {{"entropic_risk", e},
                               {"gamma", *p.generator.pure_quadratic_gamma}};
    std::cout << csv_num(e) << "\n";
    return ctx.finish(0);
}

int run_risk_sensitive(RunContext& ctx) {
    const ProblemSpec p = problem_from_config(ctx.cfg);
    if (!validate_or_record(ctx, p)) return ctx.finish(1, "problem validation failed");
    const RiskSensitiveSpec rs = risk_from_config(p, ctx.cfg);
    const ValidationReport vrep =
        validate_risk_spec(rs, p, static_cast<std::uint64_t>(ctx.cfg.number("seed", 42.0)));
    if (!vrep.all_pass()) return ctx.finish(1, "risk-sensitive spec validation failed");
    const Lattice lat = lattice_from_config(p, ctx.cfg);
    const RiskSensitiveSolution sol =
        solve_risk_sensitive(rs, p, lat, ctx.cfg.number("tol", 1e-12),
                             static_cast<int>(ctx.cfg.number("kmax", 200.0)));
    std::ofstream f = ctx.open_csv("policy.csv");
    f << "n,j,t,x,ystar,ustar,astar\n";
    for (int n = 0; n < lat.n_steps; ++n)
        for (int i = 0; i < lat.node_count(); ++i)
            f << n << ',' << lat.j_of(i) << ',' << csv_num(lat.time(n)) << ','
              << csv_num(lat.x(lat.j_of(i))) << ','
              << csv_num(sol.sol.v[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)])
              << ','
              << csv_num(sol.ustar[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)])
              << ','
              << csv_num(
                     sol.sol.astar[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)])
              << "\n";
    ctx.manifest["results"] = {{"y0", sol.y0}, {"J", sol.J}, {"theta", rs.theta}};
    std::cout << csv_num(sol.y0) << "\n";
    return ctx.finish(0);
}

int run_pde(RunContext& ctx) {
    const ProblemSpec p = problem_from_config(ctx.cfg);
    if (!validate_or_record(ctx, p)) return ctx.finish(1, "problem validation failed");
    const PdeSolution sol =
        solve_fnpde(p, ctx.cfg.number("pde_dt", 1e-3), ctx.cfg.number("pde_dx", 0.05),
                    ctx.cfg.number("stddev_mult", 4.0));
    std::ofstream f = ctx.open_csv("pde.csv");
    f << "t,x,v\n";
    for (int n = 0; n <= sol.n_steps; ++n)
        for (int i = -sol.half_width; i <= sol.half_width; ++i)
            f << csv_num(sol.time(n)) << ',' << csv_num(sol.x(i)) << ','
              << csv_num(sol.v[static_cast<std::size_t>(n)]
                              [static_cast<std::size_t>(i + sol.half_width)])
              << "\n";
    ctx.manifest["results"] = {{"v0", sol.value_at_origin()},
                               {"cfl_ratio", sol.cfl_ratio},
                               {"max_argmax_switches", sol.max_argmax_switches},
                               {"non_affine_in_a", sol.non_affine_in_a}};
    std::cout << csv_num(sol.value_at_origin()) << "\n";
    return ctx.finish(0);
}

int run_cross_validate(RunContext& ctx) {
    const ProblemSpec p = problem_from_config(ctx.cfg);
    if (!validate_or_record(ctx, p)) return ctx.finish(1, "problem validation failed");
    const Lattice lat = lattice_from_config(p, ctx.cfg);
    const CrossValReport rep =
        cross_validate(p, lat, ctx.cfg.number("pde_dt", 1e-3), ctx.cfg.number("pde_dx", 0.05),
                       ctx.cfg.number("tol_xv", -1.0));
    std::ofstream f = ctx.open_csv("cross_validate.csv");
    f << "v_lattice0,v_pde0,diff0,nodewise_max_diff,tol,pass\n";
    f << csv_num(rep.v_lattice0) << ',' << csv_num(rep.v_pde0) << ',' << csv_num(rep.diff0)
      << ',' << csv_num(rep.nodewise_max_diff) << ',' << csv_num(rep.tol) << ','
      << (rep.pass ? 1 : 0) << "\n";
    ctx.manifest["results"] = {{"v_lattice0", rep.v_lattice0},
                               {"v_pde0", rep.v_pde0},
                               {"diff0", rep.diff0},
                               {"pass", rep.pass}};
    std::cout << csv_num(rep.diff0) << "\n";
    return ctx.finish(rep.pass ? 0 : 1);
}

int run_diagnostics(RunContext& ctx) {
    const ProblemSpec p = problem_from_config(ctx.cfg);
    if (!validate_or_record(ctx, p)) return ctx.finish(1, "problem validation failed");
    const Lattice lat = lattice_from_config(p, ctx.cfg);
    const TwoBsdeSolution sol = solve_2bsde(p, lat, ctx.cfg.number("tol", 1e-12),
                                            static_cast<int>(ctx.cfg.number("kmax", 200.0)));
    const BmoReport rep = diagnostics_report(sol, p, lat);
    std::ofstream f = ctx.open_csv("diagnostics.csv");
    f << "check,parameters,lhs,rhs,pass\n";
    auto row = [&f](const CheckResult& c) {
        f << c.check << ',' << c.parameters << ',' << csv_num(c.lhs) << ',' << csv_num(c.rhs)
          << ',' << (c.pass ? 1 : 0) << "\n";
    };
    for (const auto& pm : rep.per_measure)
        f << "bmo_norm," << pm.first << ',' << csv_num(pm.second) << ",," << "\n";
    for (const auto& e : rep.energy_checks) row(e);
    row(rep.apriori);
    row(rep.z_bmo);
    for (const auto& dm : rep.doleans_moments)
        f << "doleans_moment,r=" << csv_num(dm.first) << ',' << csv_num(dm.second) << ",,"
          << "\n";
    const bool all_pass = rep.apriori.pass && rep.z_bmo.pass &&
                          std::all_of(rep.energy_checks.begin(), rep.energy_checks.end(),
                                      [](const CheckResult& c) { return c.pass; });
    ctx.manifest["results"] = {{"bmo_norm_sq", rep.bmo_norm_sq}, {"all_pass", all_pass}};
    std::cout << (all_pass ? "pass" : "fail") << "\n";
    return ctx.finish(0);
}

int run_convergence(RunContext& ctx) {
    const ProblemSpec p = problem_from_config(ctx.cfg);
    if (!validate_or_record(ctx, p)) return ctx.finish(1, "problem validation failed");
    std::vector<double> n_list = ctx.cfg.list("n_list", {50.0, 100.0, 200.0, 400.0});
    std::vector<double> values;
    for (double nd : n_list) {
        const Lattice lat = build_lattice(p, static_cast<int>(nd),
                                          ctx.cfg.number("stddev_mult", 4.0));
        values.push_back(solve_2bsde(p, lat, ctx.cfg.number("tol", 1e-12),
                                     static_cast<int>(ctx.cfg.number("kmax", 200.0)))
                             .value_at_origin(lat));
    }
    const double ref = ctx.cfg.number("reference", values.back());
    std::ofstream f = ctx.open_csv("convergence.csv");
    f << "n,v0,error\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        f << static_cast<int>(n_list[i]) << ',' << csv_num(values[i]) << ','
          << csv_num(std::abs(values[i] - ref)) << "\n";
    ctx.manifest["results"] = {{"reference", ref}, {"finest_v0", values.back()}};
    std::cout << csv_num(values.back()) << "\n";
    return ctx.finish(0);
}

int run_stationarity(RunContext& ctx) {
    const ProblemSpec p = problem_from_config(ctx.cfg);
    if (!validate_or_record(ctx, p)) return ctx.finish(1, "problem validation failed");
    const Lattice lat = lattice_from_config(p, ctx.cfg);
    const StationarityReport rep = stationarity_experiment(
        p, lat, ctx.cfg.list("trunc_list", {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}),
        ctx.cfg.number("tol", 1e-12), static_cast<int>(ctx.cfg.number("kmax", 200.0)));
    std::ofstream f = ctx.open_csv("stationarity.csv");
    f << "n_trunc,v0\n";
    for (std::size_t i = 0; i < rep.n_values.size(); ++i)
        f << csv_num(rep.n_values[i]) << ',' << csv_num(rep.v0_values[i]) << "\n";
    ctx.manifest["results"] = {{"sup_z_untruncated", rep.sup_z_untruncated}};
    if (rep.n_star) ctx.manifest["results"]["n_star"] = *rep.n_star;
    std::cout << (rep.n_star ? csv_num(*rep.n_star) : std::string("none")) << "\n";
    return ctx.finish(0);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadratic 2BSDE laboratory on a volatility band"};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, int (*)(RunContext&)>> commands = {
        {"solve-bsde", run_solve_bsde},       {"solve-2bsde", run_solve_2bsde},
        {"entropic", run_entropic},           {"risk-sensitive", run_risk_sensitive},
        {"pde", run_pde},                     {"cross-validate", run_cross_validate},
        {"diagnostics", run_diagnostics},     {"convergence", run_convergence},
        {"stationarity", run_stationarity}};

    std::string config_path;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("config", config_path, "run configuration file")->required();
        subs[name] = sub;
        (void)fn;
    }
    CLI11_PARSE(app, argc, argv);

    RunContext ctx;
    for (const auto& [name, fn] : commands)
        if (subs[name]->parsed()) ctx.subcommand = name;
    ctx.config_path = config_path;

    // The manifest must exist even when parsing or solving fails, so resolve
    // the output directory as early as possible.
    try {
        ctx.cfg = Config::parse_file(config_path);
        std::string out = ctx.cfg.str("output_dir", ".");
        if (const char* env = std::getenv("Q2B_OUTPUT_DIR")) out = env;
        ctx.out_dir = out;
        std::error_code ec;
        fs::create_directories(ctx.out_dir, ec);
        ctx.manifest["subcommand"] = ctx.subcommand;
        ctx.manifest["version"] = kVersion;
        ctx.manifest["config_path"] = config_path;
        ctx.manifest["artifacts"] = json::array();
        json echo;
        for (const auto& [k, v] : ctx.cfg.entries()) echo[k] = v.raw;
        ctx.manifest["config"] = echo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        for (const auto& [name, fn] : commands)
            if (name == ctx.subcommand) return fn(ctx);
        return ctx.finish(1, "unknown subcommand " + ctx.subcommand);
    } catch (const ConvergenceError& e) {
        return ctx.finish(2, e.what());
    } catch (const std::exception& e) {
        return ctx.finish(1, e.what());
    }
}
