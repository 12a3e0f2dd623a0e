#include "q2b/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "q2b/errors.hpp"

namespace q2b {

namespace {

double param(const std::map<std::string, double>& params, const std::string& key,
             double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

} // namespace

GeneratorSpec make_generator(const std::string& name,
                             const std::map<std::string, double>& params, double a_low) {
    if (!(a_low > 0.0)) throw ConfigError("make_generator: a_low must be positive");
    GeneratorSpec gen;
    gen.name = name;
    if (name == "zero") {
        gen.f = [](double, double, double, double, double) { return 0.0; };
        gen.gamma_q = 1.0;
    } else if (name == "linear_z") {
        const double k = param(params, "k", 1.0);
        gen.f = [k](double, double, double, double z, double) { return k * z; };
        gen.gamma_q = 1.0;
        gen.alpha = k * k / (2.0 * gen.gamma_q * a_low);
        gen.phi_bound = std::abs(k) / std::sqrt(a_low);
    } else if (name == "purely_quadratic") {
        const double gamma = param(params, "gamma", 2.0);
        if (!(gamma > 0.0)) throw ConfigError("purely_quadratic: gamma must be positive");
        gen.f = [gamma](double, double, double, double z, double a) {
            return 0.5 * gamma * a * z * z;
        };
        gen.gamma_q = gamma;
        gen.mu = 0.5 * gamma;
        gen.pure_quadratic_gamma = gamma;
    } else if (name == "quadratic_plus_linear") {
        const double gamma = param(params, "gamma", 2.0);
        const double k = param(params, "k", 1.0);
        if (!(gamma > 0.0)) throw ConfigError("quadratic_plus_linear: gamma must be positive");
        gen.f = [gamma, k](double, double, double, double z, double a) {
            return k * z + 0.5 * gamma * a * z * z;
        };
        gen.gamma_q = 2.0 * gamma;
        gen.alpha = k * k / (2.0 * gamma * a_low);
        gen.mu = 0.5 * gamma;
        gen.phi_bound = std::abs(k) / std::sqrt(a_low);
    } else if (name == "risk_sensitive_inner") {
        const double theta = param(params, "theta", 1.0);
        const double g0 = param(params, "g0", 0.0);
        const double h0 = param(params, "h0", 0.0);
        if (!(theta > 0.0)) throw ConfigError("risk_sensitive_inner: theta must be positive");
        gen.f = [theta, g0, h0](double, double, double, double z, double a) {
            return z * g0 + h0 + 0.5 * theta * a * z * z;
        };
        gen.gamma_q = 2.0 * theta;
        gen.alpha = std::abs(h0) + g0 * g0 / (2.0 * theta * a_low);
        gen.mu = 0.5 * theta;
        gen.phi_bound = std::abs(g0) / std::sqrt(a_low);
        if (g0 == 0.0 && h0 == 0.0) gen.pure_quadratic_gamma = theta;
    } else {
        throw ConfigError("unknown generator '" + name + "'");
    }
    return gen;
}

TerminalSpec make_terminal(const std::string& name, double clip, double c) {
    if (!(clip > 0.0)) throw ConfigError("make_terminal: clip range must be positive");
    TerminalSpec t;
    t.name = name;
    auto clipped = [clip](double x) { return std::clamp(x, -clip, clip); };
    if (name == "constant") {
        t.g = [c](double) { return c; };
        t.bound = std::abs(c);
    } else if (name == "identity") {
        t.g = [clipped, c](double x) { return clipped(x) + c; };
        t.bound = clip + std::abs(c);
    } else if (name == "square") {
        t.g = [clipped, c](double x) { const double u = clipped(x); return u * u + c; };
        t.bound = clip * clip + std::abs(c);
    } else if (name == "neg_square") {
        t.g = [clipped, c](double x) { const double u = clipped(x); return -u * u + c; };
        t.bound = clip * clip + std::abs(c);
    } else if (name == "cubic") {
        t.g = [clipped, c](double x) { const double u = clipped(x); return u * u * u + c; };
        t.bound = clip * clip * clip + std::abs(c);
    } else {
        throw ConfigError("unknown terminal '" + name + "'");
    }
    return t;
}

TerminalSpec shift_terminal(const TerminalSpec& base, double m) {
    TerminalSpec t;
    t.name = base.name + "_shifted";
    auto g = base.g;
    t.g = [g, m](double x) { return g(x) + m; };
    t.bound = base.bound + std::abs(m);
    return t;
}

} // namespace q2b
