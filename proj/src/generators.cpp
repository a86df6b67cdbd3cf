#include "mfbsde/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfbsde/analysis.hpp"
#include "mfbsde/errors.hpp"

namespace mfbsde {

namespace {

double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

void require_dims(const Dims& dims, Example which, bool scalar_y, bool scalar_z = false) {
    if (dims.n == 0 || dims.d == 0)
        throw ConfigError(to_string(which) + ": dimensions must be >= 1");
    if (scalar_y && dims.n != 1)
        throw ConfigError(to_string(which) + " requires n = 1, got n = " +
                          std::to_string(dims.n));
    if (scalar_z && dims.d != 1)
        throw ConfigError(to_string(which) + " requires d = 1, got d = " +
                          std::to_string(dims.d));
}

ProcessFn abs_w_plus(double c) {
    return [c](double, std::span<const double> w) { return norm(w) + c; };
}

ProcessFn exp_abs_w_plus(double c) {
    return [c](double, std::span<const double> w) { return std::exp(norm(w)) + c; };
}

ProcessFn constant_process(double c) {
    return [c](double, std::span<const double>) { return c; };
}

// s / IL_2^lambda(s) with the canonical shift.
double z_ratio(double lambda, double s) { return s / analysis::il(2, lambda, s); }

// Inverse of s -> s / IL_2^{3/4}(s) by bisection; the map is increasing.
double z_ratio_inverse(double v) {
    if (v <= 0.0) return 0.0;
    double lo = 0.0;
    double hi = std::max(1.0, v);
    while (z_ratio(0.75, hi) < v) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (z_ratio(0.75, mid) < v ? lo : hi) = mid;
    }
    return hi;
}

GeneratorSpec ex_3_2(Dims dims) {
    require_dims(dims, Example::ex_3_2, true);
    GeneratorSpec g;
    g.name = "ex_3_2";
    g.dims = dims;
    g.eval = [](double, std::span<const double> w, std::span<const double> y,
                std::span<const double> z, const EmpiricalMeasure& mu, std::span<double> out) {
        const double zn = norm(z);
        const double c = std::cos(zn);
        const double s = std::sin(y[0]);
        const double sgn = y[0] > 0.0 ? 1.0 : (y[0] < 0.0 ? -1.0 : 0.0);
        out[0] = norm(w) - std::exp(y[0]) * c * c + std::abs(y[0]) +
                 2.0 * zn * std::sin(zn) / analysis::il(2, 5.0 / 6.0, zn) -
                 sgn * s * s * zn * zn + std::cbrt(mu.mean_plus()) + mu.mean()[0];
    };
    auto& p = g.params;
    p.rho = [](double x) { return x + std::cbrt(x); };
    p.theta = abs_w_plus(2.0);
    p.growth_k = 2.0;
    p.gamma = 2.0;
    p.m = 2.0;
    p.lambda = 5.0 / 6.0;
    p.gamma0 = 2.0;
    p.psi = [](double u) { return std::exp(u) + 3.0 * u; };
    g.declared = {AssumptionId::A1, AssumptionId::A2, AssumptionId::A3, AssumptionId::A4};
    return g;
}

GeneratorSpec ex_3_3(Dims dims) {
    require_dims(dims, Example::ex_3_3, true);
    GeneratorSpec g;
    g.name = "ex_3_3";
    g.dims = dims;
    g.eval = [](double, std::span<const double> w, std::span<const double> y,
                std::span<const double> z, const EmpiricalMeasure& mu, std::span<double> out) {
        const double zn = norm(z);
        const double mean = mu.mean()[0];
        const double y6 = y[0] <= 0.0 ? std::pow(y[0], 6) : 0.0;
        out[0] = std::exp(norm(w)) + y6 + splice_phi(std::abs(y[0])) + std::cos(zn) +
                 std::pow(zn, 5.0 / 6.0) + zn / std::log(std::numbers::e + zn) +
                 z_ratio(0.75, zn) + std::atan(mean) + 2.0 * mean;
    };
    auto& p = g.params;
    p.rho = [](double x) { return 3.0 * x; };
    p.kappa = splice_phi;
    p.m = 2.0;
    p.lambda = 0.75;
    p.lips_mu = 3.0;
    // Constants for A2, A3, A6 that the example leaves implicit.
    p.theta = exp_abs_w_plus(6.0);
    p.growth_k = 2.0;
    p.gamma = 4.0;
    p.gamma0 = 1.0;
    p.psi = [](double u) { return std::pow(u, 6) + 4.2 * u + 0.2; };
    p.zeta = [](double v) {
        const double u = z_ratio_inverse(v);
        return std::min(u, 2.0) + std::pow(u, 5.0 / 6.0) + u / std::log(std::numbers::e + u) +
               v;
    };
    g.declared = {AssumptionId::A1, AssumptionId::A2, AssumptionId::A3, AssumptionId::A4,
                  AssumptionId::A5, AssumptionId::A6, AssumptionId::A7};
    return g;
}

GeneratorSpec ex_4_3(Dims dims) {
    require_dims(dims, Example::ex_4_3, false);
    GeneratorSpec g;
    g.name = "ex_4_3";
    g.dims = dims;
    g.eval = [](double, std::span<const double> w, std::span<const double> y,
                std::span<const double> z, const EmpiricalMeasure& mu, std::span<double> out) {
        const double wn = norm(w);
        const double zn = norm(z);
        const double zterm = 2.0 * zn / (1.0 + zn);
        for (std::size_t i = 0; i < y.size(); ++i)
            out[i] = wn - y[i] * y[i] * y[i] + zterm + 3.0 * mu.mean()[i];
    };
    const double rn = std::sqrt(static_cast<double>(dims.n));
    auto& p = g.params;
    p.eta = [](double x) { return x; };
    p.growth_k = 3.0;
    p.lips_z = 2.0 * rn;
    p.growth_m = 2.0 * rn;
    p.vartheta = constant_process(1.0);
    p.alpha = 1.0 / 3.0;
    p.phi_bar = [rn](double r, double, std::span<const double> w) {
        return rn * (norm(w) + r * r * r);
    };
    g.declared = {AssumptionId::H1, AssumptionId::H2, AssumptionId::H3, AssumptionId::H4};
    return g;
}

GeneratorSpec ex_4_4(Dims dims) {
    require_dims(dims, Example::ex_4_4, false);
    GeneratorSpec g;
    g.name = "ex_4_4";
    g.dims = dims;
    g.eval = [](double, std::span<const double> w, std::span<const double> y,
                std::span<const double> z, const EmpiricalMeasure& mu, std::span<double> out) {
        const double ew = std::exp(norm(w));
        const double zn = norm(z);
        const double psi_y = splice_psi(norm(y));
        const double law = 3.0 * mu.mean_norm();
        for (std::size_t i = 0; i < y.size(); ++i)
            out[i] = ew - std::exp(y[i]) + psi_y + 2.0 * std::atan(zn) +
                     std::min(std::exp(-y[i]), 1.0) * std::abs(std::sin(zn)) + law;
    };
    const double rn = std::sqrt(static_cast<double>(dims.n));
    auto& p = g.params;
    p.eta = [rn](double x) { return rn * splice_psi(x); };
    p.growth_k = 3.0 * rn;
    p.lips_z = 3.0 * rn;
    p.growth_m = (std::numbers::pi + 1.0) * rn;
    p.vartheta = constant_process(1.0);
    p.alpha = 0.25;
    p.phi_bar = [rn](double r, double, std::span<const double> w) {
        return rn * (std::exp(norm(w)) + std::exp(r) + splice_psi(r));
    };
    g.declared = {AssumptionId::H1, AssumptionId::H2, AssumptionId::H3, AssumptionId::H4};
    return g;
}

GeneratorSpec ex_pre_4_11(Dims dims) {
    require_dims(dims, Example::ex_pre_4_11, false);
    GeneratorSpec g;
    g.name = "ex_pre_4_11";
    g.dims = dims;
    g.law_mode = LawMode::law_of_yz;
    g.eval = [](double, std::span<const double> w, std::span<const double> y,
                std::span<const double> z, const EmpiricalMeasure& mu, std::span<double> out) {
        const double wn = norm(w);
        const double zn = norm(z);
        const double zterm =
            zn / (1.0 + zn) + std::min(zn * zn * zn, std::pow(zn, 0.75));
        const double law = 3.0 * mu.mean_norm();
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double y2 = y[i] * y[i];
            out[i] = wn + 2.0 * y[i] - 2.0 * y2 * y2 * y[i] + zterm + law;
        }
    };
    const double rn = std::sqrt(static_cast<double>(dims.n));
    auto& p = g.params;
    p.mono_a = 2.0;
    p.growth_k = 3.0 * rn;
    p.lips_z = 4.0 * rn;
    p.growth_m = 2.0 * rn;
    p.vartheta = constant_process(1.0);
    p.alpha = 0.75;
    p.phi_bar = [rn](double r, double, std::span<const double> w) {
        const double r2 = r * r;
        return rn * (norm(w) + 2.0 * r + 2.0 * r2 * r2 * r);
    };
    g.declared = {AssumptionId::B1, AssumptionId::B2, AssumptionId::B3, AssumptionId::B4};
    return g;
}

GeneratorSpec zero(Dims dims) {
    require_dims(dims, Example::zero, false);
    GeneratorSpec g;
    g.name = "zero";
    g.dims = dims;
    g.eval = [](double, std::span<const double>, std::span<const double>,
                std::span<const double>, const EmpiricalMeasure&, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
    };
    g.params.theta = constant_process(0.0);
    g.params.growth_k = 0.0;
    g.params.gamma = 1.0;
    g.params.m = 1.0;
    g.params.lambda = 1.0;
    return g;
}

GeneratorSpec linear_meanfield(Dims dims, double a, double b) {
    require_dims(dims, Example::linear_meanfield, false);
    GeneratorSpec g;
    g.name = "linear_meanfield";
    g.dims = dims;
    g.eval = [a, b](double, std::span<const double>, std::span<const double> y,
                    std::span<const double>, const EmpiricalMeasure& mu,
                    std::span<double> out) {
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = a * mu.mean()[i] + b * y[i];
    };
    g.params.growth_k = std::abs(a);
    g.params.mono_a = std::max(b, 0.0);
    g.params.lips_z = 1.0;
    return g;
}

GeneratorSpec pure_z(Dims dims) {
    require_dims(dims, Example::pure_z, true, true);
    GeneratorSpec g;
    g.name = "pure_z";
    g.dims = dims;
    g.eval = [](double, std::span<const double>, std::span<const double>,
                std::span<const double> z, const EmpiricalMeasure&, std::span<double> out) {
        out[0] = z[0];
    };
    g.params.lips_z = 1.0;
    return g;
}

GeneratorSpec broken_a2(Dims dims) {
    require_dims(dims, Example::broken_a2, true);
    GeneratorSpec g;
    g.name = "broken_a2";
    g.dims = dims;
    g.eval = [](double, std::span<const double>, std::span<const double> y,
                std::span<const double>, const EmpiricalMeasure&, std::span<double> out) {
        out[0] = 2.0 * y[0];
    };
    // Claims a growth constant half of the true one.
    g.params.theta = constant_process(0.0);
    g.params.growth_k = 1.0;
    g.params.gamma = 1.0;
    g.params.m = 1.0;
    g.params.lambda = 1.0;
    g.declared = {AssumptionId::A2};
    return g;
}

}  // namespace

std::vector<double> GeneratorSpec::operator()(double t, std::span<const double> w,
                                              std::span<const double> y,
                                              std::span<const double> z,
                                              const EmpiricalMeasure& mu) const {
    std::vector<double> out(dims.n);
    eval(t, w, y, z, mu, out);
    return out;
}

double splice_phi(double u) {
    if (u <= 0.0) return 0.0;
    const auto piece = [](double x) {
        const double l = -std::log(x);
        return x * l * std::log(l);
    };
    if (u <= kPhiSplice) return piece(u);
    const double l = -std::log(kPhiSplice);
    const double slope = (l - 1.0) * std::log(l) - 1.0;
    return slope * (u - kPhiSplice) + piece(kPhiSplice);
}

double splice_psi(double u) {
    if (u <= 0.0) return 0.0;
    if (u <= kPsiSplice) return -u * std::log(u);
    const double l = -std::log(kPsiSplice);
    return (l - 1.0) * (u - kPsiSplice) + kPsiSplice * l;
}

GeneratorSpec make_example(Example which, Dims dims, const ExampleOptions& opts) {
    switch (which) {
        case Example::ex_3_2: return ex_3_2(dims);
        case Example::ex_3_3: return ex_3_3(dims);
        case Example::ex_4_3: return ex_4_3(dims);
        case Example::ex_4_4: return ex_4_4(dims);
        case Example::ex_pre_4_11: return ex_pre_4_11(dims);
        case Example::zero: return zero(dims);
        case Example::linear_meanfield: return linear_meanfield(dims, opts.a, opts.b);
        case Example::pure_z: return pure_z(dims);
        case Example::broken_a2: return broken_a2(dims);
        case Example::custom: break;
    }
    throw ConfigError("custom generators have no built-in formula; construct a GeneratorSpec "
                      "directly");
}

Example parse_example(const std::string& name) {
    static const std::pair<const char*, Example> table[] = {
        {"ex_3_2", Example::ex_3_2},
        {"ex_3_3", Example::ex_3_3},
        {"ex_4_3", Example::ex_4_3},
        {"ex_4_4", Example::ex_4_4},
        {"ex_pre_4_11", Example::ex_pre_4_11},
        {"zero", Example::zero},
        {"linear_meanfield", Example::linear_meanfield},
        {"pure_z", Example::pure_z},
        {"broken_a2", Example::broken_a2},
        {"custom", Example::custom},
    };
    for (const auto& [key, value] : table)
        if (name == key) return value;
    throw ConfigError("unknown generator '" + name + "'");
}

std::string to_string(Example which) {
    switch (which) {
        case Example::ex_3_2: return "ex_3_2";
        case Example::ex_3_3: return "ex_3_3";
        case Example::ex_4_3: return "ex_4_3";
        case Example::ex_4_4: return "ex_4_4";
        case Example::ex_pre_4_11: return "ex_pre_4_11";
        case Example::zero: return "zero";
        case Example::linear_meanfield: return "linear_meanfield";
        case Example::pure_z: return "pure_z";
        case Example::broken_a2: return "broken_a2";
        case Example::custom: return "custom";
    }
    return "unknown";
}

AssumptionId parse_assumption(const std::string& name) {
    static const char* names[] = {"A1", "A2", "A3", "A4", "A5", "A6", "A7", "H1",
                                  "H2", "H3", "H4", "B1", "B2", "B3", "B4"};
    for (std::size_t i = 0; i < std::size(names); ++i)
        if (name == names[i]) return static_cast<AssumptionId>(i);
    throw ConfigError("unknown assumption '" + name + "'");
}

std::string to_string(AssumptionId id) {
    static const char* names[] = {"A1", "A2", "A3", "A4", "A5", "A6", "A7", "H1",
                                  "H2", "H3", "H4", "B1", "B2", "B3", "B4"};
    return names[static_cast<std::size_t>(id)];
}

GeneratorSpec truncate_generator(const GeneratorSpec& gen, double n_up, double k_low) {
    if (!(n_up >= 0.0) || !(k_low >= 0.0))
        throw ParameterError("truncate_generator: truncation levels must be >= 0");
    GeneratorSpec out = gen;
    out.name = gen.name + "_truncated";
    out.eval = [inner = gen.eval, n_up, k_low](double t, std::span<const double> w,
                                              std::span<const double> y,
                                              std::span<const double> z,
                                              const EmpiricalMeasure& mu,
                                              std::span<double> res) {
        inner(t, w, y, z, mu, res);
        for (double& v : res)
            v = std::min(std::max(v, 0.0), n_up) - std::min(std::max(-v, 0.0), k_low);
    };
    out.declared.clear();
    return out;
}

GeneratorSpec shift_generator(const GeneratorSpec& gen, double shift) {
    GeneratorSpec out = gen;
    out.name = gen.name + "_shifted";
    out.eval = [inner = gen.eval, shift](double t, std::span<const double> w,
                                         std::span<const double> y,
                                         std::span<const double> z,
                                         const EmpiricalMeasure& mu, std::span<double> res) {
        inner(t, w, y, z, mu, res);
        for (double& v : res) v += shift;
    };
    out.declared.clear();
    return out;
}

ClosedForm closed_form_solution(Benchmark which, const BenchmarkParams& p, double t,
                                double w) {
    if (!(t >= 0.0 && t <= p.horizon))
        throw DomainError("closed_form_solution: t outside [0, T]");
    switch (which) {
        case Benchmark::zero: return {{w}, {1.0}};
        case Benchmark::linear_meanfield:
            return {{p.c * std::exp((p.a + p.b) * (p.horizon - t))}, {0.0}};
        case Benchmark::pure_z: return {{w + p.horizon - t}, {1.0}};
    }
    throw UnsupportedError("closed_form_solution: no known solution");
}

}  // namespace mfbsde
