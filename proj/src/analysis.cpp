#include "mfbsde/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfbsde/errors.hpp"

namespace mfbsde::analysis {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

void check_depth(int m) {
    if (m < 1 || m > kMaxIterDepth) {
        std::ostringstream os;
        os << "iterated exp/log depth " << m << " outside [1, " << kMaxIterDepth
           << "]";
        throw DepthError(os.str());
    }
}

// ln^(1)(u), ..., ln^(m)(u) without domain checks; callers validate.
std::array<double, kMaxIterDepth> log_chain(int m, double u) {
    std::array<double, kMaxIterDepth> out{};
    double v = u;
    for (int j = 0; j < m; ++j) {
        v = std::log(v);
        out[static_cast<std::size_t>(j)] = v;
    }
    return out;
}

double il_unchecked(int m, double lambda, double h, double x) {
    const auto logs = log_chain(m, h + x);
    double prod = 1.0;
    for (int i = 0; i + 1 < m; ++i) prod *= std::sqrt(logs[static_cast<std::size_t>(i)]);
    return prod * std::pow(logs[static_cast<std::size_t>(m - 1)], lambda);
}

double phi_unchecked(const TestFunctionParams& p, double t, double x) {
    const double u = p.h + x;
    const double top = log_chain(p.m, u)[static_cast<std::size_t>(p.m - 1)];
    return u * (1.0 - std::pow(top, 1.0 - 2.0 * p.lambda)) *
           std::exp(p.time_rate() * t);
}

double phi_dx_unchecked(const TestFunctionParams& p, double t, double x) {
    const auto logs = log_chain(p.m, p.h + x);
    double prod = 1.0;
    for (int j = 0; j < p.m; ++j) prod *= logs[static_cast<std::size_t>(j)];
    const double top = logs[static_cast<std::size_t>(p.m - 1)];
    const double a = 2.0 * p.lambda - 1.0;
    const double bracket = 1.0 - std::pow(top, -a) * (1.0 - a / prod);
    return bracket * std::exp(p.time_rate() * t);
}

double phi_dxx_unchecked(const TestFunctionParams& p, double t, double x) {
    const double step = std::max(1e-5, 1e-6 * (p.h + x));
    if (x >= step) {
        return (phi_dx_unchecked(p, t, x + step) - phi_dx_unchecked(p, t, x - step)) /
               (2.0 * step);
    }
    // Second-order one-sided stencil near x = 0 keeps h + x inside the domain.
    return (-3.0 * phi_dx_unchecked(p, t, x) + 4.0 * phi_dx_unchecked(p, t, x + step) -
            phi_dx_unchecked(p, t, x + 2.0 * step)) /
           (2.0 * step);
}

struct Simpson {
    const std::function<double(double)>& f;
    int evaluations = 0;
    bool exhausted = false;

    double eval(double x) {
        ++evaluations;
        return f(x);
    }

    double adaptive(double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = eval(lm);
        const double frm = eval(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (depth <= 0) {
            exhausted = true;
            return left + right + delta / 15.0;
        }
        if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
        return adaptive(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               adaptive(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }

    double integrate(double a, double b, double tol) {
        const double fa = eval(a);
        const double fb = eval(b);
        const double fm = eval(0.5 * (a + b));
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        return adaptive(a, b, fa, fm, fb, whole, tol, 48);
    }
};

// Geometric panels [lo, 2 lo], [2 lo, 4 lo], ... isolate the 1/u-type
// behaviour of 1/kappa near 0 and the slow decay at infinity.
std::vector<double> geometric_panels(double lo, double hi, int min_panels) {
    std::vector<double> edges{lo};
    double e = lo;
    while (e * 2.0 < hi) {
        e *= 2.0;
        edges.push_back(e);
    }
    edges.push_back(hi);
    // Refine uniformly if the ratio is small so each panel stays well resolved.
    if (static_cast<int>(edges.size()) - 1 < min_panels) {
        std::vector<double> refined;
        const int extra = (min_panels + static_cast<int>(edges.size()) - 2) /
                          std::max<int>(1, static_cast<int>(edges.size()) - 1);
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            for (int k = 0; k < extra; ++k)
                refined.push_back(edges[i] + (edges[i + 1] - edges[i]) * k / extra);
        }
        refined.push_back(hi);
        edges = std::move(refined);
    }
    return edges;
}

}  // namespace

double iter_exp(int m) {
    check_depth(m);
    double v = std::exp(1.0);
    for (int i = 1; i < m; ++i) v = std::exp(v);
    return v;
}

double iter_ln(int m, double x) {
    check_depth(m);
    const double floor_value = iter_exp(m);
    if (!(x >= floor_value * (1.0 - 1e-14))) {
        std::ostringstream os;
        os << "iter_ln(" << m << ", " << x << "): argument below e^(" << m
           << ") = " << floor_value;
        throw DomainError(os.str());
    }
    return log_chain(m, x)[static_cast<std::size_t>(m - 1)];
}

double il(int m, double lambda, double x) {
    check_depth(m);
    if (!(x >= 0.0)) throw DomainError("il: x must be nonnegative");
    if (!(lambda >= 0.0)) throw DomainError("il: lambda must be nonnegative");
    return il_unchecked(m, lambda, iter_exp(m), x);
}

double il_h(int m, double lambda, double h, double x) {
    check_depth(m);
    if (!(x >= 0.0)) throw DomainError("il_h: x must be nonnegative");
    if (!(h > iter_exp(m))) throw ParameterError("il_h: h must exceed e^(m)");
    return il_unchecked(m, lambda, h, x);
}

double linear_majorant(double growth_a, int m,
                       const std::function<double(double)>& u, double x) {
    if (!(growth_a > 0.0)) throw ParameterError("linear_majorant: A must be positive");
    if (m < 1) throw ParameterError("linear_majorant: m must be >= 1");
    const double slope = static_cast<double>(m) + 2.0 * growth_a;
    return slope * x + u(2.0 * growth_a / slope);
}

double bihari_pi(const BihariSpec& spec, double x) {
    if (!(x > 0.0)) throw DomainError("bihari_pi: x must be positive");
    if (x == 1.0) return 0.0;
    const auto integrand = [&spec](double u) {
        const double k = spec.kappa(u);
        if (!(k > 0.0)) {
            std::ostringstream os;
            os << "kappa(" << u << ") = " << k << " is not positive";
            throw DomainError(os.str());
        }
        return 1.0 / k;
    };
    const std::function<double(double)> f = integrand;
    const double lo = std::min(x, 1.0);
    const double hi = std::max(x, 1.0);
    const auto edges = geometric_panels(lo, hi, std::max(1, spec.quad_points));
    const double tol = 1e-10 / static_cast<double>(edges.size());
    Simpson simpson{f};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        total += simpson.integrate(edges[i], edges[i + 1], tol);
    if (simpson.exhausted || !std::isfinite(total)) {
        std::ostringstream os;
        os << "bihari_pi: quadrature did not converge on [" << lo << ", " << hi
           << "] after " << simpson.evaluations << " evaluations (partial value "
           << total << ")";
        throw NumericError(os.str());
    }
    return x >= 1.0 ? total : -total;
}

double bihari_bound(const BihariSpec& spec, double t) {
    if (!(spec.v0 >= 0.0)) throw ParameterError("bihari_bound: v0 must be >= 0");
    if (!(spec.horizon > 0.0)) throw ParameterError("bihari_bound: horizon must be > 0");
    if (!(t >= 0.0 && t <= spec.horizon))
        throw DomainError("bihari_bound: t outside [0, horizon]");
    if (spec.v0 == 0.0) return 0.0;

    const double target = bihari_pi(spec, spec.v0) + (spec.horizon - t);
    double lo = spec.v0;
    if (spec.horizon - t == 0.0) return lo;
    double hi = 2.0 * lo;
    while (bihari_pi(spec, hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) {
            std::ostringstream os;
            os << "bihari_bound: Pi stays below " << target
               << " on [v0, 1e300]; the bound is infinite";
            throw NumericError(os.str());
        }
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (bihari_pi(spec, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double TestFunctionParams::time_rate() const {
    return 2.0 * (growth_k + 2.0 * gamma * gamma / (2.0 * lambda - 1.0));
}

double TestFunctionParams::q0() const { return std::exp(time_rate() * horizon); }

void TestFunctionParams::validate() const {
    check_depth(m);
    if (!(lambda > 0.5)) throw ParameterError("test function: lambda must exceed 1/2");
    if (!(gamma > 0.0)) throw ParameterError("test function: gamma must be positive");
    if (!(growth_k >= 0.0)) throw ParameterError("test function: K must be >= 0");
    if (!(horizon > 0.0)) throw ParameterError("test function: horizon must be positive");
    if (!(h > iter_exp(m))) {
        std::ostringstream os;
        os << "test function: h = " << h << " must exceed e^(" << m
           << ") = " << iter_exp(m);
        throw ParameterError(os.str());
    }
}

namespace {
void check_point(const TestFunctionParams& p, double t, double x) {
    p.validate();
    if (!(x >= 0.0)) throw DomainError("test function: x must be >= 0");
    if (!(t >= 0.0 && t <= p.horizon * (1.0 + 1e-12)))
        throw DomainError("test function: t outside [0, horizon]");
}
}  // namespace

double test_phi(const TestFunctionParams& p, double t, double x) {
    check_point(p, t, x);
    return phi_unchecked(p, t, x);
}

double phi_dx(const TestFunctionParams& p, double t, double x) {
    check_point(p, t, x);
    return phi_dx_unchecked(p, t, x);
}

double phi_dxx(const TestFunctionParams& p, double t, double x) {
    check_point(p, t, x);
    return phi_dxx_unchecked(p, t, x);
}

double phi_dt(const TestFunctionParams& p, double t, double x) {
    check_point(p, t, x);
    return p.time_rate() * phi_unchecked(p, t, x);
}

double supersolution_residual(const TestFunctionParams& p, double t, double x,
                              double z_norm) {
    check_point(p, t, x);
    if (!(z_norm >= 0.0)) throw DomainError("supersolution_residual: |z| < 0");
    const double dx = phi_dx_unchecked(p, t, x);
    const double dxx = phi_dxx_unchecked(p, t, x);
    const double dt = p.time_rate() * phi_unchecked(p, t, x);
    const double growth = p.gamma * z_norm / il_unchecked(p.m, p.lambda, p.h, z_norm);
    return -p.growth_k * dx * x - dx * growth + 0.5 * dxx * z_norm * z_norm + dt;
}

double sandwich_residual(const TestFunctionParams& p, double t, double x) {
    check_point(p, t, x);
    const double phi = phi_unchecked(p, t, x);
    const double u = p.h + x;
    return std::min(phi - 0.5 * u, p.q0() * u - phi);
}

namespace {

std::vector<double> axis(double max_value, int points, double first_positive) {
    std::vector<double> v{0.0};
    if (points <= 1 || max_value <= 0.0) return v;
    const double lo = std::min(first_positive, max_value);
    const int n = points - 1;
    for (int i = 0; i < n; ++i) {
        const double frac = n == 1 ? 1.0 : static_cast<double>(i) / (n - 1);
        v.push_back(lo * std::pow(max_value / lo, frac));
    }
    return v;
}

}  // namespace

ConstraintCheck check_h_constraints(int m, double lambda, double gamma, double h,
                                    const HSearchGrid& grid) {
    TestFunctionParams p{m, lambda, grid.growth_k, gamma, h, grid.horizon};
    p.validate();
    const auto xs = axis(grid.x_max, grid.x_points, 1e-2);
    const auto zs = axis(grid.z_max, grid.z_points, 1e-3);
    std::vector<double> ts;
    const int nt = std::max(1, grid.t_points);
    for (int i = 0; i < nt; ++i)
        ts.push_back(nt == 1 ? 0.0 : grid.horizon * i / (nt - 1));

    const bool want_sandwich = grid.constraints != HConstraint::supersolution;
    const bool want_super = grid.constraints != HConstraint::sandwich;
    ConstraintCheck out{std::numeric_limits<double>::infinity(), ""};
    for (double t : ts) {
        const double scale_t = std::exp(p.time_rate() * t);
        for (double x : xs) {
            const double u = h + x;
            if (want_sandwich) {
                const double phi = phi_unchecked(p, t, x);
                const double r = std::min(phi / u - 0.5, p.q0() - phi / u);
                if (r < out.worst) out = {r, "sandwich"};
            }
            if (want_super) {
                const double dx = phi_dx_unchecked(p, t, x);
                const double dxx = phi_dxx_unchecked(p, t, x);
                const double dt = p.time_rate() * phi_unchecked(p, t, x);
                for (double z : zs) {
                    const double growth = gamma * z / il_unchecked(m, lambda, h, z);
                    const double r = (-p.growth_k * dx * x - dx * growth +
                                      0.5 * dxx * z * z + dt) /
                                     (scale_t * u);
                    if (r < out.worst) out = {r, "supersolution"};
                }
            }
        }
    }
    return out;
}

HSearchResult find_min_h(int m, double lambda, double gamma,
                         const HSearchGrid& grid) {
    check_depth(m);
    if (!(lambda > 0.5)) throw ParameterError("find_min_h: lambda must exceed 1/2");
    if (!(gamma > 0.0)) throw ParameterError("find_min_h: gamma must be positive");

    // Supersolution residuals carry finite-difference noise in Phi_xx.
    const double tol = grid.constraints == HConstraint::sandwich ? 0.0 : -1e-12;
    const double base = iter_exp(m);
    HSearchResult result;
    const auto feasible = [&](double h, ConstraintCheck& c) {
        c = check_h_constraints(m, lambda, gamma, h, grid);
        ++result.evaluations;
        return c.worst >= tol;
    };

    ConstraintCheck check;
    double lo = base;  // h = e^(m) is never admissible
    ConstraintCheck lo_check{-std::numeric_limits<double>::infinity(), "domain"};
    double hi = 0.0;
    for (int k = 1; k <= 64; ++k) {
        const double h = std::ldexp(base, k);
        if (feasible(h, check)) {
            hi = h;
            break;
        }
        lo = h;
        lo_check = check;
    }
    if (hi == 0.0) {
        std::ostringstream os;
        os << "find_min_h: no h <= e^(" << m << ") 2^64 satisfies the "
           << "constraints; worst violation " << check.worst << " ("
           << check.binding << ")";
        throw SearchError(os.str(), check.worst);
    }
    ConstraintCheck hi_check = check;
    while ((hi - lo) > grid.rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid, check)) {
            hi = mid;
            hi_check = check;
        } else {
            lo = mid;
            lo_check = check;
        }
    }
    result.h = hi;
    result.binding = lo_check.binding;
    result.worst_residual = hi_check.worst;
    return result;
}

AprioriConstants apriori_constants(int m, double lambda, double gamma,
                                   double growth_k, double horizon, double h) {
    TestFunctionParams p{m, lambda, growth_k, gamma, h, horizon};
    p.validate();
    AprioriConstants c;
    c.q0 = p.q0();
    c.h_used = h;
    c.mean_bound_c =
        2.0 * c.q0 * std::max(h, 1.0) * std::exp(2.0 * growth_k * c.q0 * horizon);
    return c;
}

namespace {

double require(const std::map<std::string, double>& c, const std::string& key,
               PartitionMode mode) {
    const auto it = c.find(key);
    if (it == c.end()) {
        throw ConfigError("partition_plan(" + to_string(mode) +
                          "): missing constant '" + key + "'");
    }
    if (!(it->second > 0.0) || !std::isfinite(it->second)) {
        throw ConfigError("partition_plan(" + to_string(mode) + "): constant '" +
                          key + "' must be positive and finite");
    }
    return it->second;
}

double optional_one(const std::map<std::string, double>& c, const std::string& key,
                    PartitionMode mode) {
    return c.count(key) ? require(c, key, mode) : 1.0;
}

}  // namespace

PartitionPlan partition_plan(PartitionMode mode,
                             const std::map<std::string, double>& constants) {
    PartitionPlan plan;
    plan.mode = mode;
    plan.horizon = require(constants, "T", mode);
    const double k = require(constants, "K", mode);
    switch (mode) {
        case PartitionMode::eps_small_alpha: {
            const double c = optional_one(constants, "C", mode);
            const double l = require(constants, "L", mode);
            const double r2 = require(constants, "R2", mode);
            plan.step = std::min({kLn2 / c, 1.0 / (32.0 * l * l),
                                  1.0 / (4.0 * std::sqrt(2.0) * k), kLn2 / (2.0 * r2)});
            break;
        }
        case PartitionMode::delta_large_alpha: {
            const double c = optional_one(constants, "C_r", mode);
            const double l = require(constants, "L", mode);
            const double rv = require(constants, "R_varsigma", mode);
            const double r = require(constants, "r", mode);
            plan.step = std::min(
                {kLn2 / c, std::pow(1.0 / (16.0 * std::pow(2.0 * l, r)), 2.0 / r),
                 std::pow(1.0 / (16.0 * std::pow(2.0 * k, r)), 1.0 / r),
                 kLn2 / (2.0 * rv)});
            break;
        }
        case PartitionMode::upsilon_joint: {
            const double c = optional_one(constants, "C_r0_A_L", mode);
            const double ct = optional_one(constants, "C_tilde_r0", mode);
            const double r0 = require(constants, "r0", mode);
            const double base = 1.0 / (8.0 * std::pow(2.0 * k, r0) * ct);
            plan.step = std::min(
                {kLn2 / c, std::pow(base, 1.0 / r0), std::pow(base, 2.0 / r0)});
            break;
        }
    }

    // Number of intervals; the slack absorbs T/step landing a hair above an
    // integer through rounding.
    const double intervals = std::ceil(plan.horizon / plan.step - 1e-9);
    if (!(intervals <= static_cast<double>(kMaxPartitionIntervals))) {
        std::ostringstream os;
        os << "partition_plan(" << to_string(mode) << "): step " << plan.step << " gives "
           << intervals << " intervals, more than " << kMaxPartitionIntervals;
        throw CapacityError(os.str());
    }
    const auto count = static_cast<long>(intervals);
    for (long j = 1; j <= std::max(1L, count); ++j) {
        const double tj = plan.horizon - static_cast<double>(j) * plan.step;
        plan.breakpoints.push_back(j == std::max(1L, count) ? 0.0 : std::max(tj, 0.0));
    }
    return plan;
}

PartitionMode parse_partition_mode(const std::string& name) {
    if (name == "eps" || name == "eps_small_alpha") return PartitionMode::eps_small_alpha;
    if (name == "delta" || name == "delta_large_alpha")
        return PartitionMode::delta_large_alpha;
    if (name == "upsilon" || name == "upsilon_joint") return PartitionMode::upsilon_joint;
    throw ConfigError("unknown partition mode '" + name + "'");
}

std::string to_string(PartitionMode mode) {
    switch (mode) {
        case PartitionMode::eps_small_alpha: return "eps_small_alpha";
        case PartitionMode::delta_large_alpha: return "delta_large_alpha";
        case PartitionMode::upsilon_joint: return "upsilon_joint";
    }
    return "unknown";
}

double il_ratio_max(int m, double lambda, const std::vector<double>& grid) {
    check_depth(m + 1);
    double worst = 0.0;
    for (double x : grid) worst = std::max(worst, il(m + 1, lambda, x) / il(m, lambda, x));
    return worst;
}

double sublinear_constant(int m, double lambda, double alpha,
                          const std::vector<double>& grid) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ParameterError("sublinear_constant: alpha must lie in (0, 1)");
    double needed = 0.0;
    for (double x : grid)
        needed = std::max(needed, std::pow(x, alpha) - x / il(m, lambda, x));
    return needed;
}

}  // namespace mfbsde::analysis
