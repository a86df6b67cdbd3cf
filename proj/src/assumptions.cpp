#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mfbsde/analysis.hpp"
#include "mfbsde/errors.hpp"
#include "mfbsde/generators.hpp"
#include "mfbsde/parallel.hpp"

namespace mfbsde {

namespace {

double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

template <class T>
const T& need(const std::optional<T>& v, AssumptionId id, const char* what) {
    if (!v) throw ConfigError(to_string(id) + " needs constant '" + what + "'");
    return *v;
}

template <class F>
const F& need_fn(const F& f, AssumptionId id, const char* what) {
    if (!f) throw ConfigError(to_string(id) + " needs function '" + what + "'");
    return f;
}

// One random tuple; every draw comes from a generator keyed by (seed, index).
struct Point {
    double t = 0.0;
    std::vector<double> w, y, y_bar, z, z_bar;
    std::vector<double> cloud, cloud_bar;  // independent clouds
    std::vector<double> lower, upper;      // paired clouds with lower <= upper
};

double magnitude(std::mt19937_64& rng, double max_value) {
    // Half uniform on [0, max], half log-uniform down to 1e-6 max so that the
    // behaviour near 0 is exercised.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < 0.5) return max_value * u(rng);
    return max_value * std::pow(10.0, -6.0 * u(rng));
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t k, double max_norm) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(k);
    for (double& x : v) x = g(rng);
    const double nv = norm(v);
    const double target = magnitude(rng, max_norm);
    for (double& x : v) x = nv > 0.0 ? x * target / nv : 0.0;
    return v;
}

std::vector<double> perturb(std::mt19937_64& rng, const std::vector<double>& base,
                            double max_norm) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < 0.5) return random_vector(rng, base.size(), max_norm);
    const double step = std::pow(10.0, -8.0 * u(rng));
    auto dir = random_vector(rng, base.size(), 1.0);
    const double nd = norm(dir);
    std::vector<double> out = base;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += nd > 0.0 ? step * dir[i] / nd : 0.0;
    return out;
}

std::vector<double> cloud(std::mt19937_64& rng, std::size_t count, std::size_t dim,
                          double scale_max) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    const double scale = scale_max * u(rng);
    std::vector<double> shift(dim);
    for (double& s : shift) s = scale * (2.0 * u(rng) - 1.0);
    std::vector<double> v(count * dim);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t c = 0; c < dim; ++c) v[i * dim + c] = shift[c] + scale * g(rng);
    return v;
}

Point draw(const GeneratorSpec& gen, const SamplerSpec& s, std::size_t index) {
    std::mt19937_64 rng(mix(mix(s.seed) ^ (index + 1)));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    Point p;
    const std::size_t n = gen.dims.n;
    const std::size_t d = gen.dims.d;
    const std::size_t k = gen.law_dim();
    p.t = s.horizon * u(rng);
    p.w.resize(d);
    for (double& x : p.w) x = std::sqrt(p.t) * g(rng);
    p.y = random_vector(rng, n, s.y_max);
    p.y_bar = perturb(rng, p.y, s.y_max);
    p.z = random_vector(rng, n * d, s.z_max);
    p.z_bar = perturb(rng, p.z, s.z_max);
    p.cloud = cloud(rng, s.cloud_size, k, s.cloud_scale_max);
    p.cloud_bar = cloud(rng, s.cloud_size, k, s.cloud_scale_max);
    p.lower = cloud(rng, s.cloud_size, k, s.cloud_scale_max);
    p.upper = p.lower;
    const double gap = s.cloud_scale_max * u(rng);
    for (double& x : p.upper) x += gap * std::abs(g(rng));
    return p;
}

struct Evaluator {
    const GeneratorSpec& gen;
    std::vector<double> buf;

    std::vector<double> f(const Point& p, std::span<const double> y,
                          std::span<const double> z, const EmpiricalMeasure& mu) {
        buf.assign(gen.dims.n, 0.0);
        gen.eval(p.t, p.w, y, z, mu, buf);
        return buf;
    }
};

double diff_norm(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double il_term(const AssumptionParams& prm, AssumptionId id, double x) {
    const int m = static_cast<int>(need(prm.m, id, "m"));
    const double lambda = need(prm.lambda, id, "lambda");
    return prm.il_shift ? analysis::il_h(m, lambda, *prm.il_shift, x)
                        : analysis::il(m, lambda, x);
}

void require_scalar(const GeneratorSpec& gen, AssumptionId id) {
    if (gen.dims.n != 1)
        throw ShapeError(to_string(id) + " is a one-dimensional assumption; generator has n = " +
                         std::to_string(gen.dims.n));
}

double residual(const GeneratorSpec& gen, AssumptionId id, const SamplerSpec& s,
                const Point& p, std::string* detail) {
    const auto& prm = gen.params;
    const std::size_t k = gen.law_dim();
    Evaluator ev{gen, {}};
    const EmpiricalMeasure mu(p.cloud, k);
    std::ostringstream os;
    os.precision(17);
    double r = 0.0;

    switch (id) {
        case AssumptionId::A1: {
            const auto& rho = need_fn(prm.rho, id, "rho");
            const EmpiricalMeasure mu_bar(p.cloud_bar, k);
            const double w1 = w1_exact(mu, mu_bar);
            const double lhs = diff_norm(ev.f(p, p.y, p.z, mu), ev.f(p, p.y, p.z, mu_bar));
            r = lhs - rho(w1);
            os << "|f(mu)-f(mu_bar)|=" << lhs << " W1=" << w1;
            break;
        }
        case AssumptionId::A2: {
            require_scalar(gen, id);
            const auto& theta = need_fn(prm.theta, id, "theta");
            const double K = need(prm.growth_k, id, "K");
            const double gamma = need(prm.gamma, id, "gamma");
            const double zn = norm(p.z);
            const double sgn = p.y[0] > 0.0 ? 1.0 : -1.0;
            const double lhs = sgn * ev.f(p, p.y, p.z, mu)[0];
            const double rhs = theta(p.t, p.w) + K * std::abs(p.y[0]) + K * w1_to_dirac0(mu) +
                               gamma * zn / il_term(prm, id, zn);
            r = lhs - rhs;
            os << "sgn(y)f=" << lhs << " bound=" << rhs;
            break;
        }
        case AssumptionId::A3: {
            require_scalar(gen, id);
            const auto& theta = need_fn(prm.theta, id, "theta");
            const auto& psi = need_fn(prm.psi, id, "psi");
            const double gamma0 = need(prm.gamma0, id, "gamma0");
            const double zn = norm(p.z);
            const double lhs = std::abs(ev.f(p, p.y, p.z, mu)[0]);
            const double rhs = theta(p.t, p.w) +
                               psi(std::max(std::abs(p.y[0]), w1_to_dirac0(mu))) +
                               gamma0 * zn * zn;
            r = lhs - rhs;
            os << "|f|=" << lhs << " bound=" << rhs;
            break;
        }
        case AssumptionId::A4: {
            require_scalar(gen, id);
            const EmpiricalMeasure lo(p.lower, k);
            const EmpiricalMeasure hi(p.upper, k);
            const double a = ev.f(p, p.y, p.z, lo)[0];
            const double b = ev.f(p, p.y, p.z, hi)[0];
            r = a - b;
            os << "f(lower)=" << a << " f(upper)=" << b;
            break;
        }
        case AssumptionId::A5: {
            require_scalar(gen, id);
            const auto& kappa = need_fn(prm.kappa, id, "kappa");
            std::vector<double> y1 = p.y, y2 = p.y_bar;
            if (y1[0] < y2[0]) std::swap(y1, y2);
            if (y1[0] == y2[0]) return -std::numeric_limits<double>::infinity();
            const double lhs = ev.f(p, y1, p.z, mu)[0] - ev.f(p, y2, p.z, mu)[0];
            r = lhs - kappa(y1[0] - y2[0]);
            os << "y=" << y1[0] << " y_bar=" << y2[0] << " df=" << lhs;
            break;
        }
        case AssumptionId::A6: {
            require_scalar(gen, id);
            const auto& zeta = need_fn(prm.zeta, id, "zeta");
            const double dz = diff_norm(p.z, p.z_bar);
            const double lhs = diff_norm(ev.f(p, p.y, p.z, mu), ev.f(p, p.y, p.z_bar, mu));
            r = lhs - zeta(dz / il_term(prm, id, dz));
            os << "|dz|=" << dz << " |df|=" << lhs;
            break;
        }
        case AssumptionId::A7: {
            require_scalar(gen, id);
            const double L = need(prm.lips_mu, id, "L");
            const EmpiricalMeasure mu_bar(p.cloud_bar, k);
            double plus = 0.0;
            for (std::size_t i = 0; i < p.cloud.size(); ++i)
                plus += std::max(p.cloud[i] - p.cloud_bar[i], 0.0);
            plus /= static_cast<double>(p.cloud.size());
            const double lhs = ev.f(p, p.y, p.z, mu)[0] - ev.f(p, p.y, p.z, mu_bar)[0];
            r = lhs - L * plus;
            os << "df=" << lhs << " E(eta-eta_bar)+=" << plus;
            break;
        }
        case AssumptionId::H1: {
            const auto& eta = need_fn(prm.eta, id, "eta");
            const double dy = diff_norm(p.y, p.y_bar);
            if (dy == 0.0) return -std::numeric_limits<double>::infinity();
            const auto f1 = ev.f(p, p.y, p.z, mu);
            const auto f2 = ev.f(p, p.y_bar, p.z, mu);
            double inner = 0.0;
            for (std::size_t i = 0; i < f1.size(); ++i)
                inner += (p.y[i] - p.y_bar[i]) / dy * (f1[i] - f2[i]);
            r = inner - eta(dy);
            os << "|dy|=" << dy << " <e,df>=" << inner;
            break;
        }
        case AssumptionId::H2:
        case AssumptionId::B2: {
            const double K = need(prm.growth_k, id, "K");
            const EmpiricalMeasure mu_bar(p.cloud_bar, k);
            const double w1 = w1_exact(mu, mu_bar);
            const double lhs = diff_norm(ev.f(p, p.y, p.z, mu), ev.f(p, p.y, p.z, mu_bar));
            r = lhs - K * w1;
            os << "|df|=" << lhs << " W1=" << w1;
            break;
        }
        case AssumptionId::H3:
        case AssumptionId::B3: {
            const double L = need(prm.lips_z, id, "L");
            const double M = need(prm.growth_m, id, "M");
            const double alpha = need(prm.alpha, id, "alpha");
            const auto& vartheta = need_fn(prm.vartheta, id, "vartheta");
            const std::vector<double> zero_z(p.z.size(), 0.0);
            const auto fz = ev.f(p, p.y, p.z, mu);
            const double lips = diff_norm(fz, ev.f(p, p.y, p.z_bar, mu)) -
                                L * diff_norm(p.z, p.z_bar);
            const double growth =
                diff_norm(fz, ev.f(p, p.y, zero_z, mu)) -
                M * std::pow(vartheta(p.t, p.w) + norm(p.y) + w1_to_dirac0(mu) + norm(p.z),
                             alpha);
            r = std::max(lips, growth);
            os << "lipschitz residual=" << lips << " growth residual=" << growth;
            break;
        }
        case AssumptionId::H4:
        case AssumptionId::B4: {
            const auto& phi_bar = need_fn(prm.phi_bar, id, "phi_bar");
            const EmpiricalMeasure delta0 = EmpiricalMeasure::dirac0(k, 1);
            const std::vector<double> zero_z(p.z.size(), 0.0);
            const auto f0 = ev.f(p, p.y, zero_z, delta0);
            const double bound = std::abs(norm(f0)) - phi_bar(norm(p.y), p.t, p.w);
            // Continuity in y at the sampled (z, mu).
            const double h = 1e-9;
            std::vector<double> yh = p.y;
            yh[0] += h;
            const auto fa = ev.f(p, p.y, p.z, mu);
            const auto fb = ev.f(p, yh, p.z, mu);
            const double jump = diff_norm(fa, fb) - 1e-4 * (1.0 + norm(fa));
            r = std::max(bound, jump);
            os << "sup-bound residual=" << bound << " continuity residual=" << jump;
            break;
        }
        case AssumptionId::B1: {
            const double A = need(prm.mono_a, id, "A");
            const auto f1 = ev.f(p, p.y, p.z, mu);
            const auto f2 = ev.f(p, p.y_bar, p.z, mu);
            double inner = 0.0;
            for (std::size_t i = 0; i < f1.size(); ++i)
                inner += (p.y[i] - p.y_bar[i]) * (f1[i] - f2[i]);
            const double dy = diff_norm(p.y, p.y_bar);
            r = inner - A * dy * dy;
            os << "<dy,df>=" << inner << " |dy|=" << dy;
            break;
        }
    }
    (void)s;
    if (detail) *detail = os.str();
    if (std::isnan(r))
        throw NumericError(to_string(id) + ": residual is NaN at sample " + os.str());
    return r;
}

}  // namespace

double assumption_residual_at(const GeneratorSpec& gen, AssumptionId which,
                              const SamplerSpec& sampler, std::size_t index,
                              AssumptionWitness* witness) {
    const Point p = draw(gen, sampler, index);
    std::string detail;
    const double r = residual(gen, which, sampler, p, witness ? &detail : nullptr);
    if (witness) {
        witness->index = index;
        witness->t = p.t;
        witness->w = p.w;
        witness->y = p.y;
        witness->y_bar = p.y_bar;
        witness->z = p.z;
        witness->z_bar = p.z_bar;
        witness->detail = detail;
    }
    return r;
}

AssumptionReport check_assumption(const GeneratorSpec& gen, AssumptionId which,
                                  const SamplerSpec& sampler, std::size_t n_points) {
    if (!gen.eval) throw ConfigError("check_assumption: generator has no eval");
    if (n_points == 0) throw ParameterError("check_assumption: n_points must be >= 1");
    std::vector<double> res(n_points);
    parallel_for(n_points, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const Point p = draw(gen, sampler, i);
            res[i] = residual(gen, which, sampler, p, nullptr);
        }
    });
    std::size_t worst = 0;
    for (std::size_t i = 1; i < n_points; ++i)
        if (res[i] > res[worst]) worst = i;
    AssumptionReport report;
    report.id = which;
    report.points_tested = n_points;
    report.seed = sampler.seed;
    report.worst_residual = assumption_residual_at(gen, which, sampler, worst, &report.witness);
    if (!std::isfinite(report.worst_residual) && report.worst_residual > 0)
        throw NumericError(to_string(which) + ": infinite residual at sample " +
                           std::to_string(worst));
    return report;
}

}  // namespace mfbsde
