#include "mfbsde/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfbsde/errors.hpp"

namespace mfbsde {

namespace {

double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace

std::vector<double> theta_integral(const ProcessFn& theta, const BrownianPaths& paths) {
    const std::size_t N = paths.particles();
    std::vector<double> out(N, 0.0);
    if (!theta) return out;
    const double dt = paths.grid().dt();
    for (std::size_t p = 0; p < N; ++p)
        for (std::size_t i = 0; i < paths.grid().steps(); ++i)
            out[p] += theta(paths.grid().node(i), paths.state(p, i)) * dt;
    return out;
}

AprioriReport check_apriori(const SolutionField& sol, std::span<const double> xi,
                            std::span<const double> theta_integrals,
                            const analysis::AprioriConstants& consts) {
    const std::size_t N = sol.particles();
    const std::size_t n = sol.n();
    if (xi.size() != N * n) throw ShapeError("check_apriori: xi must be N x n");
    if (theta_integrals.size() != N)
        throw ShapeError("check_apriori: need one theta integral per particle");
    double mean_xi = 0.0;
    for (std::size_t p = 0; p < N; ++p) mean_xi += norm(xi.subspan(p * n, n));
    mean_xi /= static_cast<double>(N);
    double mean_theta = 0.0;
    for (double v : theta_integrals) mean_theta += v;
    mean_theta /= static_cast<double>(N);

    AprioriReport rep;
    const double C = consts.mean_bound_c;
    rep.bound = C * (mean_xi + mean_theta) + C;
    rep.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= sol.grid().steps(); ++i) {
        const double m = sol.mean_abs_y(i);
        rep.mean_abs_y.push_back(m);
        const double margin = rep.bound - m;
        if (margin < rep.margin) {
            rep.margin = margin;
            rep.worst_node = i;
        }
    }
    return rep;
}

ComparisonReport check_comparison(const SolutionField& sol1, const SolutionField& sol2,
                                  double tol) {
    if (!(sol1.grid() == sol2.grid()) || sol1.particles() != sol2.particles())
        throw ShapeError("check_comparison: fields live on different grids or particle sets");
    if (sol1.n() != 1 || sol2.n() != 1)
        throw ShapeError("check_comparison: only one-dimensional Y is ordered");
    ComparisonReport rep;
    const std::size_t N = sol1.particles();
    for (std::size_t i = 0; i <= sol1.grid().steps(); ++i) {
        std::size_t bad = 0;
        for (std::size_t p = 0; p < N; ++p)
            if (sol1.y_at(i, p) > sol2.y_at(i, p) + tol) ++bad;
        const double frac = static_cast<double>(bad) / static_cast<double>(N);
        if (frac > rep.max_fraction) {
            rep.max_fraction = frac;
            rep.worst_node = i;
        }
    }
    return rep;
}

AppendixLemma parse_appendix_lemma(const std::string& name) {
    if (name == "lemma_4_5") return AppendixLemma::lemma_4_5;
    if (name == "lemma_4_6") return AppendixLemma::lemma_4_6;
    if (name == "lemma_4_7") return AppendixLemma::lemma_4_7;
    if (name == "lemma_4_8") return AppendixLemma::lemma_4_8;
    if (name == "lemma_new") return AppendixLemma::lemma_new;
    throw ConfigError("unknown appendix estimate '" + name + "'");
}

std::string to_string(AppendixLemma which) {
    switch (which) {
        case AppendixLemma::lemma_4_5: return "lemma_4_5";
        case AppendixLemma::lemma_4_6: return "lemma_4_6";
        case AppendixLemma::lemma_4_7: return "lemma_4_7";
        case AppendixLemma::lemma_4_8: return "lemma_4_8";
        case AppendixLemma::lemma_new: return "lemma_new";
    }
    return "unknown";
}

AppendixReport check_appendix_estimate(const SolutionField& sol, const BrownianPaths& paths,
                                       AppendixLemma which, const AppendixConstants& k) {
    if (!(sol.grid() == paths.grid()) || sol.particles() != paths.particles())
        throw ShapeError("check_appendix_estimate: field and paths do not match");
    AppendixReport rep;
    rep.which = which;
    const double p = k.p;
    if (!(p > 0.0)) throw ParameterError("check_appendix_estimate: p must be positive");
    const bool needs_p_above_one = which != AppendixLemma::lemma_4_5;
    if (needs_p_above_one && which != AppendixLemma::lemma_4_7 && !(p > 1.0)) {
        rep.skipped = true;
        rep.note = "precondition p > 1 unmet";
        return rep;
    }
    if (which == AppendixLemma::lemma_new) {
        const double threshold = k.lambda1 + k.lambda2 * k.lambda2 / std::min(1.0, p - 1.0);
        if (k.beta < threshold) {
            rep.skipped = true;
            rep.note = "precondition beta >= lambda1 + lambda2^2 / (1 ^ (p - 1)) unmet";
            return rep;
        }
    }

    const std::size_t N = sol.particles();
    const std::size_t M = sol.grid().steps();
    const double dt = sol.grid().dt();
    const auto gval = [&](std::size_t i, std::size_t q) {
        return k.g ? k.g(sol.grid().node(i), paths.state(q, i)) : 0.0;
    };
    const auto thval = [&](std::size_t i, std::size_t q) {
        return k.theta ? k.theta(sol.grid().node(i), paths.state(q, i)) : 0.0;
    };
    const auto varphi = [&](double x) { return k.varphi ? k.varphi(x) : 0.0; };
    const double pw = which == AppendixLemma::lemma_4_7 ? 2.0 : p;

    // E|Y_{t_j}|^pw per node, for the modulus integral.
    std::vector<double> mean_pow(M + 1, 0.0);
    for (std::size_t j = 0; j <= M; ++j) {
        for (std::size_t q = 0; q < N; ++q) mean_pow[j] += std::pow(norm(sol.y_row(j, q)), pw);
        mean_pow[j] /= static_cast<double>(N);
    }

    rep.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < M; ++i) {
        const double t = sol.grid().node(i);
        const double horizon_left = sol.grid().horizon() - t;
        double e_sup = 0.0, e_z = 0.0, e_xi = 0.0, e_g = 0.0, e_theta = 0.0;
        for (std::size_t q = 0; q < N; ++q) {
            double sup = 0.0, zint = 0.0, gint = 0.0, thint = 0.0;
            for (std::size_t j = i; j <= M; ++j) {
                double ynorm = norm(sol.y_row(j, q));
                double wy = 1.0;
                if (which == AppendixLemma::lemma_new)
                    wy = std::exp(k.beta * p * (sol.grid().node(j) - t));
                sup = std::max(sup, wy * std::pow(ynorm, pw));
                if (j == M) break;
                const double zn = norm(sol.z_row(j, q));
                const double s = sol.grid().node(j) - t;
                const double wz = which == AppendixLemma::lemma_new ? std::exp(2.0 * k.beta * s) : 1.0;
                const double wg = which == AppendixLemma::lemma_new ? std::exp(k.beta * s) : 1.0;
                zint += wz * zn * zn * dt;
                gint += wg * gval(j, q) * dt;
                thint += thval(j, q) * dt;
            }
            e_sup += sup;
            e_z += std::pow(zint, pw / 2.0);
            e_g += std::pow(gint, pw);
            e_theta += std::pow(thint, pw / 2.0);
            double xi_term = std::pow(norm(sol.y_row(M, q)), pw);
            if (which == AppendixLemma::lemma_new) xi_term *= std::exp(k.beta * p * horizon_left);
            e_xi += xi_term;
        }
        const double inv = 1.0 / static_cast<double>(N);
        e_sup *= inv;
        e_z *= inv;
        e_xi *= inv;
        e_g *= inv;
        e_theta *= inv;
        double modulus = 0.0;
        for (std::size_t j = i; j < M; ++j) modulus += varphi(mean_pow[j]) * dt;

        double lhs = 0.0, rhs = 0.0;
        switch (which) {
            case AppendixLemma::lemma_4_5:
                lhs = e_z;
                rhs = k.c_main * e_sup + k.c_p * (e_g + e_theta);
                break;
            case AppendixLemma::lemma_4_6:
                lhs = e_sup;
                rhs = std::exp(k.c_main * horizon_left) * (e_xi + modulus + e_g);
                break;
            case AppendixLemma::lemma_4_7:
            case AppendixLemma::lemma_4_8:
                lhs = e_sup + e_z;
                rhs = std::exp(k.c_main * horizon_left) * (e_xi + modulus + e_g);
                break;
            case AppendixLemma::lemma_new:
                lhs = e_sup + e_z;
                rhs = k.c_p * (e_xi + e_g);
                break;
        }
        if (rhs - lhs < rep.margin) {
            rep.margin = rhs - lhs;
            rep.lhs = lhs;
            rep.rhs = rhs;
            rep.worst_node = i;
        }
    }
    return rep;
}

}  // namespace mfbsde
