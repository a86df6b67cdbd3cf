#include "mfbsde/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "mfbsde/analysis.hpp"
#include "mfbsde/checks.hpp"
#include "mfbsde/errors.hpp"
#include "mfbsde/measure.hpp"
#include "mfbsde/parallel.hpp"
#include "mfbsde/paths.hpp"
#include "mfbsde/solver.hpp"
#include "mfbsde/verify.hpp"

namespace mfbsde {

namespace {

namespace an = analysis;

class RowSink {
public:
    RowSink(const ExperimentConfig& cfg, std::vector<ReportRow>& rows)
        : cfg_(cfg), rows_(rows) {}

    void begin(CheckKind kind) {
        check_ = to_string(kind);
        first_ = rows_.size();
        start_ = std::chrono::steady_clock::now();
    }
    void end(bool record_timing) {
        if (!record_timing) return;
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start_)
                              .count();
        for (std::size_t i = first_; i < rows_.size(); ++i) rows_[i].wall_time_ms = ms;
    }
    void at_most(const std::string& metric, double value, double threshold) {
        add(metric, value, threshold, value <= threshold);
    }
    void at_least(const std::string& metric, double value, double threshold) {
        add(metric, value, threshold, value >= threshold);
    }
    void add(const std::string& metric, double value, double threshold, bool pass) {
        rows_.push_back({cfg_.name, check_, metric, value, threshold, pass, cfg_.seed, 0.0});
    }

private:
    const ExperimentConfig& cfg_;
    std::vector<ReportRow>& rows_;
    std::string check_;
    std::size_t first_ = 0;
    std::chrono::steady_clock::time_point start_;
};

double rel_error(double value, double expected) {
    return std::abs(value - expected) / std::max(std::abs(expected), 1e-300);
}

// ---------------------------------------------------------------- math ----

void check_math(RowSink& out) {
    const double e = std::numbers::e;
    double worst = 0.0;
    worst = std::max(worst, rel_error(an::iter_exp(1), e));
    worst = std::max(worst, rel_error(an::iter_exp(2), 15.154262241479264));
    worst = std::max(worst, rel_error(an::iter_exp(3), 3814279.1047602206));
    out.at_most("iter_exp_rel_error", worst, 1e-12);

    worst = 0.0;
    worst = std::max(worst, rel_error(an::iter_ln(1, e), 1.0));
    worst = std::max(worst, rel_error(an::iter_ln(2, std::exp(e)), 1.0));
    worst = std::max(worst, rel_error(an::iter_ln(2, std::exp(e * e)), 2.0));
    for (int m = 1; m <= 3; ++m)
        worst = std::max(worst, rel_error(an::iter_ln(m, an::iter_exp(m)), 1.0));
    out.at_most("iter_ln_rel_error", worst, 1e-12);

    worst = 0.0;
    worst = std::max(worst, rel_error(an::il(1, 0.7, 0.0), 1.0));
    worst = std::max(worst, rel_error(an::il(2, 0.5, 0.0), std::sqrt(e)));
    worst = std::max(worst, rel_error(an::il(1, 1.0, e * e - e), 2.0));
    out.at_most("il_rel_error", worst, 1e-12);

    // il >= 1 and nondecreasing on a geometric grid.
    std::vector<double> xs{0.0};
    for (double x = 1e-3; x <= 1e6; x *= 1.2) xs.push_back(x);
    double il_violation = 0.0;
    for (int m = 1; m <= 3; ++m)
        for (double lambda : {0.6, 1.0, 2.5}) {
            double prev = 0.0;
            for (double x : xs) {
                const double v = an::il(m, lambda, x);
                il_violation = std::max({il_violation, 1.0 - v, prev - v});
                prev = v;
            }
        }
    out.at_most("il_monotone_violation", il_violation, 0.0);

    double ratio = 0.0;
    for (int m = 1; m <= 2; ++m) ratio = std::max(ratio, an::il_ratio_max(m, 0.75, xs));
    out.add("il_ratio_max", ratio, 0.0, std::isfinite(ratio));

    double sub_violation = 0.0;
    for (double alpha : {0.25, 0.5, 0.9}) {
        const double M = an::sublinear_constant(2, 0.75, alpha, xs);
        for (double x : xs)
            sub_violation = std::max(sub_violation,
                                     std::pow(x, alpha) - M - x / an::il(2, 0.75, x));
        if (!std::isfinite(M)) sub_violation = std::numeric_limits<double>::infinity();
    }
    out.at_most("sublinear_violation", sub_violation, 1e-12);

    worst = 0.0;
    for (double c : {0.5, 1.0, 2.0}) {
        an::BihariSpec spec;
        spec.kappa = [c](double u) { return c * u; };
        spec.v0 = 1.0;
        spec.horizon = 1.0;
        for (double t : {0.0, 0.25, 0.5, 1.0})
            worst = std::max(worst, rel_error(an::bihari_bound(spec, t), std::exp(c * (1.0 - t))));
    }
    out.at_most("bihari_gronwall_rel_error", worst, 1e-6);

    an::BihariSpec zero_spec;
    zero_spec.kappa = [](double u) { return u * (1.0 + std::abs(std::log(u))); };
    zero_spec.v0 = 0.0;
    out.at_most("bihari_zero_start", std::abs(an::bihari_bound(zero_spec, 0.0)), 0.0);

    an::TestFunctionParams tp;
    tp.m = 2;
    tp.lambda = 1.0;
    tp.growth_k = 1.0;
    tp.gamma = 1.0;
    tp.h = std::exp(e * e);
    tp.horizon = 1.0;
    worst = 0.0;
    for (int it = 0; it < 10; ++it) {
        const double t = it / 9.0;
        for (int ix = 0; ix < 100; ++ix) {
            const double x = ix == 0 ? 0.0 : 1e-2 * std::pow(1e8, (ix - 1) / 98.0);
            const double step = 1e-4 * (tp.h + x);
            // One-sided near 0 keeps the stencil inside x >= 0.
            const double fd =
                x >= step ? verify::central_difference(
                                [&](double v) { return an::test_phi(tp, t, v); }, x, step)
                          : (-3.0 * an::test_phi(tp, t, x) + 4.0 * an::test_phi(tp, t, x + step) -
                             an::test_phi(tp, t, x + 2.0 * step)) /
                                (2.0 * step);
            worst = std::max(worst, rel_error(fd, an::phi_dx(tp, t, x)));
        }
    }
    out.at_most("phi_dx_fd_rel_error", worst, 1e-6);

    an::HSearchGrid grid;
    const auto found = an::find_min_h(2, 1.0, 1.0, grid);
    an::TestFunctionParams sp;
    sp.m = 2;
    sp.lambda = 1.0;
    sp.gamma = 1.0;
    sp.growth_k = grid.growth_k;
    sp.h = found.h;
    sp.horizon = grid.horizon;
    double sandwich = std::numeric_limits<double>::infinity();
    for (int it = 0; it < grid.t_points; ++it) {
        const double t = grid.horizon * it / std::max(1, grid.t_points - 1);
        sandwich = std::min(sandwich, an::sandwich_residual(sp, t, 0.0));
        for (int ix = 0; ix < grid.x_points; ++ix) {
            const double x = 1e-2 * std::pow(grid.x_max / 1e-2, ix / double(grid.x_points - 1));
            sandwich = std::min(sandwich, an::sandwich_residual(sp, t, x));
        }
    }
    out.at_least("find_min_h_sandwich_margin", sandwich, 0.0);
    out.add("find_min_h_above_domain", found.h, an::iter_exp(2), found.h > an::iter_exp(2));

    an::HSearchGrid sgrid;
    sgrid.constraints = an::HConstraint::sandwich;
    const auto sandwich_h = an::find_min_h(2, 1.0, 1.0, sgrid);
    out.at_most("sandwich_only_h_rel_error", rel_error(sandwich_h.h, std::exp(e * e)), 1e-3);
}

// ----------------------------------------------------------- transport ----

EmpiricalMeasure random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> shift(-2.0, 2.0);
    const double s = shift(rng);
    std::vector<double> v(n * dim);
    for (double& x : v) x = normal(rng) + s;
    return EmpiricalMeasure(std::move(v), dim);
}

void check_transport(RowSink& out, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> size64(1, 64), size7(1, 7);

    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = size64(rng);
        const auto a = random_cloud(rng, n, 1), b = random_cloud(rng, n, 1);
        worst = std::max(worst, std::abs(w1_assignment(a, b) - w1_sorted(a, b)));
    }
    out.at_most("w1_assignment_vs_sorted", worst, 1e-12);

    worst = 0.0;
    double brute_w1 = 0.0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = size7(rng);
        const auto a = random_cloud(rng, n, 1), b = random_cloud(rng, n, 1);
        worst = std::max(worst, std::abs(w1_plus(a, b) - verify::brute_force_w1_plus(a, b)));
        const auto c = random_cloud(rng, n, 2), d = random_cloud(rng, n, 2);
        brute_w1 = std::max(brute_w1, std::abs(w1_assignment(c, d) - verify::brute_force_w1(c, d)));
    }
    out.at_most("w1_plus_vs_brute_force", worst, 1e-12);
    out.at_most("w1_assignment_vs_brute_force_2d", brute_w1, 1e-12);

    double axioms = 0.0;
    double coupling = 0.0;
    for (int k = 0; k < 100; ++k) {
        const std::size_t dim = 1 + k % 2;
        const std::size_t n = 1 + size64(rng) % 24;
        const auto a = random_cloud(rng, n, dim), b = random_cloud(rng, n, dim),
                   c = random_cloud(rng, n, dim);
        const double ab = w1_exact(a, b), ba = w1_exact(b, a), ac = w1_exact(a, c),
                     cb = w1_exact(c, b);
        axioms = std::max({axioms, std::abs(ab - ba), ab - (ac + cb), w1_exact(a, a), -ab});
        coupling = std::max(coupling, ab - w1_coupling_bound(a, b));
        if (dim == 1) {
            const double plus = w1_plus(a, b);
            axioms = std::max({axioms, -plus, plus - ab, w1_plus(a, a)});
        }
    }
    out.at_most("metric_axiom_violation", axioms, 1e-12);
    out.at_most("coupling_bound_below_exact", coupling, 1e-12);
}

// -------------------------------------------------------------- solver ----

struct Problem {
    GeneratorSpec gen;
    TerminalCondition xi;
    BrownianPaths paths;
};

Problem make_problem(const ExperimentConfig& cfg, double horizon) {
    GeneratorSpec gen = make_example(parse_example(cfg.generator), cfg.dims, cfg.generator_options);
    TerminalCondition xi = make_terminal(cfg.terminal, cfg.dims.n, cfg.terminal_value);
    TimeGrid grid(horizon, cfg.steps);
    return {std::move(gen), std::move(xi), simulate(cfg.seed, grid, cfg.particles, cfg.dims.d)};
}

double interval_horizon(const ExperimentConfig& cfg) {
    if (!cfg.horizon_from_partition) return cfg.horizon;
    const auto plan = an::partition_plan(*cfg.partition_mode, cfg.partition_constants);
    return plan.step;
}

SolverConfig solver_for(const ExperimentConfig& cfg) {
    SolverConfig s = cfg.solver;
    if (cfg.horizon_from_partition) s.partition.reset();
    return s;
}

// RMSE of the zero-driver solution against Y_t = W_t on the given paths.
double zero_driver_rmse(const BrownianPaths& paths, const SolverConfig& solver,
                        double* mean_z = nullptr) {
    const auto gen = make_example(Example::zero, {1, paths.dim()});
    const auto sol = picard_solve(gen, TerminalCondition::identity(1), paths, solver);
    const TimeGrid& g = paths.grid();
    double se = 0.0;
    for (std::size_t i = 0; i <= g.steps(); ++i)
        for (std::size_t p = 0; p < paths.particles(); ++p) {
            const double err = sol.y_at(i, p) - paths.value(p, i, 0);
            se += err * err;
        }
    const double count = static_cast<double>((g.steps() + 1) * paths.particles());
    if (mean_z) {
        double mz = 0.0;
        for (std::size_t i = 0; i < g.steps(); ++i) mz += sol.mean_z(i);
        *mean_z = mz / static_cast<double>(g.steps());
    }
    return std::sqrt(se / count);
}

void check_martingale(RowSink& out, const ExperimentConfig& cfg) {
    if (cfg.generator != "zero")
        throw ConfigError(cfg.name + ": the martingale check needs generator 'zero'");
    Problem pr = make_problem(cfg, cfg.horizon);
    const auto sol = picard_solve(pr.gen, pr.xi, pr.paths, solver_for(cfg));
    const std::size_t M = sol.grid().steps();
    double drift = 0.0;
    for (std::size_t r = 0; r < sol.n(); ++r)
        for (std::size_t i = 0; i <= M; ++i)
            drift = std::max(drift, std::abs(sol.mean_y(i, r) - sol.mean_y(M, r)));
    out.at_most("max_mean_drift", drift, cfg.oracle_tol);
}

void check_oracle(RowSink& out, const ExperimentConfig& cfg) {
    Problem pr = make_problem(cfg, cfg.horizon);
    if (cfg.dims.n != 1 || cfg.dims.d != 1)
        throw ConfigError(cfg.name + ": oracle benchmarks need dims.n = dims.d = 1");
    const SolverConfig solver = solver_for(cfg);
    if (cfg.generator == "zero" && cfg.terminal == "identity") {
        double mean_z = 0.0;
        const double rmse = zero_driver_rmse(pr.paths, solver, &mean_z);
        out.at_most("rmse_y", rmse, cfg.oracle_tol);
        out.at_most("mean_z_error", std::abs(mean_z - 1.0), cfg.oracle_tol);
        return;
    }
    Benchmark which;
    if (cfg.generator == "pure_z" && cfg.terminal == "identity")
        which = Benchmark::pure_z;
    else if (cfg.generator == "linear_meanfield" && cfg.terminal == "constant")
        which = Benchmark::linear_meanfield;
    else
        throw ConfigError(cfg.name + ": no closed form for generator '" + cfg.generator +
                          "' with terminal '" + cfg.terminal + "'");
    BenchmarkParams bp{cfg.generator_options.a, cfg.generator_options.b, cfg.terminal_value,
                       cfg.horizon};
    const auto sol = picard_solve(pr.gen, pr.xi, pr.paths, solver);
    const double exact = closed_form_solution(which, bp, 0.0, 0.0).y[0];
    out.at_most("y0_error", std::abs(sol.mean_y(0) - exact), cfg.oracle_tol);
    out.add("converged", sol.diagnostics.converged ? 1.0 : 0.0, 1.0, sol.diagnostics.converged);
    out.at_most("iterations", sol.diagnostics.iterations_used, cfg.oracle_max_iterations);
}

void check_comparison_run(RowSink& out, const ExperimentConfig& cfg) {
    Problem pr = make_problem(cfg, cfg.horizon);
    const SolverConfig solver = solver_for(cfg);
    const double tol = cfg.comparison_tol_factor * zero_driver_rmse(pr.paths, solver);
    std::vector<double> xi1 = terminal_values(pr.xi, pr.paths);
    std::vector<double> xi2 = xi1;
    for (double& v : xi2) v += cfg.comparison_terminal_shift;
    const auto gen2 = shift_generator(pr.gen, cfg.comparison_driver_shift);
    const auto sol1 = picard_solve(pr.gen, xi1, pr.paths, solver);
    const auto sol2 = picard_solve(gen2, xi2, pr.paths, solver);
    const auto rep = check_comparison(sol1, sol2, tol);
    out.add("tolerance", tol, 0.0, std::isfinite(tol));
    out.at_most("max_violation_fraction", rep.max_fraction, cfg.comparison_max_fraction);
}

void check_apriori_run(RowSink& out, const ExperimentConfig& cfg) {
    Problem pr = make_problem(cfg, cfg.horizon);
    const auto& p = pr.gen.params;
    if (!p.m || !p.lambda || !p.gamma || !p.growth_k)
        throw ConfigError(cfg.name + ": generator '" + cfg.generator +
                          "' states no growth constants (K, gamma, m, lambda)");
    const int m = static_cast<int>(*p.m);
    double h = 0.0;
    if (cfg.apriori_h) {
        h = *cfg.apriori_h;
    } else {
        an::HSearchGrid grid;
        grid.horizon = cfg.horizon;
        grid.growth_k = *p.growth_k;
        h = an::find_min_h(m, *p.lambda, *p.gamma, grid).h;
    }
    out.add("h", h, an::iter_exp(m), h > an::iter_exp(m));
    const auto consts = an::apriori_constants(m, *p.lambda, *p.gamma, *p.growth_k, cfg.horizon, h);
    out.add("bound_constant", consts.mean_bound_c, 0.0, std::isfinite(consts.mean_bound_c));
    try {
        const auto sol = picard_solve(pr.gen, pr.xi, pr.paths, solver_for(cfg));
        const auto xi = terminal_values(pr.xi, pr.paths);
        const auto theta = theta_integral(p.theta, pr.paths);
        const auto rep = check_apriori(sol, xi, theta, consts);
        out.add("diverged", 0.0, 0.0, true);
        out.at_least("apriori_margin", rep.margin, 0.0);
    } catch (const DivergenceError&) {
        // Reported, not failed: the quadratic z term can blow up the scheme.
        out.add("diverged", 1.0, 0.0, true);
    }
}

void check_picard_decay(RowSink& out, const ExperimentConfig& cfg) {
    const double horizon = interval_horizon(cfg);
    Problem pr = make_problem(cfg, horizon);
    SolverConfig solver = solver_for(cfg);
    solver.picard_max = cfg.decay_max_iterations;
    const auto sol = picard_solve(pr.gen, pr.xi, pr.paths, solver);
    const auto& dg = sol.diagnostics;
    double worst = 0.0;
    for (std::size_t k = 1; k < dg.distance_y.size(); ++k) {
        const double prev = dg.distance_y[k - 1] + dg.distance_z[k - 1];
        const double cur = dg.distance_y[k] + dg.distance_z[k];
        if (prev > 0.0) worst = std::max(worst, cur / prev);
    }
    out.add("interval_length", horizon, 0.0, horizon > 0.0);
    out.add("converged", dg.converged ? 1.0 : 0.0, 1.0, dg.converged);
    out.at_most("iterations", dg.iterations_used, cfg.decay_max_iterations);
    out.at_most("max_ratio", worst, cfg.decay_max_ratio);
}

void check_appendix(RowSink& out, const ExperimentConfig& cfg) {
    Problem pr = make_problem(cfg, cfg.horizon);
    const auto sol = picard_solve(pr.gen, pr.xi, pr.paths, solver_for(cfg));
    AppendixConstants k;
    k.lambda1 = cfg.appendix_lambda1;
    k.lambda2 = cfg.appendix_lambda2;
    k.p = cfg.appendix_p;
    k.beta = cfg.appendix_beta;
    k.c_main = cfg.appendix_c_main;
    k.c_p = cfg.appendix_c_p;
    const auto rep = check_appendix_estimate(sol, pr.paths, parse_appendix_lemma(cfg.appendix_lemma), k);
    out.add("skipped", rep.skipped ? 1.0 : 0.0, cfg.appendix_expect_skip ? 1.0 : 0.0,
            rep.skipped == cfg.appendix_expect_skip);
    if (!rep.skipped) out.at_least("margin", rep.margin, 0.0);
}

void check_assumptions(RowSink& out, const ExperimentConfig& cfg) {
    const GeneratorSpec gen =
        make_example(parse_example(cfg.generator), cfg.dims, cfg.generator_options);
    std::vector<AssumptionId> ids;
    for (const auto& a : cfg.assumption_list) ids.push_back(parse_assumption(a));
    if (ids.empty()) ids = gen.declared;
    if (ids.empty())
        throw ConfigError(cfg.name + ": generator '" + cfg.generator + "' declares no assumptions");
    SamplerSpec sampler;
    sampler.horizon = cfg.horizon;
    sampler.seed = cfg.seed;
    constexpr double tol = 1e-9;
    for (AssumptionId id : ids) {
        const auto rep = check_assumption(gen, id, sampler, cfg.assumption_points);
        const std::string name = to_string(id);
        if (!cfg.assumption_expect_violation) {
            out.at_most("worst_residual_" + name, rep.worst_residual, tol);
            continue;
        }
        out.add("worst_residual_" + name, rep.worst_residual, tol, rep.worst_residual > tol);
        const double again = assumption_residual_at(gen, id, sampler, rep.witness.index);
        out.add("witness_index_" + name, static_cast<double>(rep.witness.index), 0.0, true);
        out.add("witness_reproduced_" + name, again, rep.worst_residual,
                again == rep.worst_residual);
    }
}

ExperimentConfig apply_overrides(ExperimentConfig cfg, const RunOptions& opts) {
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.particles) cfg.particles = *opts.particles;
    if (opts.steps) cfg.steps = *opts.steps;
    return cfg;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_atomically(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw Error("cannot write " + tmp);
        f << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    ExperimentResult res;
    res.name = cfg.name;
    const auto start = std::chrono::steady_clock::now();
    RowSink sink(cfg, res.rows);
    for (CheckKind kind : cfg.checks) {
        sink.begin(kind);
        try {
            switch (kind) {
                case CheckKind::math: check_math(sink); break;
                case CheckKind::transport: check_transport(sink, cfg.seed); break;
                case CheckKind::martingale: check_martingale(sink, cfg); break;
                case CheckKind::oracle: check_oracle(sink, cfg); break;
                case CheckKind::comparison: check_comparison_run(sink, cfg); break;
                case CheckKind::apriori: check_apriori_run(sink, cfg); break;
                case CheckKind::picard_decay: check_picard_decay(sink, cfg); break;
                case CheckKind::appendix: check_appendix(sink, cfg); break;
                case CheckKind::assumptions: check_assumptions(sink, cfg); break;
            }
        } catch (const DivergenceError& err) {
            sink.add("diverged", 1.0, 0.0, false);
            res.diverged = true;
            res.forensic = std::string(err.what()) + "\n" + err.forensic();
            sink.end(opts.record_timing);
            break;
        }
        sink.end(opts.record_timing);
    }
    if (opts.record_timing)
        res.wall_time_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    return res;
}

std::string format_row(const ReportRow& r) {
    return r.experiment + "," + r.check + "," + r.metric + "," + format_double(r.value) + "," +
           format_double(r.threshold) + "," + (r.pass ? "true" : "false") + "," +
           std::to_string(r.seed) + "," + format_double(r.wall_time_ms);
}

std::string format_csv(const std::vector<ExperimentResult>& results) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& res : results)
        for (const auto& row : res.rows) out += format_row(row) + "\n";
    return out;
}

int run_configs(const std::vector<std::pair<std::string, std::string>>& sources,
                const RunOptions& opts, std::ostream& log) {
    std::vector<ExperimentConfig> configs;
    std::vector<Config> parsed;
    parsed.reserve(sources.size());
    try {
        for (const auto& [source, text] : sources) {
            parsed.push_back(Config::parse(text, source));
            configs.push_back(apply_overrides(parse_experiment(parsed.back()), opts));
        }
    } catch (const ConfigError& err) {
        log << "parse error: " << err.what() << "\n";
        return exit_parse_error;
    }

    std::vector<ExperimentResult> results;
    int code = exit_ok;
    for (const auto& cfg : configs) {
        try {
            results.push_back(run_experiment(cfg, opts));
        } catch (const ConfigError& err) {
            log << "parse error: " << err.what() << "\n";
            return exit_parse_error;
        }
        const auto& res = results.back();
        std::size_t failed = 0;
        for (const auto& row : res.rows) failed += row.pass ? 0 : 1;
        log << (res.diverged ? "DIVERGED " : failed ? "FAIL " : "ok   ") << res.name << " ("
            << res.rows.size() - failed << "/" << res.rows.size() << " rows pass)\n";
        if (res.diverged) {
            log << res.forensic << "\n";
            code = exit_divergence;
        } else if (failed && code == exit_ok) {
            code = exit_check_failed;
        }
    }

    if (!opts.out_dir.empty()) {
        namespace fs = std::filesystem;
        const fs::path dir(opts.out_dir);
        fs::create_directories(dir);
        write_atomically(dir / "report.csv", format_csv(results));
        std::ostringstream man;
        man << "version = " << kVersion << "\n";
        man << "csv_schema = " << kCsvSchema << "\n";
        man << "csv_header = " << kCsvHeader << "\n";
        man << "threads = " << thread_count() << "\n";
        man << "exit_code = " << code << "\n";
        for (std::size_t k = 0; k < configs.size(); ++k) {
            man << "\n[" << configs[k].name << "]\n";
            man << "source = " << parsed[k].source() << "\n";
            man << "effective_seed = " << configs[k].seed << "\n";
            man << "effective_particles = " << configs[k].particles << "\n";
            man << "effective_steps = " << configs[k].steps << "\n";
            if (opts.record_timing)
                man << "wall_time_ms = " << format_double(results[k].wall_time_ms) << "\n";
            for (const auto& [key, entry] : parsed[k].entries())
                man << "config." << key << " = " << entry.first << "\n";
        }
        write_atomically(dir / "manifest.txt", man.str());
        for (const auto& res : results)
            if (res.diverged) write_atomically(dir / (res.name + ".divergence.txt"), res.forensic);
    }
    return code;
}

int run_config_file(const std::string& path, const RunOptions& opts, std::ostream& log) {
    std::ifstream f(path);
    if (!f) {
        log << "parse error: cannot open config '" << path << "'\n";
        return exit_parse_error;
    }
    std::stringstream buf;
    buf << f.rdbuf();
    return run_configs({{path, buf.str()}}, opts, log);
}

int run_suite(const std::string& name, const RunOptions& opts, std::ostream& log) {
    std::vector<std::string> texts;
    try {
        texts = suite_configs(name);
    } catch (const ConfigError& err) {
        log << "parse error: " << err.what() << "\n";
        return exit_parse_error;
    }
    std::vector<std::pair<std::string, std::string>> sources;
    for (std::size_t k = 0; k < texts.size(); ++k)
        sources.emplace_back("suite:" + name + "#" + std::to_string(k + 1), texts[k]);
    return run_configs(sources, opts, log);
}

}  // namespace mfbsde
