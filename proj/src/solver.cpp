#include "mfbsde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "mfbsde/errors.hpp"
#include "mfbsde/parallel.hpp"
#include "mfbsde/regression.hpp"

namespace mfbsde {

void SolverConfig::validate() const {
    if (basis_degree < 0) throw ConfigError("solver: basis_degree must be >= 0");
    if (inner_iterations < 0) throw ConfigError("solver: inner_iterations must be >= 0");
    if (!(picard_tol > 0.0)) throw ConfigError("solver: picard_tol must be > 0");
    if (picard_max < 1) throw ConfigError("solver: picard_max must be >= 1");
    if (!(damping > 0.0 && damping <= 1.0))
        throw ConfigError("solver: damping must lie in (0, 1]");
    if (!(ridge >= 0.0)) throw ConfigError("solver: ridge must be >= 0");
}

Scheme resolve_scheme(Scheme requested, LawMode mode) {
    if (requested != Scheme::automatic) return requested;
    return mode == LawMode::law_of_y ? Scheme::frozen_z : Scheme::live_z;
}

SolutionField::SolutionField(TimeGrid grid, std::size_t particles, std::size_t n,
                             std::size_t d)
    : grid_(grid), particles_(particles), n_(n), d_(d),
      y_((grid.steps() + 1) * particles * n, 0.0), z_(grid.steps() * particles * n * d, 0.0) {}

double SolutionField::mean_y(std::size_t i, std::size_t r) const {
    double s = 0.0;
    for (std::size_t p = 0; p < particles_; ++p) s += y_at(i, p, r);
    return s / static_cast<double>(particles_);
}

double SolutionField::mean_z(std::size_t i, std::size_t r, std::size_t c) const {
    double s = 0.0;
    for (std::size_t p = 0; p < particles_; ++p) s += z_at(i, p, r, c);
    return s / static_cast<double>(particles_);
}

double SolutionField::mean_abs_y(std::size_t i) const {
    double s = 0.0;
    for (std::size_t p = 0; p < particles_; ++p) {
        double q = 0.0;
        for (double v : y_row(i, p)) q += v * v;
        s += std::sqrt(q);
    }
    return s / static_cast<double>(particles_);
}

namespace {

struct Layout {
    std::size_t N, n, d, M;
    std::size_t nd() const { return n * d; }
};

// Laws for nodes [lo, hi) from raw y / z arrays.
FrozenData build_frozen(const GeneratorSpec& gen, const Layout& L,
                        const std::vector<double>& y, const std::vector<double>& z,
                        std::size_t lo, std::size_t hi, bool keep_z) {
    FrozenData fd;
    fd.first_node = lo;
    const bool joint = gen.law_mode == LawMode::law_of_yz;
    const std::size_t k = gen.law_dim();
    fd.laws.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
        std::vector<double> cloud(L.N * k);
        for (std::size_t p = 0; p < L.N; ++p) {
            for (std::size_t r = 0; r < L.n; ++r) cloud[p * k + r] = y[(i * L.N + p) * L.n + r];
            if (joint)
                for (std::size_t c = 0; c < L.nd(); ++c)
                    cloud[p * k + L.n + c] = z[(i * L.N + p) * L.nd() + c];
        }
        fd.laws.emplace_back(std::move(cloud), k);
    }
    if (keep_z) fd.z = z;
    return fd;
}

class Sweeper {
public:
    Sweeper(const GeneratorSpec& gen, const BrownianPaths& paths, const SolverConfig& cfg)
        : gen_(gen), paths_(paths), cfg_(cfg),
          L_{paths.particles(), gen.dims.n, gen.dims.d, paths.grid().steps()},
          regs_(L_.M) {
        if (gen.dims.d != paths.dim())
            throw ShapeError("solver: generator expects d = " + std::to_string(gen.dims.d) +
                             " but paths have d = " + std::to_string(paths.dim()));
        if (!gen.eval) throw ConfigError("solver: generator has no eval");
    }

    const Layout& layout() const { return L_; }

    // Backward induction over nodes hi-1 ... lo; y at node hi must already
    // hold the terminal values.
    void run(Scheme scheme, std::size_t lo, std::size_t hi, const FrozenData& frozen,
             SolutionField& out) {
        const double dt = paths_.grid().dt();
        const std::size_t N = L_.N, n = L_.n, d = L_.d, nd = L_.nd();
        const std::size_t q = n + nd;
        std::vector<double> ztargets(N * nd);
        std::vector<double> fitted(N * q);
        for (std::size_t i = hi; i-- > lo;) {
            const auto& reg = regression(i);
            const std::span<const double> ynext(out.y().data() + (i + 1) * N * n, N * n);
            const std::vector<double> yhat = reg.project(ynext, n);
            // Centering by the fitted mean leaves E_i[. dW] unchanged and
            // removes most of the sampling noise in Z.
            for (std::size_t p = 0; p < N; ++p)
                for (std::size_t r = 0; r < n; ++r) {
                    const double v = ynext[p * n + r] - yhat[p * n + r];
                    for (std::size_t c = 0; c < d; ++c)
                        ztargets[p * nd + r * d + c] = v * paths_.increment(p, i, c) / dt;
                }
            const std::vector<double> zhat = reg.project(ztargets, nd);
            for (std::size_t p = 0; p < N; ++p) {
                std::copy_n(yhat.begin() + static_cast<std::ptrdiff_t>(p * n), n,
                            fitted.begin() + static_cast<std::ptrdiff_t>(p * q));
                std::copy_n(zhat.begin() + static_cast<std::ptrdiff_t>(p * nd), nd,
                            fitted.begin() + static_cast<std::ptrdiff_t>(p * q + n));
            }
            double* yi = out.y().data() + i * N * n;
            double* zi = out.z().data() + i * N * nd;
            if (i < frozen.first_node || i - frozen.first_node >= frozen.laws.size())
                throw ShapeError("solver: frozen law missing at node " + std::to_string(i));
            const EmpiricalMeasure& mu = frozen.laws[i - frozen.first_node];
            if (mu.dim() != gen_.law_dim())
                throw ShapeError("solver: frozen law at node " + std::to_string(i) +
                                 " has dimension " + std::to_string(mu.dim()) +
                                 ", generator expects " + std::to_string(gen_.law_dim()));
            const double t = paths_.grid().node(i);
            const double* zfrozen = nullptr;
            if (scheme == Scheme::frozen_z) {
                if (!frozen.z) throw ConfigError("solver: frozen_z scheme needs a frozen Z");
                zfrozen = frozen.z->data() + i * N * nd;
            }
            parallel_for(N, [&](std::size_t a, std::size_t b) {
                std::vector<double> f(n), y(n);
                for (std::size_t p = a; p < b; ++p) {
                    std::span<const double> yhat(fitted.data() + p * q, n);
                    std::span<const double> zreg(fitted.data() + p * q + n, nd);
                    std::copy(zreg.begin(), zreg.end(), zi + p * nd);
                    std::span<const double> zuse =
                        zfrozen ? std::span<const double>(zfrozen + p * nd, nd) : zreg;
                    const auto w = paths_.state(p, i);
                    std::copy(yhat.begin(), yhat.end(), y.begin());
                    for (int k = 0; k <= cfg_.inner_iterations; ++k) {
                        gen_.eval(t, w, y, zuse, mu, f);
                        for (std::size_t r = 0; r < n; ++r) y[r] = yhat[r] + f[r] * dt;
                    }
                    std::copy(y.begin(), y.end(), yi + p * n);
                }
            });
            check_finite(i, fitted, out);
        }
    }

private:
    const ConditionalExpectation& regression(std::size_t i) {
        if (!regs_[i])
            regs_[i] = std::make_unique<ConditionalExpectation>(
                paths_.states_at(i), L_.N, L_.d, cfg_.basis_degree, cfg_.ridge);
        return *regs_[i];
    }

    void check_finite(std::size_t i, const std::vector<double>& fitted,
                      const SolutionField& out) const {
        const std::size_t N = L_.N, n = L_.n, nd = L_.nd();
        for (std::size_t p = 0; p < N; ++p) {
            bool ok = true;
            for (double v : out.y_row(i, p)) ok = ok && std::isfinite(v);
            for (double v : out.z_row(i, p)) ok = ok && std::isfinite(v);
            if (ok) continue;
            std::ostringstream os;
            os.precision(17);
            os << "node=" << i << " t=" << paths_.grid().node(i) << " particle=" << p << "\n";
            os << "W=";
            for (double v : paths_.state(p, i)) os << ' ' << v;
            os << "\ny_next=";
            for (double v : out.y_row(i + 1, p)) os << ' ' << v;
            os << "\ny_hat=";
            for (std::size_t r = 0; r < n; ++r) os << ' ' << fitted[p * (n + nd) + r];
            os << "\nz=";
            for (double v : out.z_row(i, p)) os << ' ' << v;
            os << "\ny=";
            for (double v : out.y_row(i, p)) os << ' ' << v;
            os << '\n';
            throw DivergenceError("solver: non-finite value at node " + std::to_string(i) +
                                      ", particle " + std::to_string(p),
                                  i, p, os.str());
        }
    }

    const GeneratorSpec& gen_;
    const BrownianPaths& paths_;
    const SolverConfig& cfg_;
    Layout L_;
    std::vector<std::unique_ptr<ConditionalExpectation>> regs_;
};

std::vector<double> checked_terminal(std::span<const double> terminal, const Layout& L) {
    if (terminal.size() != L.N * L.n)
        throw ShapeError("solver: terminal array has " + std::to_string(terminal.size()) +
                         " entries, expected N x n = " + std::to_string(L.N * L.n));
    for (double v : terminal)
        if (!std::isfinite(v)) throw DomainError("solver: non-finite terminal value");
    return {terminal.begin(), terminal.end()};
}

void set_terminal(SolutionField& sol, std::size_t node, std::span<const double> values) {
    std::copy(values.begin(), values.end(),
              sol.y().begin() + static_cast<std::ptrdiff_t>(node * values.size()));
}

// sup over nodes of the mean Euclidean distance between paired rows.
double sup_mean_distance(const std::vector<double>& a, const std::vector<double>& b,
                         std::size_t N, std::size_t width, std::size_t lo, std::size_t hi) {
    double sup = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        double s = 0.0;
        for (std::size_t p = 0; p < N; ++p) {
            double q = 0.0;
            for (std::size_t r = 0; r < width; ++r) {
                const double e = a[(i * N + p) * width + r] - b[(i * N + p) * width + r];
                q += e * e;
            }
            s += std::sqrt(q);
        }
        sup = std::max(sup, s / static_cast<double>(N));
    }
    return sup;
}

void blend(std::vector<double>& state, const std::vector<double>& latest, double theta,
           std::size_t from, std::size_t to) {
    if (theta == 1.0) {
        std::copy(latest.begin() + static_cast<std::ptrdiff_t>(from),
                  latest.begin() + static_cast<std::ptrdiff_t>(to),
                  state.begin() + static_cast<std::ptrdiff_t>(from));
        return;
    }
    for (std::size_t k = from; k < to; ++k)
        state[k] = theta * latest[k] + (1.0 - theta) * state[k];
}

IntervalDiagnostics picard_interval(Sweeper& sweeper, const GeneratorSpec& gen, Scheme scheme,
                                    const SolverConfig& cfg, std::size_t lo, std::size_t hi,
                                    SolutionField& work) {
    const Layout& L = sweeper.layout();
    const std::size_t ny = L.N * L.n, nz = L.N * L.nd();
    IntervalDiagnostics diag;
    diag.first_node = lo;
    diag.last_node = hi;
    // Previous iterate and (possibly damped) frozen state start at (0, 0).
    std::vector<double> prev_y(work.y().size(), 0.0), prev_z(work.z().size(), 0.0);
    std::vector<double> bar_y(work.y().size(), 0.0), bar_z(work.z().size(), 0.0);
    for (int k = 1; k <= cfg.picard_max; ++k) {
        const FrozenData frozen =
            build_frozen(gen, L, bar_y, bar_z, lo, hi, scheme == Scheme::frozen_z);
        sweeper.run(scheme, lo, hi, frozen, work);
        const double dy = sup_mean_distance(work.y(), prev_y, L.N, L.n, lo, hi + 1);
        const double dz = sup_mean_distance(work.z(), prev_z, L.N, L.nd(), lo, hi);
        diag.distance_y.push_back(dy);
        diag.distance_z.push_back(dz);
        diag.iterations = k;
        std::copy(work.y().begin() + static_cast<std::ptrdiff_t>(lo * ny),
                  work.y().begin() + static_cast<std::ptrdiff_t>((hi + 1) * ny),
                  prev_y.begin() + static_cast<std::ptrdiff_t>(lo * ny));
        std::copy(work.z().begin() + static_cast<std::ptrdiff_t>(lo * nz),
                  work.z().begin() + static_cast<std::ptrdiff_t>(hi * nz),
                  prev_z.begin() + static_cast<std::ptrdiff_t>(lo * nz));
        blend(bar_y, work.y(), cfg.damping, lo * ny, (hi + 1) * ny);
        blend(bar_z, work.z(), cfg.damping, lo * nz, hi * nz);
        if (dy + dz < cfg.picard_tol) {
            diag.converged = true;
            break;
        }
    }
    return diag;
}

}  // namespace

FrozenData zero_frozen_data(const GeneratorSpec& gen, const BrownianPaths& paths) {
    const std::size_t M = paths.grid().steps();
    FrozenData fd;
    fd.first_node = 0;
    for (std::size_t i = 0; i < M; ++i)
        fd.laws.push_back(EmpiricalMeasure::dirac0(gen.law_dim(), paths.particles()));
    fd.z = std::vector<double>(M * paths.particles() * gen.dims.n * gen.dims.d, 0.0);
    return fd;
}

FrozenData frozen_from(const GeneratorSpec& gen, const SolutionField& sol) {
    if (sol.n() != gen.dims.n || sol.d() != gen.dims.d)
        throw ShapeError("frozen_from: field dimensions do not match the generator");
    const Layout L{sol.particles(), sol.n(), sol.d(), sol.grid().steps()};
    return build_frozen(gen, L, sol.y(), sol.z(), 0, L.M, true);
}

SolutionField solve_bsde_fixed_law(const GeneratorSpec& gen, std::span<const double> terminal,
                                   const BrownianPaths& paths, const FrozenData& frozen,
                                   const SolverConfig& cfg) {
    cfg.validate();
    Sweeper sweeper(gen, paths, cfg);
    const Layout& L = sweeper.layout();
    const auto xi = checked_terminal(terminal, L);
    SolutionField sol(paths.grid(), L.N, L.n, L.d);
    set_terminal(sol, L.M, xi);
    sweeper.run(resolve_scheme(cfg.scheme, gen.law_mode), 0, L.M, frozen, sol);
    sol.diagnostics.iterations_used = 1;
    sol.diagnostics.converged = true;
    return sol;
}

SolutionField solve_bsde_fixed_law(const GeneratorSpec& gen, const TerminalCondition& xi,
                                   const BrownianPaths& paths, const FrozenData& frozen,
                                   const SolverConfig& cfg) {
    return solve_bsde_fixed_law(gen, terminal_values(xi, paths), paths, frozen, cfg);
}

std::vector<std::size_t> snap_breakpoints(const analysis::PartitionPlan& plan,
                                          const TimeGrid& grid) {
    std::vector<std::size_t> nodes{grid.steps()};
    for (double tj : plan.breakpoints) {
        if (tj > grid.horizon()) continue;
        const std::size_t k = grid.nearest(tj);
        if (k < nodes.back()) nodes.push_back(k);
    }
    if (nodes.back() != 0) nodes.push_back(0);
    return nodes;
}

SolutionField picard_solve(const GeneratorSpec& gen, std::span<const double> terminal,
                           const BrownianPaths& paths, const SolverConfig& cfg) {
    cfg.validate();
    Sweeper sweeper(gen, paths, cfg);
    const Layout& L = sweeper.layout();
    const Scheme scheme = resolve_scheme(cfg.scheme, gen.law_mode);
    const auto xi = checked_terminal(terminal, L);
    SolutionField work(paths.grid(), L.N, L.n, L.d);
    set_terminal(work, L.M, xi);

    std::vector<std::size_t> nodes{L.M, 0};
    if (cfg.partition) nodes = snap_breakpoints(*cfg.partition, paths.grid());

    Diagnostics& diag = work.diagnostics;
    diag.converged = true;
    for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
        auto iv = picard_interval(sweeper, gen, scheme, cfg, nodes[j + 1], nodes[j], work);
        diag.converged = diag.converged && iv.converged;
        diag.iterations_used = std::max(diag.iterations_used, iv.iterations);
        for (std::size_t k = 0; k < iv.distance_y.size(); ++k) {
            if (diag.distance_y.size() <= k) {
                diag.distance_y.push_back(0.0);
                diag.distance_z.push_back(0.0);
            }
            diag.distance_y[k] = std::max(diag.distance_y[k], iv.distance_y[k]);
            diag.distance_z[k] = std::max(diag.distance_z[k], iv.distance_z[k]);
        }
        diag.intervals.push_back(std::move(iv));
    }
    return work;
}

SolutionField picard_solve(const GeneratorSpec& gen, const TerminalCondition& xi,
                           const BrownianPaths& paths, const SolverConfig& cfg) {
    return picard_solve(gen, terminal_values(xi, paths), paths, cfg);
}

}  // namespace mfbsde
