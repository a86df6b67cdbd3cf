#include "mfbsde/paths.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mfbsde/errors.hpp"
#include "mfbsde/parallel.hpp"

namespace mfbsde {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ParameterError("TimeGrid: horizon must be positive and finite");
    if (steps == 0) throw ParameterError("TimeGrid: steps must be >= 1");
}

double TimeGrid::node(std::size_t i) const {
    if (i > steps_)
        throw ShapeError("TimeGrid: node " + std::to_string(i) + " beyond " +
                         std::to_string(steps_));
    if (i == steps_) return horizon_;
    return horizon_ * static_cast<double>(i) / static_cast<double>(steps_);
}

std::size_t TimeGrid::nearest(double t) const {
    if (!(t >= 0.0 && t <= horizon_ * (1.0 + 1e-12)))
        throw DomainError("TimeGrid: time outside [0, T]");
    const double k = std::round(t / dt());
    return std::min(steps_, static_cast<std::size_t>(k));
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform on (0, 1), never exactly 0.
double to_open_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double keyed_normal(std::uint64_t seed, std::uint64_t particle, std::uint64_t step,
                    std::uint64_t coord) {
    std::uint64_t h = splitmix(seed);
    h = splitmix(h ^ particle);
    h = splitmix(h ^ step);
    h = splitmix(h ^ coord);
    const double u1 = to_open_unit(h);
    const double u2 = to_open_unit(splitmix(h));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

BrownianPaths::BrownianPaths(TimeGrid grid, std::size_t particles, std::size_t dim,
                             std::uint64_t seed, std::vector<double> values)
    : grid_(grid), particles_(particles), dim_(dim), seed_(seed), values_(std::move(values)) {
    if (particles_ == 0 || dim_ == 0)
        throw ParameterError("BrownianPaths: particles and dim must be >= 1");
    if (values_.size() != (grid_.steps() + 1) * particles_ * dim_)
        throw ShapeError("BrownianPaths: value array has wrong size");
}

BrownianPaths simulate(std::uint64_t seed, const TimeGrid& grid, std::size_t particles,
                       std::size_t dim) {
    if (particles == 0 || dim == 0)
        throw ParameterError("simulate: particles and dim must be >= 1");
    const std::size_t steps = grid.steps();
    std::vector<double> values((steps + 1) * particles * dim, 0.0);
    const double scale = std::sqrt(grid.dt());
    parallel_for(particles, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            for (std::size_t i = 0; i < steps; ++i) {
                for (std::size_t c = 0; c < dim; ++c) {
                    const double prev = values[(i * particles + p) * dim + c];
                    values[((i + 1) * particles + p) * dim + c] =
                        prev + scale * keyed_normal(seed, p, i, c);
                }
            }
        }
    });
    return BrownianPaths(grid, particles, dim, seed, std::move(values));
}

TerminalCondition TerminalCondition::identity(std::size_t n) {
    TerminalCondition xi;
    xi.kind = Kind::terminal_state;
    xi.n = n;
    return xi;
}

TerminalCondition TerminalCondition::constant_value(std::size_t n, double c) {
    TerminalCondition xi;
    xi.kind = Kind::constant;
    xi.n = n;
    xi.c = c;
    return xi;
}

TerminalCondition TerminalCondition::abs_state(std::size_t n) {
    TerminalCondition xi;
    xi.kind = Kind::abs_terminal;
    xi.n = n;
    return xi;
}

std::vector<double> terminal_values(const TerminalCondition& xi, const BrownianPaths& paths) {
    const std::size_t n = xi.n;
    const std::size_t N = paths.particles();
    const std::size_t M = paths.grid().steps();
    if (n == 0) throw ShapeError("terminal_values: n must be >= 1");
    if (xi.kind == TerminalCondition::Kind::terminal_state && !xi.g && n != paths.dim())
        throw ShapeError("terminal_values: identity payoff needs n == d");
    std::vector<double> out(N * n);
    for (std::size_t p = 0; p < N; ++p) {
        const auto w = paths.state(p, M);
        std::span<double> row(out.data() + p * n, n);
        switch (xi.kind) {
            case TerminalCondition::Kind::constant:
                std::fill(row.begin(), row.end(), xi.c);
                break;
            case TerminalCondition::Kind::abs_terminal: {
                double s = 0.0;
                for (double v : w) s += v * v;
                std::fill(row.begin(), row.end(), 2.0 * std::sqrt(s));
                break;
            }
            case TerminalCondition::Kind::terminal_state:
                if (xi.g)
                    xi.g(w, row);
                else
                    std::copy(w.begin(), w.end(), row.begin());
                break;
        }
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (!std::isfinite(out[k]))
            throw DomainError("terminal_values: non-finite payoff for particle " +
                              std::to_string(k / n));
    }
    return out;
}

}  // namespace mfbsde
