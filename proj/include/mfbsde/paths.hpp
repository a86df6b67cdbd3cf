#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mfbsde {

class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps);

    double horizon() const { return horizon_; }
    std::size_t steps() const { return steps_; }
    double dt() const { return horizon_ / static_cast<double>(steps_); }
    /// t_i = i * T / M; node(steps()) is exactly T.
    double node(std::size_t i) const;
    /// Nearest node index to time t in [0, T].
    std::size_t nearest(double t) const;

    bool operator==(const TimeGrid& other) const = default;

private:
    double horizon_;
    std::size_t steps_;
};

/// One standard normal keyed by (seed, particle, step, coordinate). Adding
/// particles or steps never changes previously drawn values.
double keyed_normal(std::uint64_t seed, std::uint64_t particle, std::uint64_t step,
                    std::uint64_t coord);

class BrownianPaths {
public:
    BrownianPaths(TimeGrid grid, std::size_t particles, std::size_t dim,
                  std::uint64_t seed, std::vector<double> values);

    const TimeGrid& grid() const { return grid_; }
    std::size_t particles() const { return particles_; }
    std::size_t dim() const { return dim_; }
    std::uint64_t seed() const { return seed_; }

    /// Time-major storage: ((i * N) + p) * d + c.
    double value(std::size_t p, std::size_t i, std::size_t c) const {
        return values_[(i * particles_ + p) * dim_ + c];
    }
    /// All particles at node i, N x d row-major.
    std::span<const double> states_at(std::size_t i) const {
        return {values_.data() + i * particles_ * dim_, particles_ * dim_};
    }
    std::span<const double> state(std::size_t p, std::size_t i) const {
        return {values_.data() + (i * particles_ + p) * dim_, dim_};
    }
    double increment(std::size_t p, std::size_t i, std::size_t c) const {
        return value(p, i + 1, c) - value(p, i, c);
    }
    const std::vector<double>& values() const { return values_; }

private:
    TimeGrid grid_;
    std::size_t particles_;
    std::size_t dim_;
    std::uint64_t seed_;
    std::vector<double> values_;
};

BrownianPaths simulate(std::uint64_t seed, const TimeGrid& grid, std::size_t particles,
                       std::size_t dim);

struct TerminalCondition {
    enum class Kind { terminal_state, constant, abs_terminal };
    Kind kind = Kind::terminal_state;
    std::size_t n = 1;
    /// g(W_T) -> R^n, used by terminal_state. Defaults to copying W_T.
    std::function<void(std::span<const double> w, std::span<double> out)> g;
    double c = 0.0;  // value for constant

    static TerminalCondition identity(std::size_t n);
    static TerminalCondition constant_value(std::size_t n, double c);
    /// xi_i = 2 |W_T| for every component.
    static TerminalCondition abs_state(std::size_t n);
};

/// N x n row-major terminal payoffs.
std::vector<double> terminal_values(const TerminalCondition& xi, const BrownianPaths& paths);

}  // namespace mfbsde
