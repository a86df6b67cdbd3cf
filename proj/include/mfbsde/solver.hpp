#pragma once

// Backward regression scheme for BSDEs with a frozen law, and the outer
// law-freezing Picard iteration.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mfbsde/analysis.hpp"
#include "mfbsde/generators.hpp"
#include "mfbsde/measure.hpp"
#include "mfbsde/paths.hpp"

namespace mfbsde {

/// frozen_z: Z and the law come from the previous iterate, y stays implicit.
/// live_z: only the law is frozen; (y, z) are those of the current sweep.
/// automatic: frozen_z for law_of_y drivers, live_z for law_of_yz drivers.
enum class Scheme { automatic, frozen_z, live_z };

struct SolverConfig {
    int basis_degree = 3;
    int inner_iterations = 3;
    double picard_tol = 1e-4;
    int picard_max = 30;
    double damping = 1.0;  // theta in (0, 1]; 1 is the plain update
    std::optional<analysis::PartitionPlan> partition;
    Scheme scheme = Scheme::automatic;
    double ridge = 1e-10;

    void validate() const;
};

Scheme resolve_scheme(Scheme requested, LawMode mode);

struct IntervalDiagnostics {
    std::size_t first_node = 0;
    std::size_t last_node = 0;
    std::vector<double> distance_y;
    std::vector<double> distance_z;
    int iterations = 0;
    bool converged = false;
};

struct Diagnostics {
    /// Per Picard iteration: sup over nodes of mean |Y^k - Y^{k-1}|, and the
    /// same for Z. With a partition, the sup also runs over intervals.
    std::vector<double> distance_y;
    std::vector<double> distance_z;
    int iterations_used = 0;
    bool converged = false;
    std::vector<IntervalDiagnostics> intervals;
};

class SolutionField {
public:
    SolutionField(TimeGrid grid, std::size_t particles, std::size_t n, std::size_t d);

    const TimeGrid& grid() const { return grid_; }
    std::size_t particles() const { return particles_; }
    std::size_t n() const { return n_; }
    std::size_t d() const { return d_; }

    /// y: node-major (M+1) x N x n. z: M x N x (n d), row r column c at r*d + c.
    std::vector<double>& y() { return y_; }
    std::vector<double>& z() { return z_; }
    const std::vector<double>& y() const { return y_; }
    const std::vector<double>& z() const { return z_; }

    double y_at(std::size_t i, std::size_t p, std::size_t r = 0) const {
        return y_[(i * particles_ + p) * n_ + r];
    }
    double z_at(std::size_t i, std::size_t p, std::size_t r = 0, std::size_t c = 0) const {
        return z_[(i * particles_ + p) * n_ * d_ + r * d_ + c];
    }
    std::span<const double> y_row(std::size_t i, std::size_t p) const {
        return {y_.data() + (i * particles_ + p) * n_, n_};
    }
    std::span<const double> z_row(std::size_t i, std::size_t p) const {
        return {z_.data() + (i * particles_ + p) * n_ * d_, n_ * d_};
    }
    /// Sample mean of component r at node i.
    double mean_y(std::size_t i, std::size_t r = 0) const;
    double mean_z(std::size_t i, std::size_t r = 0, std::size_t c = 0) const;
    /// E|Y_{t_i}| with the Euclidean norm.
    double mean_abs_y(std::size_t i) const;

    Diagnostics diagnostics;

private:
    TimeGrid grid_;
    std::size_t particles_, n_, d_;
    std::vector<double> y_;
    std::vector<double> z_;
};

/// Data frozen from the previous iterate.
struct FrozenData {
    std::size_t first_node = 0;
    std::vector<EmpiricalMeasure> laws;  // nodes first_node, first_node + 1, ...
    std::optional<std::vector<double>> z;  // M x N x (n d), for frozen_z
};

/// Frozen data of the initial iterate (Y, Z) = (0, 0).
FrozenData zero_frozen_data(const GeneratorSpec& gen, const BrownianPaths& paths);

/// Frozen data built from a computed field (law of Y or of (Y, Z) per the
/// generator's law mode).
FrozenData frozen_from(const GeneratorSpec& gen, const SolutionField& sol);

/// One backward sweep with the law (and possibly Z) frozen.
SolutionField solve_bsde_fixed_law(const GeneratorSpec& gen, const TerminalCondition& xi,
                                   const BrownianPaths& paths, const FrozenData& frozen,
                                   const SolverConfig& cfg);

/// Same, with terminal values given as an N x n array.
SolutionField solve_bsde_fixed_law(const GeneratorSpec& gen,
                                   std::span<const double> terminal,
                                   const BrownianPaths& paths, const FrozenData& frozen,
                                   const SolverConfig& cfg);

SolutionField picard_solve(const GeneratorSpec& gen, const TerminalCondition& xi,
                           const BrownianPaths& paths, const SolverConfig& cfg);

SolutionField picard_solve(const GeneratorSpec& gen, std::span<const double> terminal,
                           const BrownianPaths& paths, const SolverConfig& cfg);

/// Grid nodes where the partition breakpoints land, descending from M to 0,
/// without duplicates.
std::vector<std::size_t> snap_breakpoints(const analysis::PartitionPlan& plan,
                                          const TimeGrid& grid);

}  // namespace mfbsde
