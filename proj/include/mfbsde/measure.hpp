#pragma once

// Uniform-weight empirical measures on R^k and their transport distances.

#include <cstddef>
#include <span>
#include <vector>

namespace mfbsde {

class EmpiricalMeasure {
public:
    /// Row-major samples, `samples.size() / dim` points of dimension `dim`.
    EmpiricalMeasure(std::vector<double> samples, std::size_t dim);

    /// `count` copies of the origin in R^dim.
    static EmpiricalMeasure dirac0(std::size_t dim, std::size_t count = 1);

    std::size_t size() const { return count_; }
    std::size_t dim() const { return dim_; }
    std::span<const double> point(std::size_t i) const {
        return {samples_.data() + i * dim_, dim_};
    }
    const std::vector<double>& samples() const { return samples_; }

    const std::vector<double>& mean() const { return mean_; }
    /// Average Euclidean norm; equals W1 to the point mass at 0.
    double mean_norm() const { return mean_norm_; }
    /// Average of x^+ (1-d only).
    double mean_plus() const;
    /// Samples in ascending order (1-d only).
    const std::vector<double>& sorted() const;

private:
    std::vector<double> samples_;
    std::size_t dim_;
    std::size_t count_;
    std::vector<double> mean_;
    double mean_norm_ = 0.0;
    double mean_plus_ = 0.0;
    std::vector<double> sorted_;
};

inline constexpr std::size_t kAssignmentCap = 128;

/// Exact W1 in 1-d from order statistics.
double w1_sorted(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// Exact W1 by minimum-cost matching on Euclidean costs.
double w1_assignment(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                     std::size_t cap = kAssignmentCap);

/// Index-paired transport cost, an upper bound on W1.
double w1_coupling_bound(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// One-sided cost with integrand (x - y)^+ under the comonotone pairing.
double w1_plus(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// Exact W1: order statistics in 1-d, assignment otherwise.
double w1_exact(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

double w1_to_dirac0(const EmpiricalMeasure& a);

/// Average of the samples (1-d only).
double moment_mean(const EmpiricalMeasure& a);
double moment_mean_plus(const EmpiricalMeasure& a);
double moment_coord_mean(const EmpiricalMeasure& a, std::size_t i);

}  // namespace mfbsde
