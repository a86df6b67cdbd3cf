#pragma once

// Least-squares conditional expectation onto polynomial features of the
// current Brownian state.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mfbsde {

inline constexpr double kMaxConditionNumber = 1e12;

class ConditionalExpectation {
public:
    /// `state` is N x d row-major. Coordinates with zero sample variance are
    /// dropped, so a degenerate state falls back to the intercept alone.
    ConditionalExpectation(std::span<const double> state, std::size_t particles,
                           std::size_t dim, int degree, double ridge = 1e-10);

    std::size_t basis_size() const { return static_cast<std::size_t>(features_.cols()); }
    double condition_number() const { return condition_; }

    /// In-sample fitted values of each column of `targets` (N x q row-major).
    std::vector<double> project(std::span<const double> targets, std::size_t q) const;

    /// Least-squares coefficients, basis_size() x q.
    Eigen::MatrixXd coefficients(std::span<const double> targets, std::size_t q) const;

    const Eigen::MatrixXd& features() const { return features_; }

private:
    std::size_t particles_;
    Eigen::MatrixXd features_;  // N x P
    Eigen::LLT<Eigen::MatrixXd> gram_;
    double condition_ = 1.0;
};

/// Exponents of all monomials in `dim` variables with total degree <= degree,
/// in graded order starting with the constant.
std::vector<std::vector<int>> monomial_exponents(std::size_t dim, int degree);

std::vector<double> regress_conditional(std::span<const double> targets, std::size_t q,
                                        std::span<const double> state, std::size_t dim,
                                        int degree, double ridge = 1e-10);

}  // namespace mfbsde
