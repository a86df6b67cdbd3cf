#pragma once

// Independent reference computations used to validate the fast routines.

#include <cstddef>
#include <functional>
#include <span>
#include <utility>

#include "mfbsde/measure.hpp"

namespace mfbsde::verify {

inline constexpr std::size_t kBruteForceCap = 8;

/// Minimum over all N! couplings of the mean Euclidean cost.
double brute_force_w1(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

/// Minimum over all N! couplings of the mean of (x - y)^+ (1-d).
double brute_force_w1_plus(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

double central_difference(const std::function<double(double)>& f, double x, double h);

/// Ordinary least squares y ~ intercept + slope x from the closed-form
/// sample moments.
std::pair<double, double> ols_line(std::span<const double> x, std::span<const double> y);

}  // namespace mfbsde::verify
