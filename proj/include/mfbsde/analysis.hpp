#pragma once

// Scalar toolkit for iterated-logarithm growth, Bihari bounds, the
// test function Phi used for L^1 a-priori estimates, and the time-partition
// constants of the Picard existence argument.

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace mfbsde::analysis {

/// Largest supported depth for iter_exp / iter_ln. e^(5) overflows a double.
inline constexpr int kMaxIterDepth = 4;

/// e^(1) = e, e^(m) = exp(e^(m-1)).
double iter_exp(int m);

/// ln^(m)(x), the m-fold logarithm. Requires x >= e^(m) (up to rounding),
/// so that ln^(m)(x) >= 1.
double iter_ln(int m, double x);

/// IL_m^lambda(x) with the canonical shift h = e^(m).
double il(int m, double lambda, double x);

/// IL_{m,h}^lambda(x) = prod_{i<m} (ln^(i)(h+x))^{1/2} * (ln^(m)(h+x))^lambda.
double il_h(int m, double lambda, double h, double x);

/// Linear majorant of a function with at most linear growth
/// u(x) <= A(x+1):  (m + 2A) x + u(2A / (m + 2A)).
double linear_majorant(double growth_a, int m,
                       const std::function<double(double)>& u, double x);

struct BihariSpec {
    std::function<double(double)> kappa;  // nondecreasing, kappa(0) = 0
    double v0 = 0.0;
    double horizon = 1.0;
    int quad_points = 64;  // initial panel count for adaptive Simpson
};

/// Pi(x) = int_1^x du / kappa(u), x > 0.
double bihari_pi(const BihariSpec& spec, double x);

/// Pi^{-1}(Pi(v0) + horizon - t); exactly 0 when v0 == 0.
double bihari_bound(const BihariSpec& spec, double t);

struct TestFunctionParams {
    int m = 2;
    double lambda = 1.0;
    double growth_k = 0.0;  // K (or J in the comparison setting)
    double gamma = 1.0;
    double h = 0.0;         // shift, must exceed e^(m)
    double horizon = 1.0;

    /// 2(K + 2 gamma^2 / (2 lambda - 1)), the exponential rate in t.
    double time_rate() const;
    /// Q0 = exp(time_rate * horizon).
    double q0() const;
    void validate() const;
};

double test_phi(const TestFunctionParams& p, double t, double x);
/// Closed-form d/dx Phi.
double phi_dx(const TestFunctionParams& p, double t, double x);
/// Central differences of phi_dx, step max(1e-5, 1e-6 (h + x)).
double phi_dxx(const TestFunctionParams& p, double t, double x);
/// Closed-form d/dt Phi = time_rate * Phi.
double phi_dt(const TestFunctionParams& p, double t, double x);

/// Left side of the supersolution inequality
///   -K Phi_x x - Phi_x gamma |z| / IL_{m,h}(|z|) + Phi_xx |z|^2 / 2 + Phi_t
/// which must be nonnegative.
double supersolution_residual(const TestFunctionParams& p, double t, double x,
                              double z_norm);

/// min(Phi - (h+x)/2, Q0 (h+x) - Phi); nonnegative iff the sandwich holds.
double sandwich_residual(const TestFunctionParams& p, double t, double x);

enum class HConstraint { sandwich, supersolution, both };

struct HSearchGrid {
    double x_max = 1e6;
    int x_points = 48;
    double z_max = 1e6;
    int z_points = 48;
    int t_points = 5;
    double horizon = 1.0;
    double growth_k = 0.0;
    HConstraint constraints = HConstraint::both;
    double rel_tol = 1e-9;  // bisection stopping rule on h
};

struct HSearchResult {
    double h = 0.0;
    std::string binding;    // "sandwich" or "supersolution"
    double worst_residual = 0.0;  // normalized, at the returned h
    int evaluations = 0;
};

/// Smallest h (geometric sweep e^(m) 2^k, then bisection) for which the
/// selected constraints hold on every grid point.
HSearchResult find_min_h(int m, double lambda, double gamma,
                         const HSearchGrid& grid);

/// Normalized worst residual of the selected constraints at a given h, and
/// which constraint attains it.
struct ConstraintCheck {
    double worst = 0.0;
    std::string binding;
};
ConstraintCheck check_h_constraints(int m, double lambda, double gamma,
                                    double h, const HSearchGrid& grid);

struct AprioriConstants {
    double q0 = 1.0;
    double mean_bound_c = 0.0;  // may be +inf when the Gronwall factor overflows
    double h_used = 0.0;
};

/// Q0 = exp(2(K + 2 gamma^2/(2 lambda - 1)) T),
/// C  = 2 Q0 (h v 1) exp(2 K Q0 T).
AprioriConstants apriori_constants(int m, double lambda, double gamma,
                                   double growth_k, double horizon, double h);

enum class PartitionMode { eps_small_alpha, delta_large_alpha, upsilon_joint };

struct PartitionPlan {
    PartitionMode mode = PartitionMode::eps_small_alpha;
    double step = 0.0;
    double horizon = 0.0;
    std::vector<double> breakpoints;  // T_1 > T_2 > ... > 0
};

inline constexpr long kMaxPartitionIntervals = 10'000'000;

/// Step length and breakpoints T_j = (T - j step) v 0. More than
/// kMaxPartitionIntervals intervals raise CapacityError.
///
/// Recognised keys (all must be positive):
///   eps:     T, L, K, R2, C
///   delta:   T, L, K, R_varsigma, r, C_r
///   upsilon: T, K, r0, C_r0_A_L, C_tilde_r0
/// C, C_r, C_r0_A_L and C_tilde_r0 default to 1 when absent; every other key
/// is required.
PartitionPlan partition_plan(PartitionMode mode,
                             const std::map<std::string, double>& constants);

PartitionMode parse_partition_mode(const std::string& name);
std::string to_string(PartitionMode mode);

/// max over the grid of il(m+1, lambda, x) / il(m, lambda, x).
double il_ratio_max(int m, double lambda, const std::vector<double>& grid);

/// Smallest M on the grid with x^alpha <= M + x / il(m, lambda, x).
double sublinear_constant(int m, double lambda, double alpha,
                          const std::vector<double>& grid);

}  // namespace mfbsde::analysis
