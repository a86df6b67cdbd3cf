#pragma once

// Drivers f(t, w_t, y, z, mu), the worked examples with their stated
// constants, closed-form benchmarks, and random-point assumption samplers.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfbsde/measure.hpp"

namespace mfbsde {

struct Dims {
    std::size_t n = 1;
    std::size_t d = 1;
};

/// Which law enters the driver: that of Y (dimension n) or of (Y, Z)
/// (dimension n + n d).
enum class LawMode { law_of_y, law_of_yz };

using ScalarFn = std::function<double(double)>;
using ProcessFn = std::function<double(double t, std::span<const double> w)>;

struct AssumptionParams {
    std::optional<double> growth_k;   // K in A2, H2, B2
    std::optional<double> gamma;      // z-growth constant in A2
    std::optional<double> m;          // iterated-log depth in A2, A6
    std::optional<double> lambda;     // log exponent in A2, A6
    std::optional<double> il_shift;   // h for IL_{m,h}; e^(m) when absent
    std::optional<double> gamma0;     // quadratic constant in A3
    std::optional<double> lips_mu;    // L in A7
    std::optional<double> lips_z;     // L in H3, B3
    std::optional<double> growth_m;   // M in H3, B3
    std::optional<double> alpha;      // exponent in H3, B3
    std::optional<double> mono_a;     // A in B1
    ProcessFn theta;                  // A2, A3
    ProcessFn vartheta;               // H3, B3
    ScalarFn psi;                     // A3
    ScalarFn kappa;                   // A5
    ScalarFn zeta;                    // A6
    ScalarFn eta;                     // H1
    ScalarFn rho;                     // A1
    std::function<double(double r, double t, std::span<const double> w)> phi_bar;  // H4, B4
};

using EvalFn = std::function<void(double t, std::span<const double> w,
                                  std::span<const double> y, std::span<const double> z,
                                  const EmpiricalMeasure& mu, std::span<double> out)>;

enum class AssumptionId { A1, A2, A3, A4, A5, A6, A7, H1, H2, H3, H4, B1, B2, B3, B4 };

struct GeneratorSpec {
    std::string name;
    Dims dims;
    EvalFn eval;
    LawMode law_mode = LawMode::law_of_y;
    AssumptionParams params;
    std::vector<AssumptionId> declared;  // assumptions the constants are stated for

    std::size_t law_dim() const {
        return law_mode == LawMode::law_of_y ? dims.n : dims.n + dims.n * dims.d;
    }
    std::vector<double> operator()(double t, std::span<const double> w,
                                   std::span<const double> y, std::span<const double> z,
                                   const EmpiricalMeasure& mu) const;
};

enum class Example {
    ex_3_2,
    ex_3_3,
    ex_4_3,
    ex_4_4,
    ex_pre_4_11,
    zero,
    linear_meanfield,
    pure_z,
    broken_a2,
    custom
};

struct ExampleOptions {
    double a = 0.5;  // linear_meanfield: coefficient of the mean
    double b = 0.5;  // linear_meanfield: coefficient of y
};

GeneratorSpec make_example(Example which, Dims dims, const ExampleOptions& opts = {});

Example parse_example(const std::string& name);
std::string to_string(Example which);
AssumptionId parse_assumption(const std::string& name);
std::string to_string(AssumptionId id);

/// Spliced Osgood moduli used by the examples: u |ln u| ln|ln u| (resp.
/// u |ln u|) near 0, continued by the tangent line at the splice point.
double splice_phi(double u);
double splice_psi(double u);
inline constexpr double kPhiSplice = 0.049787068367863944;  // e^-3
inline constexpr double kPsiSplice = 0.1353352832366127;    // e^-2

/// f^+ ^ n_up - f^- ^ k_low, componentwise.
GeneratorSpec truncate_generator(const GeneratorSpec& gen, double n_up, double k_low);

/// Adds a constant to every component of the driver.
GeneratorSpec shift_generator(const GeneratorSpec& gen, double shift);

struct SamplerSpec {
    double y_max = 10.0;
    double z_max = 10.0;
    double horizon = 1.0;
    std::size_t cloud_size = 32;
    double cloud_scale_max = 3.0;
    std::uint64_t seed = 1;
};

struct AssumptionWitness {
    std::size_t index = 0;
    double t = 0.0;
    std::vector<double> w, y, y_bar, z, z_bar;
    std::string detail;
};

struct AssumptionReport {
    AssumptionId id = AssumptionId::A1;
    std::size_t points_tested = 0;
    double worst_residual = 0.0;  // <= 0 means the inequality held everywhere
    AssumptionWitness witness;
    std::uint64_t seed = 0;
};

/// Residual (left minus right side) of the assumption's inequality at
/// n_points random tuples. Point k depends only on (seed, k).
AssumptionReport check_assumption(const GeneratorSpec& gen, AssumptionId which,
                                  const SamplerSpec& sampler, std::size_t n_points);

/// Residual of a single sampled point, for reproducing a witness.
double assumption_residual_at(const GeneratorSpec& gen, AssumptionId which,
                              const SamplerSpec& sampler, std::size_t index,
                              AssumptionWitness* witness = nullptr);

enum class Benchmark { zero, linear_meanfield, pure_z };

struct BenchmarkParams {
    double a = 0.5;
    double b = 0.5;
    double c = 1.0;
    double horizon = 1.0;
};

struct ClosedForm {
    std::vector<double> y;
    std::vector<double> z;
};

/// Known solutions (n = d = 1): zero with xi = W_T, linear_meanfield with
/// xi = c, pure_z (f = z) with xi = W_T.
ClosedForm closed_form_solution(Benchmark which, const BenchmarkParams& p, double t,
                                double w);

}  // namespace mfbsde
