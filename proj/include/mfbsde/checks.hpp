#pragma once

// Report-only checks of a-priori bounds, comparison and appendix
// estimates on computed solution fields.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mfbsde/analysis.hpp"
#include "mfbsde/generators.hpp"
#include "mfbsde/paths.hpp"
#include "mfbsde/solver.hpp"

namespace mfbsde {

/// Per-particle left Riemann sum of theta(t_i, W_{t_i}) over the grid.
std::vector<double> theta_integral(const ProcessFn& theta, const BrownianPaths& paths);

struct AprioriReport {
    double margin = 0.0;  // min over nodes of bound - E|Y_{t_i}|
    double bound = 0.0;   // C (E|xi| + E int theta) + C
    std::size_t worst_node = 0;
    std::vector<double> mean_abs_y;
    bool holds() const { return margin >= 0.0; }
};

AprioriReport check_apriori(const SolutionField& sol, std::span<const double> xi,
                            std::span<const double> theta_integrals,
                            const analysis::AprioriConstants& consts);

struct ComparisonReport {
    double max_fraction = 0.0;  // max over nodes of the fraction with y1 > y2 + tol
    std::size_t worst_node = 0;
};

ComparisonReport check_comparison(const SolutionField& sol1, const SolutionField& sol2,
                                  double tol);

enum class AppendixLemma { lemma_4_5, lemma_4_6, lemma_4_7, lemma_4_8, lemma_new };

AppendixLemma parse_appendix_lemma(const std::string& name);
std::string to_string(AppendixLemma which);

struct AppendixConstants {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double p = 2.0;
    double beta = 0.0;   // weight exponent for lemma_new
    double c_main = 1.0; // constant multiplying the Y term (or in the exponential)
    double c_p = 1.0;    // constant multiplying the data terms
    ProcessFn g;         // nonnegative process, zero when empty
    ProcessFn theta;     // nonnegative process, zero when empty
    ScalarFn varphi;     // concave modulus, zero when empty
};

struct AppendixReport {
    AppendixLemma which = AppendixLemma::lemma_4_5;
    bool skipped = false;
    std::string note;
    double lhs = 0.0;     // at the node with the smallest margin
    double rhs = 0.0;
    double margin = 0.0;  // min over nodes of rhs - lhs
    std::size_t worst_node = 0;
};

AppendixReport check_appendix_estimate(const SolutionField& sol, const BrownianPaths& paths,
                                       AppendixLemma which, const AppendixConstants& consts);

}  // namespace mfbsde
