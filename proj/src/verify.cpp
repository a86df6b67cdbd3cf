#include "mfbsde/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mfbsde/errors.hpp"

namespace mfbsde::verify {

namespace {

template <class Cost>
double min_over_permutations(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                             Cost cost) {
    if (a.size() != b.size() || a.dim() != b.dim())
        throw ShapeError("brute force: measures must have equal shape");
    if (a.size() > kBruteForceCap)
        throw CapacityError("brute force: at most 8 atoms");
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) total += cost(a.point(i), b.point(perm[i]));
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(a.size());
}

}  // namespace

double brute_force_w1(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    return min_over_permutations(a, b, [](auto x, auto y) {
        double s = 0.0;
        for (std::size_t c = 0; c < x.size(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
        return std::sqrt(s);
    });
}

double brute_force_w1_plus(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (a.dim() != 1) throw ShapeError("brute_force_w1_plus: 1-d only");
    return min_over_permutations(a, b,
                                 [](auto x, auto y) { return std::max(x[0] - y[0], 0.0); });
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

std::pair<double, double> ols_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ShapeError("ols_line: need >= 2 pairs");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    return {my - slope * mx, slope};
}

}  // namespace mfbsde::verify
