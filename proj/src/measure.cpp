#include "mfbsde/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfbsde/assignment.hpp"
#include "mfbsde/errors.hpp"
#include "mfbsde/parallel.hpp"

namespace mfbsde {

namespace {

double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

void require_1d(const EmpiricalMeasure& a, const char* who) {
    if (a.dim() != 1)
        throw ShapeError(std::string(who) + ": measure must be 1-dimensional, got dim " +
                         std::to_string(a.dim()));
}

void require_same_shape(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                        const char* who) {
    if (a.size() != b.size())
        throw ShapeError(std::string(who) + ": sample counts differ (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                         ")");
    if (a.dim() != b.dim())
        throw ShapeError(std::string(who) + ": dimensions differ (" +
                         std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> samples, std::size_t dim)
    : samples_(std::move(samples)), dim_(dim) {
    if (dim_ == 0) throw ShapeError("EmpiricalMeasure: dimension must be >= 1");
    if (samples_.empty() || samples_.size() % dim_ != 0)
        throw ShapeError("EmpiricalMeasure: need a positive multiple of dim samples, got " +
                         std::to_string(samples_.size()));
    count_ = samples_.size() / dim_;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!std::isfinite(samples_[i]))
            throw DomainError("EmpiricalMeasure: non-finite sample at point " +
                              std::to_string(i / dim_));
    }
    mean_.assign(dim_, 0.0);
    for (std::size_t p = 0; p < count_; ++p) {
        const auto x = point(p);
        for (std::size_t c = 0; c < dim_; ++c) mean_[c] += x[c];
        mean_norm_ += norm(x);
    }
    const double inv = 1.0 / static_cast<double>(count_);
    for (double& m : mean_) m *= inv;
    mean_norm_ *= inv;
    if (dim_ == 1) {
        for (double v : samples_) mean_plus_ += std::max(v, 0.0);
        mean_plus_ *= inv;
        sorted_ = samples_;
        std::sort(sorted_.begin(), sorted_.end());
    }
}

EmpiricalMeasure EmpiricalMeasure::dirac0(std::size_t dim, std::size_t count) {
    return EmpiricalMeasure(std::vector<double>(dim * std::max<std::size_t>(count, 1), 0.0),
                            dim);
}

double EmpiricalMeasure::mean_plus() const {
    require_1d(*this, "mean_plus");
    return mean_plus_;
}

const std::vector<double>& EmpiricalMeasure::sorted() const {
    require_1d(*this, "sorted");
    return sorted_;
}

double w1_sorted(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    require_1d(a, "w1_sorted");
    require_same_shape(a, b, "w1_sorted");
    const auto& sa = a.sorted();
    const auto& sb = b.sorted();
    double total = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) total += std::abs(sa[i] - sb[i]);
    return total / static_cast<double>(sa.size());
}

double w1_assignment(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                     std::size_t cap) {
    require_same_shape(a, b, "w1_assignment");
    const std::size_t n = a.size();
    if (n > cap)
        throw CapacityError("w1_assignment: " + std::to_string(n) +
                            " samples exceed the assignment cap of " +
                            std::to_string(cap) + "; use w1_coupling_bound");
    std::vector<double> cost(n * n);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const auto x = a.point(i);
            for (std::size_t j = 0; j < n; ++j) {
                const auto y = b.point(j);
                double s = 0.0;
                for (std::size_t c = 0; c < x.size(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
                cost[i * n + j] = std::sqrt(s);
            }
        }
    });
    return solve_assignment(cost, n).total_cost / static_cast<double>(n);
}

double w1_coupling_bound(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    require_same_shape(a, b, "w1_coupling_bound");
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto x = a.point(i);
        const auto y = b.point(i);
        double s = 0.0;
        for (std::size_t c = 0; c < x.size(); ++c) s += (x[c] - y[c]) * (x[c] - y[c]);
        total += std::sqrt(s);
    }
    return total / static_cast<double>(a.size());
}

double w1_plus(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    require_1d(a, "w1_plus");
    require_same_shape(a, b, "w1_plus");
    const auto& sa = a.sorted();
    const auto& sb = b.sorted();
    double total = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) total += std::max(sa[i] - sb[i], 0.0);
    return total / static_cast<double>(sa.size());
}

double w1_exact(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    return a.dim() == 1 ? w1_sorted(a, b) : w1_assignment(a, b);
}

double w1_to_dirac0(const EmpiricalMeasure& a) { return a.mean_norm(); }

double moment_mean(const EmpiricalMeasure& a) {
    require_1d(a, "moment_mean");
    return a.mean()[0];
}

double moment_mean_plus(const EmpiricalMeasure& a) { return a.mean_plus(); }

double moment_coord_mean(const EmpiricalMeasure& a, std::size_t i) {
    if (i >= a.dim())
        throw ShapeError("moment_coord_mean: coordinate " + std::to_string(i) +
                         " out of range for dim " + std::to_string(a.dim()));
    return a.mean()[i];
}

}  // namespace mfbsde
