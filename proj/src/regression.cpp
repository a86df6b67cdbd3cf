#include "mfbsde/regression.hpp"

#include <cmath>
#include <sstream>

#include "mfbsde/errors.hpp"
#include "mfbsde/parallel.hpp"

namespace mfbsde {

std::vector<std::vector<int>> monomial_exponents(std::size_t dim, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(dim, 0);
    for (int total = 0; total <= degree; ++total) {
        // Enumerate compositions of `total` into `dim` parts.
        const auto rec = [&](auto&& self, std::size_t pos, int left) -> void {
            if (pos + 1 == dim || dim == 0) {
                if (dim > 0) cur[pos] = left;
                if (dim > 0 || left == 0) out.push_back(cur);
                return;
            }
            for (int k = left; k >= 0; --k) {
                cur[pos] = k;
                self(self, pos + 1, left - k);
            }
        };
        rec(rec, 0, total);
    }
    return out;
}

ConditionalExpectation::ConditionalExpectation(std::span<const double> state,
                                               std::size_t particles, std::size_t dim,
                                               int degree, double ridge)
    : particles_(particles) {
    if (degree < 0) throw ParameterError("regression: basis degree must be >= 0");
    if (particles == 0 || state.size() != particles * dim)
        throw ShapeError("regression: state array does not match N x d");

    // Standardize each coordinate; keep only those that vary.
    std::vector<std::size_t> keep;
    std::vector<double> mean(dim, 0.0), scale(dim, 1.0);
    for (std::size_t c = 0; c < dim; ++c) {
        double s = 0.0;
        for (std::size_t p = 0; p < particles; ++p) s += state[p * dim + c];
        mean[c] = s / static_cast<double>(particles);
        double v = 0.0;
        for (std::size_t p = 0; p < particles; ++p) {
            const double e = state[p * dim + c] - mean[c];
            v += e * e;
        }
        v /= static_cast<double>(particles);
        if (v > 0.0) {
            scale[c] = 1.0 / std::sqrt(v);
            keep.push_back(c);
        }
    }
    const auto exps = monomial_exponents(keep.size(), keep.empty() ? 0 : degree);
    const std::size_t P = exps.size();
    if (particles <= P) {
        std::ostringstream os;
        os << "regression: " << particles << " samples cannot fit " << P << " basis functions";
        throw RegressionError(os.str(), std::numeric_limits<double>::infinity());
    }

    features_.resize(static_cast<Eigen::Index>(particles), static_cast<Eigen::Index>(P));
    parallel_for(particles, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> x(keep.size());
        for (std::size_t p = lo; p < hi; ++p) {
            for (std::size_t k = 0; k < keep.size(); ++k)
                x[k] = (state[p * dim + keep[k]] - mean[keep[k]]) * scale[keep[k]];
            for (std::size_t j = 0; j < P; ++j) {
                double v = 1.0;
                for (std::size_t k = 0; k < keep.size(); ++k)
                    for (int e = 0; e < exps[j][k]; ++e) v *= x[k];
                features_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = v;
            }
        }
    });

    Eigen::MatrixXd gram = features_.transpose() * features_ / static_cast<double>(particles);
    gram.diagonal().array() += ridge;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(condition_ <= kMaxConditionNumber)) {
        std::ostringstream os;
        os << "regression: normal equations are rank deficient (condition number "
           << condition_ << ", " << P << " basis functions, " << particles << " samples)";
        throw RegressionError(os.str(), condition_);
    }
    gram_.compute(gram);
}

Eigen::MatrixXd ConditionalExpectation::coefficients(std::span<const double> targets,
                                                     std::size_t q) const {
    if (targets.size() != particles_ * q)
        throw ShapeError("regression: targets do not match N x q");
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        t(targets.data(), static_cast<Eigen::Index>(particles_), static_cast<Eigen::Index>(q));
    const Eigen::MatrixXd rhs = features_.transpose() * t / static_cast<double>(particles_);
    return gram_.solve(rhs);
}

std::vector<double> ConditionalExpectation::project(std::span<const double> targets,
                                                    std::size_t q) const {
    const Eigen::MatrixXd beta = coefficients(targets, q);
    std::vector<double> out(particles_ * q);
    const auto P = features_.cols();
    parallel_for(particles_, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            for (std::size_t c = 0; c < q; ++c) {
                double v = 0.0;
                for (Eigen::Index j = 0; j < P; ++j)
                    v += features_(static_cast<Eigen::Index>(p), j) *
                         beta(j, static_cast<Eigen::Index>(c));
                out[p * q + c] = v;
            }
        }
    });
    return out;
}

std::vector<double> regress_conditional(std::span<const double> targets, std::size_t q,
                                        std::span<const double> state, std::size_t dim,
                                        int degree, double ridge) {
    if (dim == 0 || state.size() % dim != 0)
        throw ShapeError("regress_conditional: state size is not a multiple of dim");
    const ConditionalExpectation ce(state, state.size() / dim, dim, degree, ridge);
    return ce.project(targets, q);
}

}  // namespace mfbsde
