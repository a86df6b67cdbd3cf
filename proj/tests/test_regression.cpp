#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mfbsde/errors.hpp"
#include "mfbsde/regression.hpp"
#include "oracles.hpp"

using namespace mfbsde;

TEST_CASE("monomial exponents") {
    const auto e = monomial_exponents(2, 2);
    CHECK(e.size() == 6);
    CHECK(e[0] == std::vector<int>{0, 0});
    CHECK(monomial_exponents(3, 3).size() == 20);
    CHECK(monomial_exponents(1, 0).size() == 1);
}

TEST_CASE("projection matches a naive normal-equation fit") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t n = 500;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = g(rng);
        y[i] = std::sin(x[i]) + 0.1 * g(rng);
    }
    const auto fit = regress_conditional(y, 1, x, 1, 3, 0.0);
    const auto ref = oracle::poly_fit_1d(x, y, 3);
    for (std::size_t i = 0; i < n; ++i) CHECK(fit[i] == doctest::Approx(ref[i]).epsilon(1e-8));
}

TEST_CASE("polynomials inside the basis are reproduced exactly") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t n = 300;
    std::vector<double> s(2 * n), t(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        s[2 * i] = g(rng);
        s[2 * i + 1] = g(rng);
        t[2 * i] = 1.0 + s[2 * i] * s[2 * i + 1];
        t[2 * i + 1] = s[2 * i] * s[2 * i] - 2.0;
    }
    ConditionalExpectation ce(s, n, 2, 2);
    CHECK(ce.basis_size() == 6);
    const auto fit = ce.project(t, 2);
    for (std::size_t i = 0; i < 2 * n; ++i) CHECK(fit[i] == doctest::Approx(t[i]).epsilon(1e-7));
    CHECK(ce.coefficients(t, 2).cols() == 2);
}

TEST_CASE("degenerate state falls back to the mean") {
    std::vector<double> s(50, 0.0), t(50);
    for (std::size_t i = 0; i < 50; ++i) t[i] = static_cast<double>(i);
    ConditionalExpectation ce(s, 50, 1, 3);
    CHECK(ce.basis_size() == 1);
    for (double v : ce.project(t, 1)) CHECK(v == doctest::Approx(24.5));
}

TEST_CASE("regression errors") {
    std::vector<double> s(5, 1.0);
    for (std::size_t i = 0; i < 5; ++i) s[i] = static_cast<double>(i);
    CHECK_THROWS_AS(ConditionalExpectation(s, 5, 1, 5), RegressionError);
    CHECK_THROWS_AS(ConditionalExpectation(s, 4, 1, 1), ShapeError);
    CHECK_THROWS_AS(ConditionalExpectation(s, 5, 1, -1), ParameterError);
    ConditionalExpectation ok(s, 5, 1, 1);
    CHECK_THROWS_AS(ok.project(std::vector<double>(4, 0.0), 1), ShapeError);
}

TEST_CASE("cubic target on a linear basis matches the direct least-squares line") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x(1000), y(1000);
    for (std::size_t i = 0; i < 500; ++i) {
        x[2 * i] = g(rng);
        x[2 * i + 1] = -x[2 * i];
    }
    for (std::size_t i = 0; i < 1000; ++i) y[i] = x[i] * x[i] * x[i];
    const auto fit = regress_conditional(y, 1, x, 1, 1, 0.0);
    const auto ref = oracle::poly_fit_1d(x, y, 1);
    for (std::size_t i = 0; i < 1000; ++i) CHECK(fit[i] == doctest::Approx(ref[i]).epsilon(1e-9));
}

TEST_CASE("constant targets are reproduced") {
    std::vector<double> s(100), t(100, 3.25);
    for (std::size_t i = 0; i < 100; ++i) s[i] = std::sin(static_cast<double>(i));
    for (double v : regress_conditional(t, 1, s, 1, 3, 0.0)) CHECK(v == doctest::Approx(3.25).epsilon(1e-10));
}
