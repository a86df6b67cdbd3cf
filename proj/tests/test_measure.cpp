#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mfbsde/assignment.hpp"
#include "mfbsde/errors.hpp"
#include "mfbsde/measure.hpp"
#include "mfbsde/verify.hpp"
#include "oracles.hpp"

using namespace mfbsde;

namespace {
EmpiricalMeasure m1(std::vector<double> v) { return EmpiricalMeasure(std::move(v), 1); }

std::vector<double> normals(std::mt19937_64& rng, std::size_t n, double shift = 0.0) {
    std::normal_distribution<double> g(shift, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}
}  // namespace

TEST_CASE("EmpiricalMeasure construction and moments") {
    EmpiricalMeasure a({1.0, -2.0, 3.0, 0.0}, 2);
    CHECK(a.size() == 2);
    CHECK(a.dim() == 2);
    CHECK(a.mean()[0] == doctest::Approx(2.0));
    CHECK(a.mean()[1] == doctest::Approx(-1.0));
    CHECK(a.mean_norm() == doctest::Approx((std::sqrt(5.0) + 3.0) / 2.0));
    CHECK(moment_coord_mean(a, 1) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(moment_coord_mean(a, 2), ShapeError);
    CHECK_THROWS_AS(a.mean_plus(), ShapeError);

    auto b = m1({-1.0, 3.0, 0.5});
    CHECK(moment_mean(b) == doctest::Approx(2.5 / 3.0));
    CHECK(moment_mean_plus(b) == doctest::Approx(3.5 / 3.0));
    CHECK(b.sorted() == std::vector<double>{-1.0, 0.5, 3.0});

    CHECK_THROWS_AS(EmpiricalMeasure({1.0, 2.0, 3.0}, 2), ShapeError);
    CHECK_THROWS_AS(EmpiricalMeasure({}, 1), ShapeError);
    CHECK_THROWS_AS(EmpiricalMeasure({1.0}, 0), ShapeError);
    CHECK_THROWS_AS(EmpiricalMeasure({NAN}, 1), DomainError);

    auto d = EmpiricalMeasure::dirac0(3, 4);
    CHECK(d.size() == 4);
    CHECK(d.mean_norm() == 0.0);
}

TEST_CASE("w1 examples") {
    CHECK(w1_sorted(m1({0, 2}), m1({1, 3})) == doctest::Approx(1.0));
    CHECK(w1_sorted(m1({0, 0, 3}), m1({1, 1, 1})) == doctest::Approx(4.0 / 3.0));
    CHECK(oracle::brute_w1_1d({0, 0, 3}, {1, 1, 1}) == doctest::Approx(4.0 / 3.0));
    CHECK(w1_sorted(m1({0.5, 1.5}), m1({0.5, 1.5})) == 0.0);

    EmpiricalMeasure a({0, 0, 1, 0}, 2), b({0, 1, 1, 1}, 2);
    CHECK(w1_assignment(a, b) == doctest::Approx(1.0));
    CHECK(w1_assignment(m1({3, 1, 2}), m1({2, 3, 1})) == doctest::Approx(0.0));
    CHECK(w1_to_dirac0(a) == doctest::Approx(0.5));
    CHECK(w1_coupling_bound(m1({1, 2}), m1({1, 2})) == 0.0);
}

TEST_CASE("w1 errors") {
    CHECK_THROWS_AS(w1_sorted(m1({0, 1}), m1({0})), ShapeError);
    CHECK_THROWS_AS(w1_sorted(EmpiricalMeasure({0, 1}, 2), EmpiricalMeasure({0, 1}, 2)),
                    ShapeError);
    CHECK_THROWS_AS(w1_assignment(EmpiricalMeasure({0, 1}, 1), EmpiricalMeasure({0, 1, 2, 3}, 2)),
                    ShapeError);
    std::vector<double> big(200, 0.0);
    CHECK_THROWS_AS(w1_assignment(m1(big), m1(big)), CapacityError);
    CHECK_THROWS_AS(w1_plus(EmpiricalMeasure({0, 1}, 2), EmpiricalMeasure({0, 1}, 2)), ShapeError);
}

TEST_CASE("w1_assignment agrees with sorted order statistics in 1-d") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng() % 64);
        const auto a = m1(normals(rng, n)), b = m1(normals(rng, n, 0.7));
        CHECK(std::abs(w1_assignment(a, b) - w1_sorted(a, b)) <= 1e-12);
        CHECK(w1_coupling_bound(a, b) >= w1_sorted(a, b) - 1e-12);
    }
}

TEST_CASE("w1 and w1_plus against brute force") {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 150; ++k) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng() % 7);
        const auto va = normals(rng, n), vb = normals(rng, n, -0.3);
        const auto a = m1(va), b = m1(vb);
        CHECK(std::abs(w1_plus(a, b) - verify::brute_force_w1_plus(a, b)) <= 1e-12);
        CHECK(std::abs(w1_sorted(a, b) - oracle::brute_w1_1d(va, vb)) <= 1e-12);
        const EmpiricalMeasure c(normals(rng, 2 * n), 2), d(normals(rng, 2 * n), 2);
        CHECK(std::abs(w1_assignment(c, d) - verify::brute_force_w1(c, d)) <= 1e-12);
    }
}

TEST_CASE("w1_plus is one-sided") {
    CHECK(w1_plus(m1({0, 1}), m1({5, 6})) == 0.0);
    CHECK(w1_plus(m1({5, 6}), m1({0, 1})) == doctest::Approx(5.0));
    CHECK(w1_plus(m1({2, 0}), m1({1, 1})) == doctest::Approx(0.5));
}

TEST_CASE("solve_assignment") {
    // Classic 3 x 3 instance with optimum 5 (1 + 2 + 2).
    const std::vector<double> cost{4, 1, 3, 2, 0, 5, 3, 2, 2};
    const auto res = solve_assignment(cost, 3);
    CHECK(res.total_cost == doctest::Approx(5.0));
    double sum = 0.0;
    std::vector<bool> used(3, false);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK_FALSE(used[res.row_to_col[r]]);
        used[res.row_to_col[r]] = true;
        sum += cost[r * 3 + res.row_to_col[r]];
    }
    CHECK(sum == res.total_cost);
    CHECK_THROWS_AS(solve_assignment(cost, 2), ShapeError);
    CHECK(solve_assignment({}, 0).total_cost == 0.0);
}
