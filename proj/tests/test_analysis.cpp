#include <cmath>
#include <limits>

#include "doctest.h"
#include "mfbsde/analysis.hpp"
#include "mfbsde/errors.hpp"
#include "oracles.hpp"

using namespace mfbsde;
using namespace mfbsde::analysis;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("iter_exp matches frozen values") {
    CHECK(rel(iter_exp(1), oracle::kE) < 1e-15);
    CHECK(rel(iter_exp(2), oracle::kIterExp2) < 1e-12);
    CHECK(rel(iter_exp(3), oracle::kIterExp3) < 1e-12);
    CHECK_THROWS_AS(iter_exp(0), DepthError);
    CHECK_THROWS_AS(iter_exp(kMaxIterDepth + 1), DepthError);
}

TEST_CASE("iter_ln examples and domain") {
    CHECK(iter_ln(1, oracle::kE) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(iter_ln(2, std::exp(oracle::kE)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(iter_ln(2, oracle::kExpE2) == doctest::Approx(2.0).epsilon(1e-14));
    for (int m = 1; m <= 3; ++m) CHECK(rel(iter_ln(m, iter_exp(m)), 1.0) < 1e-12);
    CHECK_THROWS_AS(iter_ln(2, 10.0), DomainError);
    CHECK_THROWS_AS(iter_ln(1, 1.0), DomainError);
}

TEST_CASE("il and il_h") {
    CHECK(il(1, 0.7, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(il(2, 0.5, 0.0) == doctest::Approx(std::sqrt(oracle::kE)).epsilon(1e-14));
    CHECK(il(1, 1.0, oracle::kE * oracle::kE - oracle::kE) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(il_h(2, 1.0, oracle::kExpE2, 0.0) == doctest::Approx(oracle::kE * 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(il(1, 1.0, -1.0), DomainError);
    CHECK_THROWS_AS(il_h(2, 1.0, 10.0, 1.0), ParameterError);
}

TEST_CASE("linear_majorant examples") {
    CHECK(linear_majorant(1.0, 1, [](double x) { return x + 1.0; }, 0.0) ==
          doctest::Approx(5.0 / 3.0).epsilon(1e-14));
    CHECK(linear_majorant(1.0, 1, [](double) { return 0.0; }, 5.0) ==
          doctest::Approx(15.0).epsilon(1e-14));
    CHECK(linear_majorant(2.0, 3, [](double x) { return 2.0 * x; }, 1.0) ==
          doctest::Approx(7.0 + 8.0 / 7.0).epsilon(1e-14));
    CHECK_THROWS_AS(linear_majorant(0.0, 1, [](double x) { return x; }, 1.0), ParameterError);
}

TEST_CASE("bihari_bound") {
    BihariSpec lin;
    lin.kappa = [](double u) { return u; };
    lin.v0 = 1.0;
    lin.horizon = 1.0;
    CHECK(rel(bihari_bound(lin, 0.0), oracle::kE) < 1e-6);

    BihariSpec zero = lin;
    zero.v0 = 0.0;
    zero.kappa = [](double u) { return u * u + 1e-300; };
    CHECK(bihari_bound(zero, 0.3) == 0.0);

    BihariSpec rational = lin;
    rational.kappa = [](double u) { return u / (1.0 + u); };
    CHECK(rel(bihari_bound(rational, 0.0), oracle::kBihariRational) < 1e-8);
    // At t = horizon the bound is v0 itself.
    CHECK(rel(bihari_bound(rational, 1.0), 1.0) < 1e-10);

    CHECK_THROWS_AS(bihari_bound(lin, 1.5), DomainError);
    BihariSpec bad = lin;
    bad.v0 = -1.0;
    CHECK_THROWS_AS(bihari_bound(bad, 0.0), ParameterError);
    CHECK_THROWS_AS(bihari_pi(lin, 0.0), DomainError);
}

TEST_CASE("test function values") {
    TestFunctionParams p;
    p.m = 2;
    p.lambda = 1.0;
    p.growth_k = 0.0;
    p.gamma = 1.0;
    p.h = oracle::kExpE2;
    CHECK(rel(test_phi(p, 0.0, 0.0), oracle::kPhiHalf) < 1e-12);
    CHECK(rel(phi_dx(p, 0.0, 0.0), oracle::phi_dx_reference()) < 1e-12);

    p.growth_k = 1.0;
    CHECK(rel(p.q0(), std::exp(6.0)) < 1e-14);
    CHECK(rel(test_phi(p, 1.0, 0.0), oracle::kPhiTimeOne) < 1e-12);
    CHECK(rel(test_phi(p, 0.4, 12.5), oracle::phi(2, 1.0, 1.0, 1.0, p.h, 0.4, 12.5)) < 1e-13);
    CHECK(rel(phi_dt(p, 0.4, 12.5), p.time_rate() * test_phi(p, 0.4, 12.5)) < 1e-13);

    // Bracket tends to 1 from below, so phi_dx increases towards Q0 at t = T.
    double prev = 0.0;
    for (double x : {0.0, 1e3, 1e6, 1e12, 1e300}) {
        const double v = phi_dx(p, 1.0, x);
        CHECK(v > prev);
        CHECK(v < p.q0());
        prev = v;
    }

    p.h = 10.0;
    CHECK_THROWS_AS(test_phi(p, 0.0, 0.0), ParameterError);
    p.h = oracle::kExpE2;
    p.lambda = 0.5;
    CHECK_THROWS_AS(test_phi(p, 0.0, 0.0), ParameterError);
    p.lambda = 1.0;
    CHECK_THROWS_AS(test_phi(p, 0.0, -1.0), DomainError);
    CHECK_THROWS_AS(test_phi(p, 2.0, 0.0), DomainError);
}

TEST_CASE("phi_dxx against the derivative of the oracle") {
    TestFunctionParams p;
    p.m = 2;
    p.lambda = 0.8;
    p.growth_k = 0.5;
    p.gamma = 1.5;
    p.h = 3.0 * oracle::kIterExp2;
    for (double x : {0.0, 1e-3, 1.0, 100.0, 1e5}) {
        const double s = 1e-3 * (p.h + x);
        const double fd = (oracle::phi(2, 0.8, 0.5, 1.5, p.h, 0.2, x + 2 * s) -
                           2 * oracle::phi(2, 0.8, 0.5, 1.5, p.h, 0.2, x + s) +
                           oracle::phi(2, 0.8, 0.5, 1.5, p.h, 0.2, x)) /
                          (s * s);
        // Forward stencil, evaluated at x + s.
        CHECK(phi_dxx(p, 0.2, x + s) == doctest::Approx(fd).epsilon(1e-2));
        CHECK(phi_dxx(p, 0.2, x) > 0.0);
    }
}

TEST_CASE("find_min_h") {
    HSearchGrid grid;
    grid.constraints = HConstraint::sandwich;
    const auto sand = find_min_h(2, 1.0, 1.0, grid);
    CHECK(rel(sand.h, oracle::kExpE2) < 1e-3);
    CHECK(sand.binding == "sandwich");

    grid.constraints = HConstraint::both;
    const auto both = find_min_h(2, 1.0, 1.0, grid);
    CHECK(both.h >= sand.h * (1.0 - 1e-9));
    CHECK(both.h > iter_exp(2));
    CHECK(check_h_constraints(2, 1.0, 1.0, both.h, grid).worst >= -1e-12);

    CHECK_THROWS_AS(find_min_h(2, 0.5, 1.0, grid), ParameterError);
    CHECK_THROWS_AS(find_min_h(2, 1.0, 0.0, grid), ParameterError);
}

TEST_CASE("find_min_h reports the worst violation when the cap is too low") {
    // A huge z range with a huge gamma cannot be met below 2^64 e^(m).
    HSearchGrid grid;
    grid.z_max = 1e300;
    grid.growth_k = 0.0;
    try {
        find_min_h(1, 0.51, 1e6, grid);
        WARN("search unexpectedly succeeded");
    } catch (const SearchError& err) {
        CHECK(err.worst_violation() < 0.0);
    }
}

TEST_CASE("apriori_constants") {
    const auto c = apriori_constants(2, 1.0, 1.0, 1.0, 1.0, 2000.0);
    CHECK(rel(c.q0, std::exp(6.0)) < 1e-14);
    const auto k0 = apriori_constants(2, 1.0, 1.0, 0.0, 1.0, 2000.0);
    CHECK(rel(k0.mean_bound_c, 2.0 * k0.q0 * 2000.0) < 1e-14);
    const auto tiny = apriori_constants(2, 1.0, 1e-9, 0.0, 1.0, 0.5 + oracle::kIterExp2);
    CHECK(rel(tiny.q0, 1.0) < 1e-12);
}

TEST_CASE("partition_plan") {
    const auto eps = partition_plan(PartitionMode::eps_small_alpha,
                                    {{"T", 1.0}, {"L", 1.0}, {"K", 2.0}, {"R2", 1.0}, {"C", 1.0}});
    CHECK(eps.step == doctest::Approx(1.0 / 32.0).epsilon(1e-14));
    CHECK(eps.breakpoints.size() == 32);
    CHECK(eps.breakpoints.back() == 0.0);
    for (std::size_t j = 1; j < eps.breakpoints.size(); ++j)
        CHECK(eps.breakpoints[j] < eps.breakpoints[j - 1]);

    const auto ups = partition_plan(PartitionMode::upsilon_joint,
                                    {{"T", 1.0}, {"K", 0.5}, {"r0", 2.0}});
    CHECK(ups.step == doctest::Approx(1.0 / 8.0).epsilon(1e-14));

    const auto one = partition_plan(PartitionMode::eps_small_alpha,
                                    {{"T", 0.01}, {"L", 1.0}, {"K", 2.0}, {"R2", 1.0}});
    REQUIRE(one.breakpoints.size() == 1);
    CHECK(one.breakpoints[0] == 0.0);

    try {
        partition_plan(PartitionMode::delta_large_alpha, {{"T", 1.0}, {"L", 1.0}, {"K", 1.0}});
        FAIL("expected a missing-constant error");
    } catch (const ConfigError& err) {
        CHECK(std::string(err.what()).find("R_varsigma") != std::string::npos);
    }
    CHECK_THROWS_AS(partition_plan(PartitionMode::eps_small_alpha,
                                   {{"T", 1.0}, {"L", -1.0}, {"K", 2.0}, {"R2", 1.0}}),
                    ConfigError);
    CHECK(parse_partition_mode("eps") == PartitionMode::eps_small_alpha);
    CHECK(parse_partition_mode("upsilon_joint") == PartitionMode::upsilon_joint);
    CHECK_THROWS_AS(parse_partition_mode("zeta"), ConfigError);
}
