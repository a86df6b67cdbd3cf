#include <cmath>
#include <vector>

#include "doctest.h"
#include "mfbsde/errors.hpp"
#include "mfbsde/paths.hpp"

using namespace mfbsde;

TEST_CASE("TimeGrid") {
    TimeGrid g(1.0, 3);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(3) == 1.0);
    CHECK(g.dt() == doctest::Approx(1.0 / 3.0));
    CHECK(g.nearest(0.34) == 1);
    CHECK(g.nearest(1.0) == 3);
    CHECK_THROWS_AS(g.node(4), ShapeError);
    CHECK_THROWS_AS(g.nearest(1.5), DomainError);
    CHECK_THROWS_AS(TimeGrid(0.0, 3), ParameterError);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), ParameterError);
    CHECK(TimeGrid(2.0, 4) == TimeGrid(2.0, 4));
}

TEST_CASE("keyed normals are reproducible and look standard normal") {
    CHECK(keyed_normal(1, 2, 3, 0) == keyed_normal(1, 2, 3, 0));
    CHECK(keyed_normal(1, 2, 3, 0) != keyed_normal(2, 2, 3, 0));
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
        const double x = keyed_normal(9, static_cast<std::uint64_t>(k), 0, 0);
        s += x;
        s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("simulate") {
    const TimeGrid g(2.0, 20);
    const auto p = simulate(5, g, 4000, 2);
    CHECK(p.particles() == 4000);
    CHECK(p.dim() == 2);
    for (std::size_t q = 0; q < 4000; ++q) CHECK(p.value(q, 0, 1) == 0.0);
    double var = 0.0;
    for (std::size_t q = 0; q < 4000; ++q) var += p.value(q, 20, 0) * p.value(q, 20, 0);
    CHECK(var / 4000.0 == doctest::Approx(2.0).epsilon(0.1));
    CHECK(p.increment(7, 3, 1) == doctest::Approx(p.value(7, 4, 1) - p.value(7, 3, 1)));

    // Adding particles leaves existing paths untouched.
    const auto more = simulate(5, g, 4500, 2);
    CHECK(more.value(123, 17, 1) == p.value(123, 17, 1));
    CHECK_THROWS_AS(simulate(5, g, 0, 1), ParameterError);
}

TEST_CASE("terminal_values") {
    const TimeGrid g(1.0, 4);
    const auto p = simulate(8, g, 10, 1);
    const auto id = terminal_values(TerminalCondition::identity(1), p);
    CHECK(id[3] == p.value(3, 4, 0));
    const auto ab = terminal_values(TerminalCondition::abs_state(2), p);
    REQUIRE(ab.size() == 20);
    CHECK(ab[7] == doctest::Approx(2.0 * std::abs(p.value(3, 4, 0))));
    CHECK(ab[6] == ab[7]);
    const auto c = terminal_values(TerminalCondition::constant_value(3, 1.5), p);
    CHECK(c.size() == 30);
    CHECK(c[29] == 1.5);
    CHECK_THROWS_AS(terminal_values(TerminalCondition::identity(2), p), ShapeError);
}

TEST_CASE("simulation contract examples") {
    const TimeGrid one(1.0, 1);
    const auto a = simulate(31, one, 100000, 1), b = simulate(31, one, 100000, 1);
    CHECK(a.values() == b.values());
    double m = 0.0, s2 = 0.0;
    for (std::size_t q = 0; q < 100000; ++q) m += a.value(q, 1, 0);
    m /= 100000.0;
    for (std::size_t q = 0; q < 100000; ++q) s2 += std::pow(a.value(q, 1, 0) - m, 2);
    CHECK(std::abs(s2 / 99999.0 - 1.0) <= 0.05);
}

TEST_CASE("abs terminal uses the Euclidean norm of W_T") {
    const BrownianPaths p(TimeGrid(1.0, 1), 1, 2, 0, {0.0, 0.0, 3.0, 4.0});
    CHECK(terminal_values(TerminalCondition::abs_state(1), p)[0] == doctest::Approx(10.0));
}
