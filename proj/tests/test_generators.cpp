#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "mfbsde/errors.hpp"
#include "mfbsde/generators.hpp"

using namespace mfbsde;

namespace {
std::vector<double> eval(const GeneratorSpec& g, std::vector<double> w, std::vector<double> y,
                         std::vector<double> z, const EmpiricalMeasure& mu) {
    return g(0.0, w, y, z, mu);
}
}  // namespace

TEST_CASE("driver values at simple points") {
    const auto d1 = EmpiricalMeasure::dirac0(1);
    CHECK(eval(make_example(Example::ex_3_2, {1, 1}), {0}, {0}, {0}, d1)[0] ==
          doctest::Approx(-1.0));
    CHECK(eval(make_example(Example::ex_3_3, {1, 1}), {0}, {0}, {0}, d1)[0] ==
          doctest::Approx(2.0));

    const auto e43 = make_example(Example::ex_4_3, {2, 1});
    const auto v = eval(e43, {1}, {1, 0}, {1, 1}, EmpiricalMeasure({0.5, -1.0}, 2));
    const double zn = std::sqrt(2.0);
    CHECK(v[0] == doctest::Approx(1.0 - 1.0 + 2.0 * zn / (1.0 + zn) + 1.5));
    CHECK(v[1] == doctest::Approx(1.0 + 2.0 * zn / (1.0 + zn) - 3.0));

    const auto lm = make_example(Example::linear_meanfield, {1, 1}, {0.25, 2.0});
    CHECK(eval(lm, {0}, {3}, {0}, EmpiricalMeasure({4.0}, 1))[0] == doctest::Approx(7.0));
    CHECK(eval(make_example(Example::pure_z, {1, 1}), {0}, {5}, {-2}, d1)[0] == -2.0);
    CHECK(eval(make_example(Example::zero, {2, 3}), {0, 0, 0}, {1, 2},
               std::vector<double>(6, 1.0), EmpiricalMeasure::dirac0(2))[1] == 0.0);
}

TEST_CASE("law dimension follows the law mode") {
    CHECK(make_example(Example::ex_4_4, {2, 3}).law_dim() == 2);
    CHECK(make_example(Example::ex_pre_4_11, {2, 3}).law_dim() == 8);
}

TEST_CASE("dimension requirements and names") {
    CHECK_THROWS_AS(make_example(Example::ex_3_2, {2, 1}), ConfigError);
    CHECK_THROWS_AS(make_example(Example::pure_z, {1, 2}), ConfigError);
    CHECK_THROWS_AS(make_example(Example::zero, {0, 1}), ConfigError);
    CHECK_THROWS_AS(make_example(Example::custom, {1, 1}), ConfigError);
    for (Example e : {Example::ex_3_2, Example::ex_3_3, Example::ex_4_3, Example::ex_4_4,
                      Example::ex_pre_4_11, Example::zero, Example::linear_meanfield,
                      Example::pure_z, Example::broken_a2})
        CHECK(parse_example(to_string(e)) == e);
    CHECK_THROWS_AS(parse_example("ex_9_9"), ConfigError);
    CHECK(parse_assumption(to_string(AssumptionId::B3)) == AssumptionId::B3);
    CHECK_THROWS_AS(parse_assumption("A9"), ConfigError);
}

TEST_CASE("splice moduli are continuous, increasing and vanish at 0") {
    CHECK(splice_phi(0.0) == 0.0);
    CHECK(splice_psi(0.0) == 0.0);
    const double e3 = kPhiSplice, e2 = kPsiSplice;
    CHECK(splice_phi(e3 * (1 - 1e-12)) == doctest::Approx(splice_phi(e3 * (1 + 1e-12))));
    CHECK(splice_psi(e2 * (1 - 1e-12)) == doctest::Approx(splice_psi(e2 * (1 + 1e-12))));
    CHECK(splice_phi(e3) == doctest::Approx(e3 * 3.0 * std::log(3.0)));
    CHECK(splice_psi(e2) == doctest::Approx(2.0 * e2));
    double prev_phi = 0.0, prev_psi = 0.0;
    for (double u = 1e-12; u < 50.0; u *= 1.05) {
        CHECK(splice_phi(u) >= prev_phi);
        CHECK(splice_psi(u) >= prev_psi);
        prev_phi = splice_phi(u);
        prev_psi = splice_psi(u);
    }
}

TEST_CASE("truncate and shift wrappers") {
    const auto lm = make_example(Example::linear_meanfield, {1, 1}, {0.0, 1.0});
    const auto t = truncate_generator(lm, 2.0, 1.0);
    const auto d1 = EmpiricalMeasure::dirac0(1);
    CHECK(eval(t, {0}, {5}, {0}, d1)[0] == 2.0);
    CHECK(eval(t, {0}, {-5}, {0}, d1)[0] == -1.0);
    CHECK(eval(t, {0}, {0.5}, {0}, d1)[0] == 0.5);
    CHECK_THROWS_AS(truncate_generator(lm, -1.0, 1.0), ParameterError);
    const auto s = shift_generator(lm, 0.25);
    CHECK(eval(s, {0}, {1}, {0}, d1)[0] == 1.25);
    CHECK(s.declared.empty());
}

TEST_CASE("closed forms") {
    BenchmarkParams p{0.5, 0.5, 1.0, 1.0};
    CHECK(closed_form_solution(Benchmark::linear_meanfield, p, 0.0, 0.3).y[0] ==
          doctest::Approx(std::numbers::e));
    CHECK(closed_form_solution(Benchmark::pure_z, p, 0.25, 0.5).y[0] == doctest::Approx(1.25));
    CHECK(closed_form_solution(Benchmark::zero, p, 0.25, 0.5).z[0] == 1.0);
    CHECK_THROWS_AS(closed_form_solution(Benchmark::zero, p, 1.5, 0.0), DomainError);
}

TEST_CASE("declared assumptions hold on sampled points") {
    const std::vector<std::pair<Example, Dims>> cases{
        {Example::ex_3_2, {1, 1}},  {Example::ex_3_3, {1, 2}},      {Example::ex_4_3, {2, 1}},
        {Example::ex_4_4, {2, 2}},  {Example::ex_pre_4_11, {2, 1}},
    };
    for (const auto& [ex, dims] : cases) {
        const auto g = make_example(ex, dims);
        REQUIRE_FALSE(g.declared.empty());
        for (AssumptionId id : g.declared) {
            const auto rep = check_assumption(g, id, SamplerSpec{}, 1000);
            INFO(g.name << " " << to_string(id) << " " << rep.witness.detail);
            CHECK(rep.points_tested == 1000);
            CHECK(rep.worst_residual <= 1e-9);
        }
    }
}

TEST_CASE("broken generator yields a reproducible witness") {
    const auto g = make_example(Example::broken_a2, {1, 1});
    SamplerSpec s;
    s.seed = 77;
    const auto rep = check_assumption(g, AssumptionId::A2, s, 2000);
    CHECK(rep.worst_residual > 1e-9);
    AssumptionWitness w;
    CHECK(assumption_residual_at(g, AssumptionId::A2, s, rep.witness.index, &w) ==
          rep.worst_residual);
    CHECK(w.y == rep.witness.y);
    const auto again = check_assumption(g, AssumptionId::A2, s, 2000);
    CHECK(again.witness.index == rep.witness.index);
    // Point k does not depend on how many points are drawn.
    const auto more = check_assumption(g, AssumptionId::A2, s, 4000);
    CHECK(more.worst_residual >= rep.worst_residual);
}

TEST_CASE("assumptions without stated constants are rejected") {
    const auto g = make_example(Example::pure_z, {1, 1});
    CHECK_THROWS_AS(check_assumption(g, AssumptionId::A2, SamplerSpec{}, 10), ConfigError);
}

TEST_CASE("more worked driver values") {
    const auto e43 = make_example(Example::ex_4_3, {1, 2});
    CHECK(eval(e43, {0.6, 0.8}, {0}, {0, 0}, EmpiricalMeasure::dirac0(1))[0] == doctest::Approx(1.0));
    const auto z = make_example(Example::zero, {1, 1});
    SamplerSpec s;
    auto zero_a2 = z;
    zero_a2.params.growth_k = 1.0;
    CHECK(check_assumption(zero_a2, AssumptionId::A2, s, 500).worst_residual <= 0.0);
    const auto h1 = check_assumption(make_example(Example::ex_4_3, {2, 1}), AssumptionId::H1, s, 500);
    CHECK(h1.worst_residual <= 0.0);
    const auto broken = check_assumption(make_example(Example::broken_a2, {1, 1}), AssumptionId::A2, s, 500);
    CHECK(broken.worst_residual > 0.0);
    CHECK(broken.witness.y.size() == 1);
}
