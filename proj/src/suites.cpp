#include <string>
#include <vector>

#include "mfbsde/errors.hpp"
#include "mfbsde/harness.hpp"

namespace mfbsde {

namespace {

const char* const kUnitMath = R"(
name = unit_math
checks = math, transport
seed = 20240601
)";

const char* const kOracleZero = R"(
name = oracle_zero
generator = zero
terminal = identity
grid.horizon = 1
grid.steps = 50
particles = 10000
seed = 42
checks = oracle, martingale
oracle.tol = 0.05
)";

const char* const kOraclePureZ = R"(
name = oracle_pure_z
generator = pure_z
terminal = identity
grid.horizon = 1
grid.steps = 50
particles = 10000
seed = 42
checks = oracle
oracle.tol = 0.05
)";

const char* const kOracleLinear = R"(
name = oracle_linear_meanfield
generator = linear_meanfield
generator.a = 0.5
generator.b = 0.5
terminal = constant
terminal.value = 1
grid.horizon = 1
grid.steps = 50
particles = 10000
seed = 42
checks = oracle
oracle.tol = 0.03
oracle.max_iterations = 15
)";

const char* const kComparisonTerminal = R"(
name = comparison_ex_3_3_terminal_shift
generator = ex_3_3
terminal = identity
grid.horizon = 1
grid.steps = 50
particles = 10000
seed = 7
checks = comparison
comparison.terminal_shift = 1
comparison.tol_factor = 3
comparison.max_fraction = 0.01
)";

const char* const kComparisonDriver = R"(
name = comparison_ex_3_3_driver_shift
generator = ex_3_3
terminal = identity
grid.horizon = 1
grid.steps = 50
particles = 10000
seed = 7
checks = comparison
comparison.driver_shift = 1
comparison.tol_factor = 3
comparison.max_fraction = 0.01
)";

const char* const kApriori = R"(
name = apriori_ex_3_2
generator = ex_3_2
terminal = sin
grid.horizon = 0.1
grid.steps = 50
particles = 10000
seed = 11
checks = apriori
)";

const char* const kDecay43 = R"(
name = picard_decay_ex_4_3
generator = ex_4_3
dims.n = 2
dims.d = 1
terminal = abs
grid.steps = 50
particles = 10000
seed = 13
checks = picard_decay
partition.mode = eps
partition.T = 1
partition.C = 1
# L = 2 sqrt(n), K = 3
partition.L = 2.8284271247461903
partition.K = 3
partition.R2 = 1
partition.use_step_as_horizon = true
solver.picard_tol = 1e-4
picard_decay.max_iterations = 25
picard_decay.max_ratio = 0.9
)";

const char* const kDecay44 = R"(
name = picard_decay_ex_4_4
generator = ex_4_4
dims.n = 2
dims.d = 1
terminal = abs
grid.steps = 50
particles = 10000
seed = 13
checks = picard_decay
partition.mode = eps
partition.T = 1
partition.C = 1
# L = K = 3 sqrt(n)
partition.L = 4.2426406871192848
partition.K = 4.2426406871192848
partition.R2 = 1
partition.use_step_as_horizon = true
solver.picard_tol = 1e-4
picard_decay.max_iterations = 25
picard_decay.max_ratio = 0.9
)";

const char* const kAppendix45 = R"(
name = appendix_pure_z_lemma_4_5
generator = pure_z
terminal = identity
grid.horizon = 1
grid.steps = 50
particles = 10000
seed = 17
checks = appendix
appendix.lemma = lemma_4_5
appendix.lambda1 = 0
appendix.lambda2 = 1
appendix.p = 2
)";

const char* const kAppendixGuard = R"(
name = appendix_lemma_new_guard
generator = pure_z
terminal = identity
grid.horizon = 1
grid.steps = 20
particles = 2000
seed = 17
checks = appendix
appendix.lemma = lemma_new
appendix.lambda1 = 0
appendix.lambda2 = 1
appendix.p = 2
appendix.beta = 0.5
appendix.expect_skip = true
)";

std::string assumption_config(const std::string& generator, int n, int d,
                              bool expect_violation = false) {
    return "name = assumptions_" + generator + "_n" + std::to_string(n) + "_d" +
           std::to_string(d) + "\ngenerator = " + generator + "\ndims.n = " +
           std::to_string(n) + "\ndims.d = " + std::to_string(d) +
           "\nseed = 5\nchecks = assumptions\nassumptions.points = 10000\n" +
           (expect_violation ? "assumptions.expect_violation = true\n" : "");
}

}  // namespace

std::vector<std::string> suite_names() { return {"unit_math", "oracles", "theorems", "examples"}; }

std::vector<std::string> suite_configs(const std::string& name) {
    if (name == "unit_math") return {kUnitMath};
    if (name == "oracles") return {kOracleZero, kOraclePureZ, kOracleLinear};
    if (name == "theorems")
        return {kComparisonTerminal, kComparisonDriver, kApriori, kDecay43,
                kDecay44,            kAppendix45,       kAppendixGuard};
    if (name == "examples")
        return {assumption_config("ex_3_2", 1, 1),      assumption_config("ex_3_2", 1, 2),
                assumption_config("ex_3_3", 1, 1),      assumption_config("ex_3_3", 1, 3),
                assumption_config("ex_4_3", 2, 1),      assumption_config("ex_4_3", 3, 2),
                assumption_config("ex_4_4", 1, 1),      assumption_config("ex_4_4", 2, 1),
                assumption_config("ex_pre_4_11", 2, 1), assumption_config("ex_pre_4_11", 1, 2),
                assumption_config("broken_a2", 1, 1, true)};
    throw ConfigError("unknown suite '" + name + "' (expected unit_math, oracles, theorems or examples)");
}

}  // namespace mfbsde
