#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mfbsde/config.hpp"
#include "mfbsde/errors.hpp"
#include "mfbsde/harness.hpp"

using namespace mfbsde;

namespace {
std::string error_of(const std::string& text) {
    try {
        parse_experiment(Config::parse(text, "t.cfg"));
    } catch (const ConfigError& err) {
        return err.what();
    }
    return "";
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mfbsde_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}
}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = Config::parse("# comment\nname = a  # trailing\n\nlist = x, y ,z\nn = 3\n", "f");
    CHECK(cfg.get_string("name", "") == "a");
    CHECK(cfg.get_list("list") == std::vector<std::string>{"x", "y", "z"});
    CHECK(cfg.get_int("n", 0) == 3);
    CHECK(cfg.get_double("missing", 1.5) == 1.5);
    CHECK_THROWS_AS(cfg.get_double("name", 0.0), ConfigError);
    CHECK_THROWS_AS(cfg.require_string("nope"), ConfigError);
    CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n", "f"), ConfigError);
    CHECK_THROWS_AS(Config::parse("just words\n", "f"), ConfigError);
    CHECK_THROWS_AS(Config::parse(" = 3\n", "f"), ConfigError);
}

TEST_CASE("experiment validation names the offending key") {
    CHECK(error_of("name = x\ngenerator = ex_9_9\nchecks = oracle\n").find("'generator'") !=
          std::string::npos);
    CHECK(error_of("name = x\nchecks = oracle\nbogus = 1\n").find("t.cfg:3") != std::string::npos);
    CHECK(error_of("checks = oracle\n").find("'name'") != std::string::npos);
    CHECK(error_of("name = x\nchecks = nothing\n").find("'checks'") != std::string::npos);
    CHECK(error_of("name = x\nchecks = oracle\nparticles = 1\n").find("'particles'") !=
          std::string::npos);
    CHECK(error_of("name = x\nchecks = oracle\ngrid.steps = 0\n").find("'grid.steps'") !=
          std::string::npos);
    CHECK(error_of("name = x\nchecks = oracle\nsolver.damping = 2\n").find("damping") !=
          std::string::npos);
    CHECK(error_of("name = x\nchecks = oracle\npartition.mode = eps\npartition.K = 1\n")
              .find("'L'") != std::string::npos);
    CHECK(error_of("name = x\nchecks = oracle\nterminal = cube\n").find("'terminal'") !=
          std::string::npos);
    CHECK(error_of("name = x\nchecks = assumptions\nassumptions.list = A2, Q1\n")
              .find("'assumptions.list'") != std::string::npos);
    CHECK(error_of("name = x\nchecks = oracle\n").empty());
}

TEST_CASE("parsed experiment fields") {
    const auto e = parse_experiment(Config::parse(
        "name = x\ngenerator = ex_4_3\ndims.n = 2\nchecks = picard_decay, oracle\n"
        "partition.mode = eps\npartition.L = 2\npartition.K = 3\npartition.R2 = 1\n"
        "solver.scheme = live_z\n",
        "f"));
    CHECK(e.dims.n == 2);
    CHECK(e.checks.size() == 2);
    CHECK(e.solver.scheme == Scheme::live_z);
    REQUIRE(e.solver.partition);
    CHECK(e.solver.partition->horizon == 1.0);
}

TEST_CASE("report formatting") {
    ReportRow r{"e", "c", "m", 0.1, 1.0, true, 3, 0.0};
    CHECK(format_row(r) == "e,c,m,0.10000000000000001,1,true,3,0");
    CHECK(format_csv({}).rfind(kCsvHeader, 0) == 0);
}

TEST_CASE("run writes report and manifest, exit codes follow the contract") {
    const auto dir = scratch_dir("run");
    RunOptions opts;
    opts.out_dir = dir.string();
    std::ostringstream log;
    const std::string ok = "name = z\ngenerator = zero\nparticles = 2000\ngrid.steps = 10\n"
                           "checks = martingale\n";
    CHECK(run_configs({{"ok", ok}}, opts, log) == exit_ok);
    std::ifstream csv(dir / "report.csv");
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(header == kCsvHeader);
    CHECK(row.rfind("z,martingale,max_mean_drift,", 0) == 0);
    CHECK(std::filesystem::exists(dir / "manifest.txt"));

    CHECK(run_configs({{"bad", "name = z\ngenerator = ex_9_9\nchecks = oracle\n"}}, opts, log) ==
          exit_parse_error);
    CHECK(log.str().find("generator") != std::string::npos);

    const std::string failing = "name = f\ngenerator = zero\nparticles = 500\ngrid.steps = 5\n"
                                "checks = oracle\noracle.tol = 1e-9\n";
    CHECK(run_configs({{"f", failing}}, opts, log) == exit_check_failed);

    const std::string blow = "name = b\ngenerator = ex_3_2\ngrid.horizon = 5\ngrid.steps = 10\n"
                             "particles = 500\nchecks = oracle, martingale, comparison\n";
    // oracle has no closed form for ex_3_2: a configuration problem.
    CHECK(run_configs({{"b", blow}}, opts, log) == exit_parse_error);
    const std::string diverge = "name = b\ngenerator = ex_3_2\ngrid.horizon = 5\n"
                                "grid.steps = 10\nparticles = 500\nchecks = comparison\n";
    CHECK(run_configs({{"b", diverge}}, opts, log) == exit_divergence);
    CHECK(std::filesystem::exists(dir / "b.divergence.txt"));
    CHECK(run_config_file((dir / "missing.cfg").string(), opts, log) == exit_parse_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("overrides and byte-identical reruns") {
    RunOptions opts;
    opts.particles = 800;
    opts.steps = 8;
    opts.seed = 99;
    const auto e = parse_experiment(Config::parse(
        "name = z\ngenerator = pure_z\nchecks = oracle\noracle.tol = 1\n", "f"));
    auto cfg = e;
    cfg.particles = 800;
    cfg.steps = 8;
    cfg.seed = 99;
    const auto a = run_experiment(cfg, opts);
    const auto b = run_experiment(cfg, opts);
    CHECK(format_csv({a}) == format_csv({b}));
    CHECK(a.rows.front().seed == 99);
    CHECK(a.rows.front().wall_time_ms == 0.0);
}

TEST_CASE("suites") {
    CHECK(suite_configs("theorems").size() >= 6);
    CHECK_THROWS_AS(suite_configs("nope"), ConfigError);
    for (const auto& name : suite_names())
        for (const auto& text : suite_configs(name))
            CHECK_NOTHROW(parse_experiment(Config::parse(text, name)));
    std::ostringstream log;
    CHECK(run_suite("unit_math", RunOptions{}, log) == exit_ok);
}
