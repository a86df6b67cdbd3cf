// Command-line front end: run one experiment config or a bundled suite.

#include <cstdint>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "mfbsde/harness.hpp"
#include "mfbsde/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Mean-field BSDE solver and check harness"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::size_t particles = 0, steps = 0;
    unsigned threads = 0;
    mfbsde::RunOptions opts;
    opts.out_dir = "mfbsde_out";
    auto* seed_opt = app.add_option("--seed", seed, "Override the seed of every experiment");
    auto* particles_opt =
        app.add_option("--particles", particles, "Override the particle count")->check(CLI::Range(2ul, 100000000ul));
    auto* steps_opt =
        app.add_option("--steps", steps, "Override the number of time steps")->check(CLI::PositiveNumber);
    app.add_option("--out", opts.out_dir, "Directory for report.csv and manifest.txt");
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    app.add_flag("--record-timing", opts.record_timing,
                 "Fill wall_time_ms (makes reports run-dependent)");

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run the checks named in a config file");
    run->add_option("config", config_path, "Config file")->required();
    run->fallthrough();

    std::string suite_name;
    auto* suite = app.add_subcommand("suite", "Run a bundled acceptance suite");
    suite->add_option("name", suite_name, "unit_math, oracles, theorems or examples")
        ->required()
        ->check(CLI::IsMember(mfbsde::suite_names()));
    suite->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : mfbsde::exit_parse_error;
    }

    if (*seed_opt) opts.seed = seed;
    if (*particles_opt) opts.particles = particles;
    if (*steps_opt) opts.steps = steps;
    mfbsde::set_thread_count(threads == 0 ? static_cast<int>(std::thread::hardware_concurrency())
                                          : static_cast<int>(threads));

    try {
        if (*run) return mfbsde::run_config_file(config_path, opts, std::cerr);
        return mfbsde::run_suite(suite_name, opts, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mfbsde::exit_check_failed;
    }
}
