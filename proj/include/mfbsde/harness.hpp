#pragma once

// Experiment runner: executes the checks named in a config, collects report
// rows, and writes the CSV report and run manifest.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mfbsde/config.hpp"

namespace mfbsde {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kCsvSchema = "report-v1";
inline constexpr const char* kCsvHeader =
    "experiment,check,metric,value,threshold,pass,seed,wall_time_ms";

struct ReportRow {
    std::string experiment;
    std::string check;
    std::string metric;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    double wall_time_ms = 0.0;
};

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> particles;
    std::optional<std::size_t> steps;
    std::string out_dir;   // no files written when empty
    bool record_timing = false;
};

enum ExitCode { exit_ok = 0, exit_check_failed = 1, exit_parse_error = 2, exit_divergence = 3 };

struct ExperimentResult {
    std::string name;
    std::vector<ReportRow> rows;
    bool diverged = false;
    std::string forensic;
    double wall_time_ms = 0.0;
};

/// Runs every check of one experiment. Divergence outside the a-priori
/// check stops the experiment and is recorded in the result.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

std::string format_row(const ReportRow& row);
std::string format_csv(const std::vector<ExperimentResult>& results);

/// Config texts bundled for a suite: unit_math, oracles, theorems, examples.
std::vector<std::string> suite_configs(const std::string& name);
std::vector<std::string> suite_names();

/// Parses, runs and reports a list of config texts. Returns an ExitCode and
/// writes report.csv and manifest.txt into opts.out_dir when it is set.
int run_configs(const std::vector<std::pair<std::string, std::string>>& sources,
                const RunOptions& opts, std::ostream& log);

int run_config_file(const std::string& path, const RunOptions& opts, std::ostream& log);
int run_suite(const std::string& name, const RunOptions& opts, std::ostream& log);

}  // namespace mfbsde
