#pragma once

// Flat "key = value" experiment files with dotted sections. Unknown and
// duplicate keys are rejected.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mfbsde/analysis.hpp"
#include "mfbsde/checks.hpp"
#include "mfbsde/generators.hpp"
#include "mfbsde/solver.hpp"

namespace mfbsde {

class Config {
public:
    static Config parse(const std::string& text, const std::string& source);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    double require_double(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;

    /// Throws ConfigError naming the first key outside `allowed`.
    void reject_unknown(const std::set<std::string>& allowed) const;

    /// Keys and raw values in key order.
    const std::map<std::string, std::pair<std::string, int>>& entries() const {
        return entries_;
    }
    const std::string& source() const { return source_; }

private:
    std::string where(const std::string& key) const;
    std::map<std::string, std::pair<std::string, int>> entries_;  // value, line
    std::string source_;
};

enum class CheckKind {
    martingale,
    oracle,
    apriori,
    comparison,
    picard_decay,
    appendix,
    assumptions,
    math,
    transport
};

CheckKind parse_check(const std::string& name);
std::string to_string(CheckKind kind);

struct ExperimentConfig {
    std::string name;
    std::string generator = "zero";
    ExampleOptions generator_options;
    Dims dims;
    std::string terminal = "identity";
    double terminal_value = 0.0;
    double horizon = 1.0;
    std::size_t steps = 50;
    std::size_t particles = 10000;
    std::uint64_t seed = 1;
    SolverConfig solver;
    std::optional<analysis::PartitionMode> partition_mode;
    std::map<std::string, double> partition_constants;
    bool horizon_from_partition = false;
    std::vector<CheckKind> checks;

    double oracle_tol = 0.05;
    int oracle_max_iterations = 15;
    double comparison_terminal_shift = 0.0;
    double comparison_driver_shift = 0.0;
    double comparison_tol_factor = 3.0;
    double comparison_max_fraction = 0.01;
    double decay_max_ratio = 0.9;
    int decay_max_iterations = 25;
    std::string appendix_lemma = "lemma_4_5";
    double appendix_lambda1 = 0.0, appendix_lambda2 = 0.0, appendix_p = 2.0,
           appendix_beta = 0.0, appendix_c_main = 1.0, appendix_c_p = 1.0;
    bool appendix_expect_skip = false;
    std::vector<std::string> assumption_list;  // empty: the generator's declared set
    std::size_t assumption_points = 10000;
    bool assumption_expect_violation = false;
    std::optional<double> apriori_h;
};

ExperimentConfig parse_experiment(const Config& cfg);

/// Terminal condition named in a config (identity, abs, constant, sin).
TerminalCondition make_terminal(const std::string& kind, std::size_t n, double value);

}  // namespace mfbsde
