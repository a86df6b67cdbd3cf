#include "mfbsde/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "mfbsde/errors.hpp"

namespace mfbsde {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& source) {
    Config cfg;
    cfg.source_ = source;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line) + ": expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw ConfigError(source + ":" + std::to_string(line) + ": empty key");
        if (cfg.entries_.count(key))
            throw ConfigError(source + ":" + std::to_string(line) + ": duplicate key '" + key +
                              "'");
        cfg.entries_[key] = {value, line};
    }
    return cfg;
}

std::string Config::where(const std::string& key) const {
    const auto it = entries_.find(key);
    return source_ + ":" + (it == entries_.end() ? "?" : std::to_string(it->second.second));
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second.first;
}

std::string Config::require_string(const std::string& key) const {
    if (!has(key)) throw ConfigError(source_ + ": missing required key '" + key + "'");
    return get_string(key, "");
}

double Config::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = entries_.at(key).first;
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(where(key) + ": key '" + key + "' expects a number, got '" + v + "'");
    return out;
}

double Config::require_double(const std::string& key) const {
    if (!has(key)) throw ConfigError(source_ + ": missing required key '" + key + "'");
    return get_double(key, 0.0);
}

long Config::get_int(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = entries_.at(key).first;
    long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError(where(key) + ": key '" + key + "' expects an integer, got '" + v +
                          "'");
    return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = entries_.at(key).first;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(where(key) + ": key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::istringstream in(get_string(key, ""));
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void Config::reject_unknown(const std::set<std::string>& allowed) const {
    for (const auto& [key, entry] : entries_)
        if (!allowed.count(key))
            throw ConfigError(source_ + ":" + std::to_string(entry.second) + ": unknown key '" +
                              key + "'");
}

CheckKind parse_check(const std::string& name) {
    static const std::pair<const char*, CheckKind> table[] = {
        {"martingale", CheckKind::martingale},     {"oracle", CheckKind::oracle},
        {"apriori", CheckKind::apriori},           {"comparison", CheckKind::comparison},
        {"picard_decay", CheckKind::picard_decay}, {"appendix", CheckKind::appendix},
        {"assumptions", CheckKind::assumptions},   {"math", CheckKind::math},
        {"transport", CheckKind::transport},
    };
    for (const auto& [key, kind] : table)
        if (name == key) return kind;
    throw ConfigError("unknown check '" + name + "'");
}

std::string to_string(CheckKind kind) {
    switch (kind) {
        case CheckKind::martingale: return "martingale";
        case CheckKind::oracle: return "oracle";
        case CheckKind::apriori: return "apriori";
        case CheckKind::comparison: return "comparison";
        case CheckKind::picard_decay: return "picard_decay";
        case CheckKind::appendix: return "appendix";
        case CheckKind::assumptions: return "assumptions";
        case CheckKind::math: return "math";
        case CheckKind::transport: return "transport";
    }
    return "unknown";
}

TerminalCondition make_terminal(const std::string& kind, std::size_t n, double value) {
    if (kind == "identity") return TerminalCondition::identity(n);
    if (kind == "abs") return TerminalCondition::abs_state(n);
    if (kind == "constant") return TerminalCondition::constant_value(n, value);
    if (kind == "sin") {
        TerminalCondition xi = TerminalCondition::identity(n);
        xi.g = [](std::span<const double> w, std::span<double> out) {
            for (double& v : out) v = std::sin(w[0]);
        };
        return xi;
    }
    throw ConfigError("unknown terminal '" + kind + "'");
}

ExperimentConfig parse_experiment(const Config& cfg) {
    static const std::set<std::string> allowed = {
        "name", "generator", "generator.a", "generator.b", "dims.n", "dims.d", "terminal",
        "terminal.value", "grid.horizon", "grid.steps", "particles", "seed",
        "solver.basis_degree", "solver.inner_iterations", "solver.picard_tol",
        "solver.picard_max", "solver.damping", "solver.scheme", "solver.ridge",
        "partition.mode", "partition.T", "partition.L", "partition.K", "partition.R2",
        "partition.C", "partition.R_varsigma", "partition.r", "partition.C_r", "partition.r0",
        "partition.C_r0_A_L", "partition.C_tilde_r0", "partition.use_step_as_horizon",
        "partition.solve", "checks", "oracle.tol", "oracle.max_iterations",
        "comparison.terminal_shift", "comparison.driver_shift", "comparison.tol_factor",
        "comparison.max_fraction", "picard_decay.max_ratio", "picard_decay.max_iterations",
        "appendix.lemma", "appendix.lambda1", "appendix.lambda2", "appendix.p",
        "appendix.beta", "appendix.c_main", "appendix.c_p", "appendix.expect_skip", "assumptions.list",
        "assumptions.points", "assumptions.expect_violation", "apriori.h"};
    cfg.reject_unknown(allowed);

    ExperimentConfig e;
    e.name = cfg.require_string("name");
    e.generator = cfg.get_string("generator", "zero");
    // Validate the generator name up front so the error names the key.
    try {
        parse_example(e.generator);
    } catch (const ConfigError&) {
        throw ConfigError(cfg.source() + ": key 'generator': unknown generator '" +
                          e.generator + "'");
    }
    e.generator_options.a = cfg.get_double("generator.a", e.generator_options.a);
    e.generator_options.b = cfg.get_double("generator.b", e.generator_options.b);
    const long n = cfg.get_int("dims.n", 1), d = cfg.get_int("dims.d", 1);
    if (n < 1 || d < 1) throw ConfigError(cfg.source() + ": key 'dims.n'/'dims.d' must be >= 1");
    e.dims = {static_cast<std::size_t>(n), static_cast<std::size_t>(d)};
    e.terminal = cfg.get_string("terminal", "identity");
    try {
        make_terminal(e.terminal, e.dims.n, 0.0);
    } catch (const ConfigError&) {
        throw ConfigError(cfg.source() + ": key 'terminal': unknown terminal '" + e.terminal +
                          "'");
    }
    e.terminal_value = cfg.get_double("terminal.value", 0.0);
    e.horizon = cfg.get_double("grid.horizon", 1.0);
    const long steps = cfg.get_int("grid.steps", 50);
    const long particles = cfg.get_int("particles", 10000);
    if (!(e.horizon > 0.0)) throw ConfigError(cfg.source() + ": key 'grid.horizon' must be > 0");
    if (steps < 1) throw ConfigError(cfg.source() + ": key 'grid.steps' must be >= 1");
    if (particles < 2) throw ConfigError(cfg.source() + ": key 'particles' must be >= 2");
    e.steps = static_cast<std::size_t>(steps);
    e.particles = static_cast<std::size_t>(particles);
    const long seed = cfg.get_int("seed", 1);
    if (seed < 0) throw ConfigError(cfg.source() + ": key 'seed' must be >= 0");
    e.seed = static_cast<std::uint64_t>(seed);

    auto& s = e.solver;
    s.basis_degree = static_cast<int>(cfg.get_int("solver.basis_degree", s.basis_degree));
    s.inner_iterations =
        static_cast<int>(cfg.get_int("solver.inner_iterations", s.inner_iterations));
    s.picard_tol = cfg.get_double("solver.picard_tol", s.picard_tol);
    s.picard_max = static_cast<int>(cfg.get_int("solver.picard_max", s.picard_max));
    s.damping = cfg.get_double("solver.damping", s.damping);
    s.ridge = cfg.get_double("solver.ridge", s.ridge);
    const std::string scheme = cfg.get_string("solver.scheme", "automatic");
    if (scheme == "automatic")
        s.scheme = Scheme::automatic;
    else if (scheme == "frozen_z")
        s.scheme = Scheme::frozen_z;
    else if (scheme == "live_z")
        s.scheme = Scheme::live_z;
    else
        throw ConfigError(cfg.source() + ": key 'solver.scheme': unknown scheme '" + scheme + "'");
    try {
        s.validate();
    } catch (const ConfigError& err) {
        throw ConfigError(cfg.source() + ": " + err.what());
    }

    if (cfg.has("partition.mode")) {
        try {
            e.partition_mode = analysis::parse_partition_mode(cfg.get_string("partition.mode", ""));
        } catch (const ConfigError&) {
            throw ConfigError(cfg.source() + ": key 'partition.mode': unknown mode '" +
                              cfg.get_string("partition.mode", "") + "'");
        }
        for (const auto& [key, entry] : cfg.entries()) {
            if (key.rfind("partition.", 0) != 0 || key == "partition.mode" ||
                key == "partition.use_step_as_horizon" || key == "partition.solve")
                continue;
            e.partition_constants[key.substr(10)] = cfg.get_double(key, 0.0);
        }
        if (!e.partition_constants.count("T")) e.partition_constants["T"] = e.horizon;
        e.horizon_from_partition = cfg.get_bool("partition.use_step_as_horizon", false);
        // Validate the constants now so a missing one is a parse error.
        try {
            analysis::partition_plan(*e.partition_mode, e.partition_constants);
        } catch (const ConfigError& err) {
            throw ConfigError(cfg.source() + ": " + err.what());
        }
        if (cfg.get_bool("partition.solve", !e.horizon_from_partition))
            e.solver.partition = analysis::partition_plan(*e.partition_mode, e.partition_constants);
    }

    for (const auto& c : cfg.get_list("checks")) {
        try {
            e.checks.push_back(parse_check(c));
        } catch (const ConfigError&) {
            throw ConfigError(cfg.source() + ": key 'checks': unknown check '" + c + "'");
        }
    }
    if (e.checks.empty()) throw ConfigError(cfg.source() + ": key 'checks' lists no checks");

    e.oracle_tol = cfg.get_double("oracle.tol", e.oracle_tol);
    e.oracle_max_iterations =
        static_cast<int>(cfg.get_int("oracle.max_iterations", e.oracle_max_iterations));
    e.comparison_terminal_shift = cfg.get_double("comparison.terminal_shift", 0.0);
    e.comparison_driver_shift = cfg.get_double("comparison.driver_shift", 0.0);
    e.comparison_tol_factor = cfg.get_double("comparison.tol_factor", e.comparison_tol_factor);
    e.comparison_max_fraction =
        cfg.get_double("comparison.max_fraction", e.comparison_max_fraction);
    e.decay_max_ratio = cfg.get_double("picard_decay.max_ratio", e.decay_max_ratio);
    e.decay_max_iterations =
        static_cast<int>(cfg.get_int("picard_decay.max_iterations", e.decay_max_iterations));
    e.appendix_lemma = cfg.get_string("appendix.lemma", e.appendix_lemma);
    try {
        parse_appendix_lemma(e.appendix_lemma);
    } catch (const ConfigError&) {
        throw ConfigError(cfg.source() + ": key 'appendix.lemma': unknown estimate '" +
                          e.appendix_lemma + "'");
    }
    e.appendix_lambda1 = cfg.get_double("appendix.lambda1", 0.0);
    e.appendix_lambda2 = cfg.get_double("appendix.lambda2", 0.0);
    e.appendix_p = cfg.get_double("appendix.p", 2.0);
    e.appendix_beta = cfg.get_double("appendix.beta", 0.0);
    e.appendix_c_main = cfg.get_double("appendix.c_main", 1.0);
    e.appendix_c_p = cfg.get_double("appendix.c_p", 1.0);
    e.appendix_expect_skip = cfg.get_bool("appendix.expect_skip", false);
    e.assumption_list = cfg.get_list("assumptions.list");
    for (const auto& a : e.assumption_list) {
        try {
            parse_assumption(a);
        } catch (const ConfigError&) {
            throw ConfigError(cfg.source() + ": key 'assumptions.list': unknown assumption '" +
                              a + "'");
        }
    }
    const long pts = cfg.get_int("assumptions.points", 10000);
    if (pts < 1) throw ConfigError(cfg.source() + ": key 'assumptions.points' must be >= 1");
    e.assumption_points = static_cast<std::size_t>(pts);
    e.assumption_expect_violation = cfg.get_bool("assumptions.expect_violation", false);
    if (cfg.has("apriori.h")) e.apriori_h = cfg.get_double("apriori.h", 0.0);
    return e;
}

}  // namespace mfbsde
