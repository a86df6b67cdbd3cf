// Runs the bundled suites and prints one PASS/FAIL line per acceptance
// criterion. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mfbsde/config.hpp"
#include "mfbsde/harness.hpp"
#include "mfbsde/parallel.hpp"

using namespace mfbsde;

namespace {

struct SuiteRun {
    std::vector<ExperimentResult> results;
    double seconds = 0.0;
};

SuiteRun run(const std::string& suite, int threads) {
    set_thread_count(threads);
    SuiteRun out;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& text : suite_configs(suite))
        out.results.push_back(run_experiment(parse_experiment(Config::parse(text, suite)), {}));
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

using RowFilter = std::function<bool(const ReportRow&)>;

// All matching rows pass and at least one matched.
bool rows_pass(const SuiteRun& s, const RowFilter& keep, std::string& detail) {
    std::size_t seen = 0;
    bool ok = true;
    for (const auto& res : s.results) {
        for (const auto& row : res.rows) {
            if (!keep(row)) continue;
            ++seen;
            if (!row.pass) {
                ok = false;
                detail += " " + row.experiment + "/" + row.metric + "=" + std::to_string(row.value);
            }
        }
    }
    if (seen == 0) detail += " no rows";
    return ok && seen > 0;
}

RowFilter by_check(const std::string& check) {
    return [check](const ReportRow& r) { return r.check == check; };
}

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id, title.c_str(),
                detail.empty() ? "" : " |", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %.2fs", s);
    return buf;
}

}  // namespace

int main() {
    {
        std::string d1, d2;
        set_thread_count(1);
        ExperimentConfig math = parse_experiment(Config::parse(suite_configs("unit_math")[0], "unit_math"));
        math.checks = {CheckKind::math};
        auto start = std::chrono::steady_clock::now();
        SuiteRun m{{run_experiment(math, {})}, 0.0};
        m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool ok = rows_pass(m, by_check("math"), d1) && m.seconds < 5.0;
        report(1, "math unit suite", ok, d1 + seconds(m.seconds));

        ExperimentConfig transport = math;
        transport.checks = {CheckKind::transport};
        start = std::chrono::steady_clock::now();
        SuiteRun t{{run_experiment(transport, {})}, 0.0};
        t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        ok = rows_pass(t, by_check("transport"), d2) && t.seconds < 10.0;
        report(2, "transport suite", ok, d2 + seconds(t.seconds));
    }
    {
        std::string d;
        const auto o = run("oracles", 1);
        const bool ok = rows_pass(o, [](const ReportRow&) { return true; }, d) && o.seconds < 60.0;
        report(3, "oracle benchmarks", ok, d + seconds(o.seconds));
    }

    const auto th1 = run("theorems", 1);
    {
        std::string d;
        report(4, "comparison on ex_3_3", rows_pass(th1, by_check("comparison"), d), d);
    }
    {
        std::string d;
        report(5, "a-priori mean bound on ex_3_2", rows_pass(th1, by_check("apriori"), d), d);
    }
    {
        std::string d;
        report(6, "Picard contraction on ex_4_3 and ex_4_4", rows_pass(th1, by_check("picard_decay"), d), d);
    }
    {
        std::string d;
        const auto ex = run("examples", 1);
        report(7, "assumption samplers", rows_pass(ex, by_check("assumptions"), d), d + seconds(ex.seconds));
    }
    {
        std::string d;
        report(8, "appendix estimates", rows_pass(th1, by_check("appendix"), d), d);
    }
    {
        const auto th2 = run("theorems", 2);
        const auto th1b = run("theorems", 1);
        const std::string a = format_csv(th1.results), b = format_csv(th2.results),
                          c = format_csv(th1b.results);
        report(9, "determinism of suite theorems across runs and thread counts", a == b && a == c,
               a == b ? (a == c ? "" : " rerun differs") : " threads 1 vs 2 differ");
    }
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
