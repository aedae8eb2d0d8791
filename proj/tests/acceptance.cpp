// Acceptance criteria 1-8: one PASS/FAIL line per criterion, followed by the
// individual checks. Exit status 1 when any criterion fails.
#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "stwave/verify.hpp"

using namespace stwave;

int main() {
    struct Criterion {
        int id;
        const char* title;
        double budget;  // seconds
        std::function<verify::SuiteResult(const verify::Options&)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "symbol asymptotics", 60, verify::symbol_asymptotics},
        {2, "adjoint identity", 30, verify::adjoint_identity},
        {3, "energy equivalence", 60, verify::energy_equivalence},
        {4, "divergence toolbox", 20, verify::divergence_toolbox},
        {5, "compatibility and left-kernel equivalence", 60, verify::compatibility},
        {6, "linear isomorphism round trip", 120, verify::round_trip},
        {7, "nonlinear small-data waves", 1500, verify::small_waves},
        {8, "Eulerian validity", 60, verify::eulerian_validity},
    };
    // Per-stage wall-time budgets within a criterion.
    const std::map<int, std::map<std::string, double>> stage_budgets{{7, {{"n=2", 300.0}, {"n=3 N=64^2", 1200.0}}}};
    verify::Options options;
    options.three_d = true;
    int failed = 0;
    for (const Criterion& c : criteria) {
        verify::SuiteResult r = c.run(options);
        r.check("wall seconds", r.seconds, c.budget);
        if (stage_budgets.count(c.id))
            for (const auto& [stage, budget] : stage_budgets.at(c.id)) {
                auto it = r.timings.find(stage);
                r.check(stage + " wall seconds", it == r.timings.end() ? INFINITY : it->second, budget);
            }
        const bool ok = r.pass();
        failed += !ok;
        fmt::print("CRITERION {} {}: {} ({:.1f} s)\n", c.id, ok ? "PASS" : "FAIL", c.title, r.seconds);
        for (const verify::Check& k : r.checks)
            fmt::print("    [{}] {}: {:.3e} (limit {:.3e})\n", k.pass ? "ok" : "FAIL", k.name, k.value, k.limit);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
