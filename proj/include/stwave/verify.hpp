#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stwave/config.hpp"

// Seeded property suites shared by the verify subcommand and the acceptance
// binary. Each check compares one measured value against a limit.
namespace stwave::verify {

struct Check {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool pass = false;
};

struct SuiteResult {
    std::string suite;
    std::vector<Check> checks;
    double seconds = 0.0;
    // Wall times of named stages, kept apart from the checks so that the
    // checks are reproducible.
    std::map<std::string, double> timings;
    bool pass() const;
    // Records value <= limit (or >= when `at_least`).
    void check(const std::string& name, double value, double limit, bool at_least = false);
    void flag(const std::string& name, bool ok);
};

struct Options {
    PhysicalConfig config = reference_config();
    std::uint64_t seed = 1;
    int threads = 1;
    // Adds the three-dimensional N = 64^2 wave run to the wave checks.
    bool three_d = false;
};

// geometry, divtools, symbols, compat, linear, wave.
const std::vector<std::string>& suite_names();
// Runs one named suite; "all" is handled by the caller. Throws InputError for
// unknown names.
std::vector<SuiteResult> run_suite(const std::string& name, const Options& options);

SuiteResult geometry(const Options& options);
SuiteResult symbol_asymptotics(const Options& options);
SuiteResult adjoint_identity(const Options& options);
SuiteResult energy_equivalence(const Options& options);
SuiteResult divergence_toolbox(const Options& options);
SuiteResult compatibility(const Options& options);
SuiteResult round_trip(const Options& options);
SuiteResult small_waves(const Options& options);
SuiteResult eulerian_validity(const Options& options);

}  // namespace stwave::verify
