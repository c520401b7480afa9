#pragma once

// Property suites shared by the `verify` command and the acceptance binary.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lergo::verify {

inline constexpr std::uint64_t kDefaultSeed = 20250101;

struct SuiteResult {
    std::string name;
    bool pass = false;
    double max_deviation = 0.0; // headline metric, compared against tolerance
    double tolerance = 0.0;
    std::vector<std::string> notes; // secondary checks, one line each
};

struct OracleOptions {
    std::uint64_t seed = kDefaultSeed;
    int samples = 200;
    std::optional<int> L; // fixed ring size instead of drawing from 5..10
};

/// Closed-form LE against the brute-force SU(2) search on random states.
SuiteResult oracle_equivalence(const OracleOptions& opt);
/// Analytic M against explicit partial traces, both coupling laws.
SuiteResult m_matrix_equivalence(const OracleOptions& opt);
SuiteResult shape_thresholds();
SuiteResult superposition_endpoint();
SuiteResult optimal_transformations();
SuiteResult bell_profile();
SuiteResult chiral_flow();
SuiteResult long_range_spectrum();
SuiteResult invariants(std::uint64_t seed);

std::vector<SuiteResult> run_all(const OracleOptions& opt);

} // namespace lergo::verify
