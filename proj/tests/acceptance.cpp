// One pass/fail line per acceptance criterion.

#include "lergo/verify.hpp"

#include <cstdio>
#include <functional>
#include <utility>
#include <vector>

using namespace lergo::verify;

int main()
{
    const OracleOptions opt;
    const std::vector<std::pair<int, std::function<SuiteResult()>>> criteria{
        {1, [&] { return oracle_equivalence(opt); }},
        {2, [&] { return m_matrix_equivalence(opt); }},
        {3, shape_thresholds},
        {4, superposition_endpoint},
        {5, optimal_transformations},
        {6, bell_profile},
        {7, chiral_flow},
        {8, long_range_spectrum},
        {9, [&] { return invariants(opt.seed); }},
    };

    int failed = 0;
    for (const auto& [id, run] : criteria) {
        const SuiteResult r = run();
        std::printf("criterion %d %-24s %s  max_dev=%.3e tol=%.0e\n", id, r.name.c_str(), r.pass ? "PASS" : "FAIL",
                    r.max_deviation, r.tolerance);
        for (const auto& n : r.notes)
            std::printf("    %s\n", n.c_str());
        std::fflush(stdout);
        failed += r.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
