#include <cstdio>

#include "sevolab/acceptance.hpp"

// Prints one pass/fail line per structural criterion; exit 0 iff all pass.
int main() {
    sevolab::AcceptanceOptions opts;
    opts.scratch = std::filesystem::temp_directory_path() / "sevolab-acceptance-scratch";
    const auto results = sevolab::run_acceptance(opts);
    int failures = 0;
    for (const auto& r : results) {
        std::printf("%s %2d %-24s %s\n", r.passed ? "pass" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str());
        std::fflush(stdout);
        if (!r.passed) ++failures;
    }
    std::printf("%zu/%zu criteria passed\n", results.size() - failures, results.size());
    return failures == 0 ? 0 : 1;
}
