#pragma once

#include <filesystem>

#include "sevolab/io.hpp"

namespace sevolab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;  // measured value vs threshold
};

struct AcceptanceOptions {
    std::uint64_t seed = 2026;
    int threads = 1;
    std::filesystem::path scratch;  // used by the determinism criterion
};

// The full structural checklist; one result per criterion, in order.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

json acceptance_json(const std::vector<CriterionResult>& results);

}  // namespace sevolab
