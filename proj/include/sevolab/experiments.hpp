#pragma once

#include "sevolab/config.hpp"
#include "sevolab/io.hpp"

namespace sevolab {

struct RunArtifacts {
    // Relative path -> exact file bytes. The manifest is added on emit.
    std::map<std::string, std::string> files;
    json report;          // run-level JSON also stored as report.json
    std::string summary;  // human-readable lines printed by the CLI
    int acceptance_failures = 0;  // only the acceptance kind sets this
};

RunArtifacts run_experiment(const RunConfig& cfg);

// Writes every artifact atomically, then a manifest.json with sha256 hashes
// (an existing manifest is archived as manifest.<k>.json first).
void emit_outputs(const RunArtifacts& artifacts, const std::filesystem::path& out_dir);

}  // namespace sevolab
