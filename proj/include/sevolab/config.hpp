#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "sevolab/io.hpp"
#include "sevolab/strict_solver.hpp"

namespace sevolab {

// Named closed-form functions used by config files and presets.
// Time forms:  constant:c | affine:c0,c1 | power:c,e | holder:c0,c1,e | cosine:c0,c1,w
// Space forms: zero | sine:k[,amp]
// Coefficient forms (sampled at (x,t), x-independent): constant:c | affine_t:c0,c1
std::function<double(double)> parse_time_form(const std::string& form);
std::function<double(double)> parse_space_form(const std::string& form);  // of x in (0,1)
SpaceTimeFn parse_coefficient_form(const std::string& form);

struct RunConfig {
    // [run]
    std::string kind = "solve";  // solve | ensemble | constants-scan | regularity | acceptance
    std::uint64_t seed = 1;
    int threads = 1;

    // [problem]
    std::string preset = "section4";  // section4 | section4-rough | scalar-ou | autonomous8
    double beta = 1.0, sigma = 0.3, delta = 0.7, delta1 = 0.9;
    double horizon = 1.0;
    std::string a_form = "affine_t:1,0.5", b_form = "affine_t:1,0.5";
    std::string f_form = "power:1,0", g_form = "holder:1,1,0.3";
    std::string phi1_form = "sine:1", phi2_form = "sine:1";
    std::string xi_form = "zero";
    int d = 1;

    // [grid]
    int n = 64;
    int steps = 512;
    int substeps_per_unit = 0;  // 0: one substep per step
    std::string scheme = "frozen-exponential";

    // [ensemble]
    int paths = 200;

    // [regularity]
    double p = 2.0;
    std::string quantity = "X";  // X | AX
    int lag_min_steps = 4;
    double window_lo = 0.0;  // structure-function time window (AX runs use T/10)

    // [output]
    std::string out_dir = "out";
    bool svg = true;

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_text(const std::string& text, const std::string& origin);

    // Build the problem this config describes (hypothesis-gated).
    ProblemSpec build_problem() const;
    std::shared_ptr<const OperatorFamily> build_family() const;
    SchemeKind scheme_kind() const;
    int effective_substeps() const;  // substeps_per_unit or steps/horizon
    json echo() const;               // canonical key=value echo for manifests
};

// Applies one preset's defaults before file keys override them.
void apply_preset(RunConfig& cfg, const std::string& preset);

}  // namespace sevolab
