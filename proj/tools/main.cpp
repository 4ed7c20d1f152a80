#include <CLI11.hpp>
#include <iostream>

#include "sevolab/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"sevolab: strict solutions of stochastic parabolic equations at desk scale"};
    std::string config_path, kind, out_dir;
    std::uint64_t seed = 0;
    int paths = 0, threads = 0;
    app.add_option("--config", config_path, "Run description (INI-style, see configs/)")
        ->check(CLI::ExistingFile);
    auto* kind_opt = app.add_option(
        "--kind", kind, "solve | ensemble | constants-scan | regularity | acceptance");
    auto* out_opt = app.add_option("--out", out_dir, "Output directory");
    auto* seed_opt = app.add_option("--seed", seed, "Seed override");
    auto* paths_opt = app.add_option("--paths", paths, "Ensemble size override");
    auto* threads_opt = app.add_option("--threads", threads, "Worker count override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        sevolab::RunConfig cfg;
        if (!config_path.empty()) cfg = sevolab::RunConfig::from_file(config_path);
        if (kind_opt->count()) cfg.kind = kind;
        if (seed_opt->count()) cfg.seed = seed;
        if (paths_opt->count()) {
            sevolab::require(paths >= 1, "--paths must be >= 1");
            cfg.paths = paths;
        }
        if (threads_opt->count()) {
            sevolab::require(threads >= 1, "--threads must be >= 1");
            cfg.threads = threads;
        }
        if (out_opt->count()) cfg.out_dir = out_dir;

        const auto artifacts = sevolab::run_experiment(cfg);
        sevolab::emit_outputs(artifacts, cfg.out_dir);
        std::cout << artifacts.summary;
        std::cout << "artifacts written to " << cfg.out_dir << std::endl;
        if (cfg.kind == "acceptance" && artifacts.acceptance_failures > 0) {
            std::cerr << artifacts.acceptance_failures << " acceptance criteria failed"
                      << std::endl;
            return 3;
        }
        return 0;
    } catch (const sevolab::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
}
