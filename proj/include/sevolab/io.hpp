#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sevolab/regularity_lab.hpp"

namespace sevolab {

using json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes);

// Shortest round-trip decimal form, '.' separator, byte-stable across runs.
std::string format_double(double x);

// CSV glue. Writers emit '\n' line ends and round-trip-exact numbers.
std::string matrix_csv(const Matrix& m, double h, double t);
Matrix parse_matrix_csv(const std::string& text);

std::string sampled_path_csv(const SampledPath& path);
SampledPath parse_sampled_path_csv(const std::string& text);

std::string trajectory_csv(const Trajectory& traj);
std::string brownian_csv(const BrownianPath& path);
std::string solution_csv(const SolutionPath& sol);
std::string structure_csv(const StructureTable& table);

// Generic column table (header + columns of formatted doubles).
std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns);

std::string read_file(const std::filesystem::path& p);
// Write to <name>.tmp in the same directory, then rename over the target.
void write_file_atomic(const std::filesystem::path& p, std::string_view bytes);

struct SvgSeries {
    std::vector<double> x, y;
    std::string label;
    std::string color = "#1f6feb";
    bool dashed = false;
};

// Self-contained line chart; log-log axes optional. Deterministic bytes.
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<SvgSeries>& series, bool log_x,
                           bool log_y);

}  // namespace sevolab
