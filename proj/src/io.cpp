#include "sevolab/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sevolab/sha256.hpp"

namespace sevolab {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view s, const char* what) {
    double out = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw IoError(std::string(what) + ": bad number '" + std::string(s) + "'");
    return out;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        auto line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) out.push_back(line);
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string matrix_csv(const Matrix& m, double h, double t) {
    std::string out = "n,h,t\n";
    out += std::to_string(m.rows()) + "," + format_double(h) + "," + format_double(t) + "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ",";
            out += format_double(m(i, j));
        }
        out += "\n";
    }
    return out;
}

Matrix parse_matrix_csv(const std::string& text) {
    const auto rows = lines_of(text);
    if (rows.size() < 3 || rows[0] != "n,h,t")
        throw IoError("matrix csv: missing 'n,h,t' header");
    const auto meta = split(rows[1], ',');
    if (meta.size() != 3) throw IoError("matrix csv: bad metadata row");
    const auto n = static_cast<Eigen::Index>(parse_double(meta[0], "matrix csv n"));
    if (n < 1 || rows.size() != static_cast<std::size_t>(n) + 2)
        throw IoError("matrix csv: row count mismatch");
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto cells = split(rows[2 + i], ',');
        if (cells.size() != static_cast<std::size_t>(n))
            throw IoError("matrix csv: column count mismatch");
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = parse_double(cells[j], "matrix csv entry");
    }
    return m;
}

std::string sampled_path_csv(const SampledPath& path) {
    path.validate();
    std::string out = "t";
    for (int j = 0; j < path.dim(); ++j) out += ",x" + std::to_string(j);
    out += "\n";
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        out += format_double(path.times[i]);
        for (int j = 0; j < path.dim(); ++j)
            out += "," + format_double(path.values[i](j));
        out += "\n";
    }
    return out;
}

SampledPath parse_sampled_path_csv(const std::string& text) {
    const auto rows = lines_of(text);
    if (rows.size() < 3) throw IoError("path csv: too few rows");
    const auto header = split(rows[0], ',');
    if (header.size() < 2 || header[0] != "t") throw IoError("path csv: bad header");
    const int d = static_cast<int>(header.size()) - 1;
    SampledPath path;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto cells = split(rows[r], ',');
        if (cells.size() != header.size()) throw IoError("path csv: ragged row");
        path.times.push_back(parse_double(cells[0], "path csv time"));
        Vector v(d);
        for (int j = 0; j < d; ++j) v(j) = parse_double(cells[j + 1], "path csv value");
        path.values.push_back(std::move(v));
    }
    path.validate();
    return path;
}

std::string trajectory_csv(const Trajectory& traj) {
    traj.validate();
    std::string out = "t";
    const std::string base = traj.quantity.empty() ? "x" : traj.quantity;
    for (int j = 0; j < traj.dim(); ++j) out += "," + base + std::to_string(j);
    out += "\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out += format_double(traj.times[i]);
        for (int j = 0; j < traj.dim(); ++j)
            out += "," + format_double(traj.states(i, j));
        out += "\n";
    }
    return out;
}

std::string brownian_csv(const BrownianPath& path) {
    path.validate();
    std::string out = "t";
    for (int j = 0; j < path.d; ++j) out += ",dw" + std::to_string(j);
    out += "\n";
    for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
        out += format_double(path.times[k]);
        for (int j = 0; j < path.d; ++j)
            out += "," + format_double(path.increments(k, j));
        out += "\n";
    }
    return out;
}

std::string solution_csv(const SolutionPath& sol) {
    std::string out = "t";
    const int n = sol.x.dim();
    for (const char* block : {"X", "I1", "W0", "W1"})
        for (int j = 0; j < n; ++j)
            out += "," + std::string(block) + std::to_string(j);
    out += "\n";
    for (std::size_t i = 0; i < sol.x.times.size(); ++i) {
        out += format_double(sol.x.times[i]);
        for (const Trajectory* traj : {&sol.x, &sol.i1, &sol.w0, &sol.w1})
            for (int j = 0; j < n; ++j) out += "," + format_double(traj->states(i, j));
        out += "\n";
    }
    return out;
}

std::string structure_csv(const StructureTable& table) {
    std::string out = "lag,moment,stderr\n";
    for (std::size_t i = 0; i < table.lags.size(); ++i) {
        out += format_double(table.lags[i]) + "," + format_double(table.moments[i]) +
               "," + format_double(table.ses[i]) + "\n";
    }
    return out;
}

std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
    require(!header.empty() && header.size() == columns.size(),
            "table_csv: header/column mismatch");
    const std::size_t rows = columns.front().size();
    for (const auto& c : columns)
        require(c.size() == rows, "table_csv: ragged columns");
    std::string out;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j) out += ",";
        out += header[j];
    }
    out += "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j) out += ",";
            out += format_double(columns[j][i]);
        }
        out += "\n";
    }
    return out;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& p, std::string_view bytes) {
    std::filesystem::create_directories(p.parent_path().empty() ? "." : p.parent_path());
    const std::filesystem::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, p);
}

namespace {

struct AxisMap {
    double lo = 0, hi = 1;
    bool log = false;
    double px0 = 0, px1 = 1;

    double to_px(double v) const {
        const double x = log ? std::log10(v) : v;
        const double l = log ? std::log10(lo) : lo;
        const double h = log ? std::log10(hi) : hi;
        return px0 + (x - l) / (h - l) * (px1 - px0);
    }
};

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<SvgSeries>& series, bool log_x,
                           bool log_y) {
    require(!series.empty(), "line_chart_svg: no series");
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& s : series) {
        require(s.x.size() == s.y.size() && s.x.size() >= 2, "line_chart_svg: bad series");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (log_x && s.x[i] <= 0) continue;
            if (log_y && s.y[i] <= 0) continue;
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    }
    require(std::isfinite(xlo) && xhi > xlo, "line_chart_svg: empty x range");
    if (yhi <= ylo) yhi = ylo + 1.0;
    if (!log_y) {
        const double pad = 0.05 * (yhi - ylo);
        ylo -= pad;
        yhi += pad;
        if (ylo > 0 && ylo < 0.2 * yhi) ylo = 0;
    }

    const double width = 640, height = 420;
    AxisMap xm{xlo, xhi, log_x, 70, width - 20};
    AxisMap ym{ylo, yhi, log_y, height - 50, 40};

    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
        "viewBox=\"0 0 640 420\">\n"
        "<rect width=\"640\" height=\"420\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\">" + title + "</text>\n";

    // Frame and ticks.
    svg += "<rect x=\"70\" y=\"40\" width=\"" + px(width - 90) + "\" height=\"" +
           px(height - 90) + "\" fill=\"none\" stroke=\"#444444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = log_x ? std::pow(10.0, std::log10(xlo) +
                                                     (std::log10(xhi) - std::log10(xlo)) * i / 4.0)
                                : xlo + (xhi - xlo) * i / 4.0;
        const double fy = log_y ? std::pow(10.0, std::log10(ylo) +
                                                     (std::log10(yhi) - std::log10(ylo)) * i / 4.0)
                                : ylo + (yhi - ylo) * i / 4.0;
        char label[48];
        svg += "<line x1=\"" + px(xm.to_px(fx)) + "\" y1=\"" + px(height - 50) +
               "\" x2=\"" + px(xm.to_px(fx)) + "\" y2=\"" + px(height - 44) +
               "\" stroke=\"#444444\"/>\n";
        std::snprintf(label, sizeof(label), "%.3g", fx);
        svg += "<text x=\"" + px(xm.to_px(fx)) + "\" y=\"" + px(height - 30) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               label + "</text>\n";
        svg += "<line x1=\"64\" y1=\"" + px(ym.to_px(fy)) + "\" x2=\"70\" y2=\"" +
               px(ym.to_px(fy)) + "\" stroke=\"#444444\"/>\n";
        std::snprintf(label, sizeof(label), "%.3g", fy);
        svg += "<text x=\"60\" y=\"" + px(ym.to_px(fy) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               label + "</text>\n";
    }
    svg += "<text x=\"320\" y=\"" + px(height - 8) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           x_label + "</text>\n";
    svg += "<text x=\"16\" y=\"230\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\" transform=\"rotate(-90 16 230)\">" + y_label + "</text>\n";

    double legend_y = 56;
    for (const auto& s : series) {
        std::string points;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (log_x && s.x[i] <= 0) continue;
            if (log_y && s.y[i] <= 0) continue;
            points += px(xm.to_px(s.x[i])) + "," + px(ym.to_px(s.y[i])) + " ";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.6\"" +
               (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + " points=\"" + points +
               "\"/>\n";
        if (!s.label.empty()) {
            svg += "<line x1=\"85\" y1=\"" + px(legend_y - 4) + "\" x2=\"110\" y2=\"" +
                   px(legend_y - 4) + "\" stroke=\"" + s.color + "\" stroke-width=\"1.6\"" +
                   (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
            svg += "<text x=\"116\" y=\"" + px(legend_y) +
                   "\" font-family=\"sans-serif\" font-size=\"11\">" + s.label + "</text>\n";
            legend_y += 16;
        }
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace sevolab
