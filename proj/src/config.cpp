#include "sevolab/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <set>

namespace sevolab {

namespace {

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return std::string(s.substr(a, b - a + 1));
}

std::vector<double> form_args(const std::string& form, const std::string& vocab,
                              std::size_t lo, std::size_t hi) {
    std::vector<double> out;
    const auto colon = form.find(':');
    if (colon != std::string::npos) {
        std::string rest = form.substr(colon + 1);
        std::size_t start = 0;
        while (start <= rest.size()) {
            auto pos = rest.find(',', start);
            if (pos == std::string::npos) pos = rest.size();
            const std::string cell = trim(std::string_view(rest).substr(start, pos - start));
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
                throw ValidationError("form '" + form + "': bad argument '" + cell +
                                      "'; expected " + vocab);
            out.push_back(v);
            start = pos + 1;
        }
    }
    if (out.size() < lo || out.size() > hi)
        throw ValidationError("form '" + form + "': wrong argument count; expected " + vocab);
    return out;
}

std::string form_name(const std::string& form) {
    const auto colon = form.find(':');
    return colon == std::string::npos ? form : form.substr(0, colon);
}

constexpr const char* kTimeVocab =
    "constant:c | affine:c0,c1 | power:c,e | holder:c0,c1,e | cosine:c0,c1,w";
constexpr const char* kSpaceVocab = "zero | sine:k[,amp]";
constexpr const char* kCoeffVocab = "constant:c | affine_t:c0,c1";

}  // namespace

std::function<double(double)> parse_time_form(const std::string& form) {
    const std::string name = form_name(form);
    if (name == "constant") {
        const auto a = form_args(form, kTimeVocab, 1, 1);
        return [c = a[0]](double) { return c; };
    }
    if (name == "affine") {
        const auto a = form_args(form, kTimeVocab, 2, 2);
        return [c0 = a[0], c1 = a[1]](double t) { return c0 + c1 * t; };
    }
    if (name == "power") {
        const auto a = form_args(form, kTimeVocab, 2, 2);
        return [c = a[0], e = a[1]](double t) { return c * std::pow(t, e); };
    }
    if (name == "holder") {
        const auto a = form_args(form, kTimeVocab, 3, 3);
        return [c0 = a[0], c1 = a[1], e = a[2]](double t) { return c0 + c1 * std::pow(t, e); };
    }
    if (name == "cosine") {
        const auto a = form_args(form, kTimeVocab, 3, 3);
        return [c0 = a[0], c1 = a[1], w = a[2]](double t) { return c0 + c1 * std::cos(w * t); };
    }
    throw ValidationError("unknown time form '" + form + "'; expected " + kTimeVocab);
}

std::function<double(double)> parse_space_form(const std::string& form) {
    const std::string name = form_name(form);
    if (name == "zero") {
        form_args(form, kSpaceVocab, 0, 0);
        return [](double) { return 0.0; };
    }
    if (name == "sine") {
        const auto a = form_args(form, kSpaceVocab, 1, 2);
        const double amp = a.size() == 2 ? a[1] : 1.0;
        return [k = a[0], amp](double x) { return amp * std::sin(k * M_PI * x); };
    }
    throw ValidationError("unknown space form '" + form + "'; expected " + kSpaceVocab);
}

SpaceTimeFn parse_coefficient_form(const std::string& form) {
    const std::string name = form_name(form);
    if (name == "constant") {
        const auto a = form_args(form, kCoeffVocab, 1, 1);
        return [c = a[0]](double, double) { return c; };
    }
    if (name == "affine_t") {
        const auto a = form_args(form, kCoeffVocab, 2, 2);
        return [c0 = a[0], c1 = a[1]](double, double t) { return c0 + c1 * t; };
    }
    throw ValidationError("unknown coefficient form '" + form + "'; expected " + kCoeffVocab);
}

void apply_preset(RunConfig& cfg, const std::string& preset) {
    if (preset == "section4") {
        cfg.beta = 1.0;
        cfg.sigma = 0.3;
        cfg.delta = 0.7;
        cfg.delta1 = 0.9;
        cfg.horizon = 1.0;
        cfg.a_form = "affine_t:1,0.5";
        cfg.b_form = "affine_t:1,0.5";
        cfg.f_form = "power:1,0";
        cfg.g_form = "holder:1,1,0.3";
        cfg.phi1_form = "sine:1";
        cfg.phi2_form = "sine:1";
        cfg.xi_form = "zero";
        cfg.d = 1;
        cfg.n = 64;
        cfg.steps = 512;
    } else if (preset == "section4-rough") {
        apply_preset(cfg, "section4");
        cfg.beta = 0.6;
        cfg.sigma = 0.25;
        cfg.f_form = "power:1,-0.4";
    } else if (preset == "scalar-ou") {
        apply_preset(cfg, "section4");
        cfg.n = 1;
        cfg.a_form = "constant:1";
        cfg.b_form = "constant:0";
        cfg.f_form = "constant:0";
        cfg.g_form = "constant:1";
    } else if (preset == "autonomous8") {
        apply_preset(cfg, "section4");
        cfg.n = 8;
        cfg.a_form = "constant:0.05";
        cfg.b_form = "constant:1";
        cfg.f_form = "constant:0";
        cfg.g_form = "constant:1";
        cfg.xi_form = "sine:1";
    } else {
        throw ValidationError("unknown preset '" + preset +
                              "'; expected section4 | section4-rough | scalar-ou | autonomous8");
    }
    cfg.preset = preset;
}

namespace {

struct Entry {
    std::string section, key, value;
    int line = 0;
};

const std::map<std::string, std::vector<std::string>>& schema() {
    static const std::map<std::string, std::vector<std::string>> s = {
        {"run", {"kind", "seed", "threads"}},
        {"problem",
         {"preset", "beta", "sigma", "delta", "delta1", "horizon", "a_form", "b_form",
          "f_form", "g_form", "phi1_form", "phi2_form", "xi_form", "d"}},
        {"grid", {"n", "steps", "substeps_per_unit", "scheme"}},
        {"ensemble", {"paths"}},
        {"regularity", {"p", "quantity", "lag_min_steps", "window_lo"}},
        {"output", {"out_dir", "svg"}},
    };
    return s;
}

std::string joined(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw ValidationError("config " + origin + ":" + std::to_string(line) + ": " + msg);
}

double as_double(const Entry& e, const std::string& origin) {
    double v = 0.0;
    const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (res.ec != std::errc{} || res.ptr != e.value.data() + e.value.size())
        fail(origin, e.line, e.key + ": expected a number, got '" + e.value + "'");
    return v;
}

long long as_int(const Entry& e, const std::string& origin) {
    long long v = 0;
    const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (res.ec != std::errc{} || res.ptr != e.value.data() + e.value.size())
        fail(origin, e.line, e.key + ": expected an integer, got '" + e.value + "'");
    return v;
}

std::uint64_t as_u64(const Entry& e, const std::string& origin) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (res.ec != std::errc{} || res.ptr != e.value.data() + e.value.size())
        fail(origin, e.line, e.key + ": expected an unsigned integer, got '" + e.value + "'");
    return v;
}

bool as_bool(const Entry& e, const std::string& origin) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    fail(origin, e.line, e.key + ": expected true or false, got '" + e.value + "'");
}

}  // namespace

RunConfig RunConfig::from_text(const std::string& text, const std::string& origin) {
    std::vector<Entry> entries;
    std::string section;
    int line = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string::npos) pos = text.size();
        std::string raw = trim(std::string_view(text).substr(start, pos - start));
        start = pos + 1;
        ++line;
        if (raw.empty() || raw[0] == '#' || raw[0] == ';') continue;
        if (raw.front() == '[') {
            if (raw.back() != ']') fail(origin, line, "unterminated section header");
            section = trim(std::string_view(raw).substr(1, raw.size() - 2));
            if (!schema().count(section)) {
                std::vector<std::string> names;
                for (const auto& [k, v] : schema()) names.push_back(k);
                fail(origin, line,
                     "unknown section [" + section + "]; allowed: " + joined(names));
            }
            continue;
        }
        const auto eq = raw.find('=');
        if (eq == std::string::npos) fail(origin, line, "expected key=value, got '" + raw + "'");
        if (section.empty()) fail(origin, line, "key before any [section] header");
        Entry e{section, trim(std::string_view(raw).substr(0, eq)),
                trim(std::string_view(raw).substr(eq + 1)), line};
        const auto& allowed = schema().at(section);
        if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end())
            fail(origin, line, "unknown key '" + e.key + "' in [" + section +
                                   "]; allowed: " + joined(allowed));
        entries.push_back(std::move(e));
    }

    if (entries.empty())
        throw ValidationError(
            "config " + origin +
            ": no keys found; at least [run] kind = solve | ensemble | constants-scan | "
            "regularity | acceptance is required (optional sections: [problem], [grid], "
            "[ensemble], [regularity], [output])");

    RunConfig cfg;
    // Preset fields first so file keys act as overrides regardless of order.
    for (const auto& e : entries)
        if (e.section == "problem" && e.key == "preset") apply_preset(cfg, e.value);

    for (const auto& e : entries) {
        if (e.section == "run") {
            if (e.key == "kind") {
                static const std::set<std::string> kinds = {
                    "solve", "ensemble", "constants-scan", "regularity", "acceptance"};
                if (!kinds.count(e.value))
                    fail(origin, e.line,
                         "kind: expected solve | ensemble | constants-scan | regularity | "
                         "acceptance, got '" + e.value + "'");
                cfg.kind = e.value;
            } else if (e.key == "seed") {
                cfg.seed = as_u64(e, origin);
            } else {
                cfg.threads = static_cast<int>(as_int(e, origin));
            }
        } else if (e.section == "problem") {
            if (e.key == "preset") continue;  // applied above
            if (e.key == "beta") cfg.beta = as_double(e, origin);
            else if (e.key == "sigma") cfg.sigma = as_double(e, origin);
            else if (e.key == "delta") cfg.delta = as_double(e, origin);
            else if (e.key == "delta1") cfg.delta1 = as_double(e, origin);
            else if (e.key == "horizon") cfg.horizon = as_double(e, origin);
            else if (e.key == "a_form") cfg.a_form = e.value;
            else if (e.key == "b_form") cfg.b_form = e.value;
            else if (e.key == "f_form") cfg.f_form = e.value;
            else if (e.key == "g_form") cfg.g_form = e.value;
            else if (e.key == "phi1_form") cfg.phi1_form = e.value;
            else if (e.key == "phi2_form") cfg.phi2_form = e.value;
            else if (e.key == "xi_form") cfg.xi_form = e.value;
            else cfg.d = static_cast<int>(as_int(e, origin));
        } else if (e.section == "grid") {
            if (e.key == "n") cfg.n = static_cast<int>(as_int(e, origin));
            else if (e.key == "steps") cfg.steps = static_cast<int>(as_int(e, origin));
            else if (e.key == "substeps_per_unit")
                cfg.substeps_per_unit = static_cast<int>(as_int(e, origin));
            else {
                parse_scheme(e.value);  // vocabulary check with its own message
                cfg.scheme = e.value;
            }
        } else if (e.section == "ensemble") {
            cfg.paths = static_cast<int>(as_int(e, origin));
        } else if (e.section == "regularity") {
            if (e.key == "p") cfg.p = as_double(e, origin);
            else if (e.key == "quantity") {
                static const std::set<std::string> quantities = {"X", "AX", "W0", "W1"};
                if (!quantities.count(e.value))
                    fail(origin, e.line,
                         "quantity: expected X | AX | W0 | W1, got '" + e.value + "'");
                cfg.quantity = e.value;
            } else if (e.key == "lag_min_steps")
                cfg.lag_min_steps = static_cast<int>(as_int(e, origin));
            else cfg.window_lo = as_double(e, origin);
        } else {  // output
            if (e.key == "out_dir") cfg.out_dir = e.value;
            else cfg.svg = as_bool(e, origin);
        }
    }

    require(cfg.threads >= 1, "config: threads must be >= 1");
    require(cfg.n >= 1, "config: n must be >= 1");
    require(cfg.steps >= 2, "config: steps must be >= 2");
    require(cfg.substeps_per_unit >= 0, "config: substeps_per_unit must be >= 0");
    require(cfg.paths >= 1, "config: paths must be >= 1");
    require(cfg.d >= 1, "config: d must be >= 1");
    require(cfg.horizon > 0.0, "config: horizon must be positive");
    require(cfg.p >= 1.0, "config: p must be >= 1");
    require(cfg.lag_min_steps >= 1, "config: lag_min_steps must be >= 1");
    require(cfg.window_lo >= 0.0 && cfg.window_lo < cfg.horizon,
            "config: window_lo must lie in [0, horizon)");
    return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    return from_text(read_file(path), path.string());
}

SchemeKind RunConfig::scheme_kind() const { return parse_scheme(scheme); }

int RunConfig::effective_substeps() const {
    if (substeps_per_unit > 0) return substeps_per_unit;
    return std::max(1, static_cast<int>(std::llround(steps / horizon)));
}

std::shared_ptr<const OperatorFamily> RunConfig::build_family() const {
    const auto a = parse_coefficient_form(a_form);
    const auto b = parse_coefficient_form(b_form);
    if (n == 1) {
        // No stencil at a single mode: A(t) is the 1 x 1 matrix
        // [a(1/2, t) + b(1/2, t)], which keeps the scalar presets exact.
        auto samples = [a, b](double t) {
            Matrix m(1, 1);
            m(0, 0) = a(0.5, t) + b(0.5, t);
            return m;
        };
        return std::make_shared<OperatorFamily>(
            std::move(samples), 1, horizon, 1.0, 1.0,
            "scalar(a=" + a_form + ";b=" + b_form + ")");
    }
    CoefficientField coeffs{a, b, "a=" + a_form + ";b=" + b_form};
    return std::make_shared<OperatorFamily>(Grid::interior(n), std::move(coeffs), horizon);
}

namespace {

Vector space_vector(const std::string& form, const OperatorFamily& family) {
    const auto fn = parse_space_form(form);
    Vector v(family.dim());
    if (family.grid()) {
        for (int i = 0; i < family.dim(); ++i) v(i) = fn(family.grid()->point(i));
    } else {
        for (int i = 0; i < family.dim(); ++i) v(i) = fn(0.5);
    }
    return v;
}

}  // namespace

ProblemSpec RunConfig::build_problem() const {
    require(d == 1 || n > 1, "config: d > 1 requires a grid problem (n >= 2)");
    ProblemSpec problem;
    problem.family = build_family();
    problem.f_params = WeightedHolderParams{beta, sigma};
    problem.delta = delta;
    problem.delta1 = delta1;
    problem.horizon = horizon;
    problem.tag = preset;

    const Vector phi1 = space_vector(phi1_form, *problem.family);
    auto f_fn = parse_time_form(f_form);
    problem.forcing = [f_fn, phi1](double t) -> Vector { return f_fn(t) * phi1; };

    // Column j of G(t) drives the (k + j)-th harmonic of the phi2 form; with
    // d = 1 this is just g(t) * phi2.
    auto g_fn = parse_time_form(g_form);
    std::vector<Vector> columns;
    const auto colon = phi2_form.find(':');
    for (int j = 0; j < d; ++j) {
        std::string form = phi2_form;
        if (j > 0 && form_name(phi2_form) == "sine") {
            auto args = form_args(phi2_form, kSpaceVocab, 1, 2);
            form = "sine:" + format_double(args[0] + j);
            if (args.size() == 2) form += "," + format_double(args[1]);
        }
        (void)colon;
        columns.push_back(space_vector(form, *problem.family));
    }
    const int rows = problem.family->dim();
    Matrix base(rows, d);
    for (int j = 0; j < d; ++j) base.col(j) = columns[j];
    problem.noise.rows = rows;
    problem.noise.cols = d;
    problem.noise.tag = "g=" + g_form + ";phi2=" + phi2_form + ";d=" + std::to_string(d);
    problem.noise.map = [g_fn, base](double t) -> Matrix { return g_fn(t) * base; };

    problem.xi = space_vector(xi_form, *problem.family);
    problem.validate();
    return problem;
}

json RunConfig::echo() const {
    json j;
    j["run"] = {{"kind", kind}, {"seed", seed}, {"threads", threads}};
    j["problem"] = {{"preset", preset},       {"beta", beta},
                    {"sigma", sigma},         {"delta", delta},
                    {"delta1", delta1},       {"horizon", horizon},
                    {"a_form", a_form},       {"b_form", b_form},
                    {"f_form", f_form},       {"g_form", g_form},
                    {"phi1_form", phi1_form}, {"phi2_form", phi2_form},
                    {"xi_form", xi_form},     {"d", d}};
    j["grid"] = {{"n", n},
                 {"steps", steps},
                 {"substeps_per_unit", substeps_per_unit},
                 {"scheme", scheme}};
    j["ensemble"] = {{"paths", paths}};
    j["regularity"] = {{"p", p},
                       {"quantity", quantity},
                       {"lag_min_steps", lag_min_steps},
                       {"window_lo", window_lo}};
    j["output"] = {{"out_dir", out_dir}, {"svg", svg}};
    return j;
}

}  // namespace sevolab
