#include "fractherm/io.hpp"

#include "fractherm/picard.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fractherm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_real(Real x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string resolve_output_path(const std::string& path) {
    const char* dir = std::getenv("FRACTHERM_OUT_DIR");
    if (dir == nullptr || *dir == '\0' || fs::path(path).is_absolute()) return path;
    return (fs::path(dir) / path).string();
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::string resolved = resolve_output_path(path);
    const fs::path parent = fs::path(resolved).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(resolved, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + resolved);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + resolved);
}

// ---------------------------------------------------------------------------
// Conductivity table CSV
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void csv_fail(const std::string& path, long line, const std::string& msg) {
    throw csv_error(path + ":" + std::to_string(line) + ": " + msg);
}

Real parse_field(const std::string& field, const std::string& path, long line) {
    const char* begin = field.data();
    const char* end = begin + field.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    Real value{};
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        csv_fail(path, line, "expected a number, got '" + field + "'");
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string trimmed(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::string::size_type i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

}  // namespace

ConductivityTable read_conductivity_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw csv_error(path + ": cannot open file");

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) csv_fail(path, 1, "empty file");
    ++line_no;
    if (trimmed(line) != "s,u,f") csv_fail(path, line_no, "expected header 's,u,f'");

    struct Row {
        Real s, u, f;
        long line;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3)
            csv_fail(path, line_no, "expected 3 fields, got " + std::to_string(fields.size()));
        rows.push_back({parse_field(fields[0], path, line_no), parse_field(fields[1], path, line_no),
                        parse_field(fields[2], path, line_no), line_no});
    }
    if (rows.size() < 4) csv_fail(path, line_no, "need at least a 2x2 grid of samples");

    // First block (constant s) fixes the u axis; every later block must
    // repeat it under the next ascending s.
    std::vector<Real> u_axis;
    std::size_t i = 0;
    while (i < rows.size() && rows[i].s == rows[0].s) {
        if (!u_axis.empty() && !(rows[i].u > u_axis.back()))
            csv_fail(path, rows[i].line, "u axis must be strictly ascending within a block");
        u_axis.push_back(rows[i].u);
        ++i;
    }
    const std::size_t nu = u_axis.size();
    if (nu < 2) csv_fail(path, rows[0].line, "need at least 2 u samples per s block");
    if (rows.size() % nu != 0)
        csv_fail(path, rows.back().line, "table is not rectangular (row count not a multiple of "
                                             + std::to_string(nu) + ")");
    const std::size_t ns = rows.size() / nu;
    if (ns < 2) csv_fail(path, rows.back().line, "need at least 2 s blocks");

    ConductivityTable table;
    table.s_axis = Vector(ns);
    table.u_axis = Vector(nu);
    for (std::size_t j = 0; j < nu; ++j) table.u_axis[static_cast<Index>(j)] = u_axis[j];
    table.values = Eigen::ArrayXXd(ns, nu);

    for (std::size_t bi = 0; bi < ns; ++bi) {
        const Row& first = rows[bi * nu];
        table.s_axis[static_cast<Index>(bi)] = first.s;
        if (bi > 0 && !(first.s > table.s_axis[static_cast<Index>(bi - 1)]))
            csv_fail(path, first.line, "s axis must be strictly ascending between blocks");
        for (std::size_t j = 0; j < nu; ++j) {
            const Row& row = rows[bi * nu + j];
            if (row.s != first.s)
                csv_fail(path, row.line, "block changed s mid-way; table is not row-major rectangular");
            if (row.u != u_axis[j])
                csv_fail(path, row.line, "u value does not match the axis from the first block");
            if (!(row.f >= 0.0) || !std::isfinite(row.f))
                csv_fail(path, row.line, "f must be finite and nonnegative");
            table.values(static_cast<Index>(bi), static_cast<Index>(j)) = row.f;
        }
    }
    table.validate();
    return table;
}

// ---------------------------------------------------------------------------
// Trajectory CSV
// ---------------------------------------------------------------------------

void write_trajectory_csv(const std::string& path, const ProblemSpec& spec, const SampledFn& u) {
    std::ostringstream out;
    out << "t,u,I,S,residual\n";

    const bool finite = u.values.isFinite().all();
    NonlocalState state{SampledFn::constant(u.grid, 0.0), 0};
    bool have_map = false;
    SampledFn mapped = u;
    if (finite) {
        state = accumulate(spec.f, u);
        try {
            mapped = fixed_point_map(u, spec);
            have_map = true;
        } catch (const std::exception&) {
        }
    }

    for (Index k = 0; k < u.size(); ++k) {
        const Real t = u.grid[k];
        out << format_real(t) << ',' << format_real(u.values[k]) << ',';
        if (finite) out << format_real(state.integral.values[k]);
        out << ',';
        std::string s_cell, r_cell;
        if (finite && std::isfinite(u.values[k])) {
            try {
                s_cell = format_real(source_term(spec, t, u.values[k], state));
            } catch (const singular_source_error&) {
                // undefined at t = 0 when delta = 0; leave the cell empty
            }
            if (have_map && !s_cell.empty())
                r_cell = format_real(std::abs(u.values[k] - mapped.values[k]));
        }
        out << s_cell << ',' << r_cell << '\n';
    }
    write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void cfg_fail(const std::string& field, const std::string& msg) {
    throw config_error("config: " + field + ": " + msg);
}

std::string join(const std::string& base, const char* key) {
    return base.empty() ? key : base + "." + key;
}

void check_keys(const json& obj, const std::string& base,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) cfg_fail(join(base, item.key().c_str()), "unknown key");
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& base, const char* key) {
    const json* p = find(obj, key);
    if (p == nullptr) cfg_fail(join(base, key), "missing required key");
    return *p;
}

Real get_real(const json& v, const std::string& field) {
    if (!v.is_number()) cfg_fail(field, "expected a number");
    return v.get<Real>();
}

Real get_real(const json& obj, const std::string& base, const char* key, Real fallback) {
    const json* p = find(obj, key);
    return p ? get_real(*p, join(base, key)) : fallback;
}

long get_int(const json& v, const std::string& field) {
    if (!v.is_number_integer()) cfg_fail(field, "expected an integer");
    return v.get<long>();
}

long get_int(const json& obj, const std::string& base, const char* key, long fallback) {
    const json* p = find(obj, key);
    return p ? get_int(*p, join(base, key)) : fallback;
}

std::string get_string(const json& v, const std::string& field) {
    if (!v.is_string()) cfg_fail(field, "expected a string");
    return v.get<std::string>();
}

Interval get_interval(const json& obj, const std::string& base, const char* key,
                      Interval fallback) {
    const json* p = find(obj, key);
    if (p == nullptr) return fallback;
    const std::string field = join(base, key);
    if (!p->is_array() || p->size() != 2) cfg_fail(field, "expected an array [lo, hi]");
    return {get_real((*p)[0], field + "[0]"), get_real((*p)[1], field + "[1]")};
}

ConductivitySpec parse_conductivity(const json& obj, const std::string& base,
                                    const fs::path& config_dir) {
    if (!obj.is_object()) cfg_fail(base, "expected an object");
    const std::string family = get_string(require(obj, base, "family"), join(base, "family"));
    if (family == "constant") {
        check_keys(obj, base, {"family", "c"});
        return ConductivitySpec::constant(get_real(require(obj, base, "c"), join(base, "c")));
    }
    if (family == "bounded-oscillatory") {
        check_keys(obj, base, {"family", "c", "eps"});
        return ConductivitySpec::bounded_oscillatory(
            get_real(require(obj, base, "c"), join(base, "c")),
            get_real(obj, base, "eps", 1.0));
    }
    if (family == "quadratic-time") {
        check_keys(obj, base, {"family", "a", "eps"});
        return ConductivitySpec::quadratic_time(get_real(require(obj, base, "a"), join(base, "a")),
                                                get_real(obj, base, "eps", 0.0));
    }
    if (family == "affine-growth") {
        check_keys(obj, base, {"family", "c3", "c4", "cap"});
        return ConductivitySpec::affine_growth(get_real(require(obj, base, "c3"), join(base, "c3")),
                                               get_real(require(obj, base, "c4"), join(base, "c4")),
                                               get_real(obj, base, "cap", 1e12));
    }
    if (family == "user-table") {
        check_keys(obj, base, {"family", "csv"});
        const std::string rel = get_string(require(obj, base, "csv"), join(base, "csv"));
        const fs::path csv = fs::path(rel).is_absolute() ? fs::path(rel) : config_dir / rel;
        return ConductivitySpec::user_table(read_conductivity_csv(csv.string()));
    }
    cfg_fail(join(base, "family"),
             "unknown family '" + family
                 + "' (constant | bounded-oscillatory | quadratic-time | affine-growth | user-table)");
}

HypothesisConstants parse_constants(const json* obj, const std::string& base) {
    HypothesisConstants c;
    if (obj == nullptr) return c;
    check_keys(*obj, base, {"c1", "c2", "lipschitz", "quad_growth", "omega", "growth"});
    c.c1 = get_real(*obj, base, "c1", c.c1);
    c.c2 = get_real(*obj, base, "c2", c.c2);
    c.lipschitz = get_real(*obj, base, "lipschitz", c.lipschitz);
    c.quad_growth = get_real(*obj, base, "quad_growth", c.quad_growth);
    c.omega = get_real(*obj, base, "omega", c.omega);
    if (const json* g = find(*obj, "growth")) {
        const std::string gbase = join(base, "growth");
        check_keys(*g, gbase, {"c3", "c4", "c5"});
        c.growth = HypothesisConstants::GrowthEnvelope{
            get_real(require(*g, gbase, "c3"), join(gbase, "c3")),
            get_real(require(*g, gbase, "c4"), join(gbase, "c4")),
            get_real(require(*g, gbase, "c5"), join(gbase, "c5"))};
    }
    return c;
}

RunMode parse_mode(const std::string& mode) {
    if (mode == "local") return RunMode::Local;
    if (mode == "global") return RunMode::Global;
    if (mode == "validate") return RunMode::Validate;
    if (mode == "converge") return RunMode::Converge;
    if (mode == "gronwall") return RunMode::Gronwall;
    cfg_fail("mode", "unknown mode '" + mode + "' (local | global | validate | converge | gronwall)");
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open file: " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw config_error("config: " + path + " is not valid JSON: " + e.what());
    }
    if (!root.is_object()) throw config_error("config: top level must be an object");
    check_keys(root, "",
               {"mode", "problem", "solver", "continuation", "validate", "converge", "outputs"});

    const RunMode mode = parse_mode(get_string(require(root, "", "mode"), "mode"));

    const json& prob = require(root, "", "problem");
    if (!prob.is_object()) cfg_fail("problem", "expected an object");
    check_keys(prob, "problem",
               {"alpha", "lambda", "u0", "delta", "horizon", "conductivity", "constants"});
    const Real alpha = get_real(require(prob, "problem", "alpha"), "problem.alpha");
    if (!(alpha > 0.0 && alpha < 0.5))
        cfg_fail("problem.alpha", "alpha must lie in (0, 0.5), got " + format_real(alpha));

    ProblemSpec spec{
        FracOrder(alpha),
        get_real(require(prob, "problem", "lambda"), "problem.lambda"),
        get_real(require(prob, "problem", "u0"), "problem.u0"),
        parse_conductivity(require(prob, "problem", "conductivity"), "problem.conductivity",
                           fs::path(path).parent_path()),
        parse_constants(find(prob, "constants"), "problem.constants"),
        get_real(prob, "problem", "delta", 0.0),
        get_real(require(prob, "problem", "horizon"), "problem.horizon"),
    };
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("config: ") + e.what());
    }

    SolverConfig solver;
    if (const json* s = find(root, "solver")) {
        check_keys(*s, "solver", {"b", "tol", "max_iter", "grid_points", "grading"});
        solver.b = get_real(*s, "solver", "b", solver.b);
        solver.tol = get_real(*s, "solver", "tol", solver.tol);
        solver.max_iter = static_cast<int>(get_int(*s, "solver", "max_iter", solver.max_iter));
        solver.grid_points = get_int(*s, "solver", "grid_points", solver.grid_points);
        solver.grading = get_real(*s, "solver", "grading", solver.grading);
        if (!(solver.b > 0.0)) cfg_fail("solver.b", "must be > 0");
        if (!(solver.tol > 0.0)) cfg_fail("solver.tol", "must be > 0");
        if (solver.max_iter < 1) cfg_fail("solver.max_iter", "must be >= 1");
        if (solver.grid_points < 2) cfg_fail("solver.grid_points", "must be >= 2");
        if (!(solver.grading >= 1.0)) cfg_fail("solver.grading", "must be >= 1");
    }

    ContinuationConfig continuation = ContinuationConfig::defaults(spec);
    if (const json* c = find(root, "continuation")) {
        check_keys(*c, "continuation",
                   {"step_b", "blowup_threshold", "max_segments", "grid_density", "grading"});
        continuation.step_b = get_real(*c, "continuation", "step_b", continuation.step_b);
        continuation.blowup_threshold =
            get_real(*c, "continuation", "blowup_threshold", continuation.blowup_threshold);
        continuation.max_segments = static_cast<int>(
            get_int(*c, "continuation", "max_segments", continuation.max_segments));
        continuation.grid_density =
            get_real(*c, "continuation", "grid_density", continuation.grid_density);
        continuation.grading = get_real(*c, "continuation", "grading", continuation.grading);
        try {
            continuation.validate();
        } catch (const std::invalid_argument& e) {
            throw config_error(std::string("config: ") + e.what());
        }
    }

    ValidateConfig validate;
    if (const json* v = find(root, "validate")) {
        check_keys(*v, "validate", {"s_range", "u_range", "samples"});
        validate.s_range = get_interval(*v, "validate", "s_range", validate.s_range);
        validate.u_range = get_interval(*v, "validate", "u_range", validate.u_range);
        validate.samples = get_int(*v, "validate", "samples", validate.samples);
        if (validate.samples < 2) cfg_fail("validate.samples", "must be >= 2");
    }

    ConvergeConfig converge;
    if (const json* c = find(root, "converge")) {
        check_keys(*c, "converge", {"ladder", "study"});
        if (const json* ladder = find(*c, "ladder")) {
            if (!ladder->is_array() || ladder->empty())
                cfg_fail("converge.ladder", "expected a nonempty array of integers");
            converge.ladder.clear();
            for (std::size_t i = 0; i < ladder->size(); ++i)
                converge.ladder.push_back(
                    get_int((*ladder)[i], "converge.ladder[" + std::to_string(i) + "]"));
        }
        if (const json* study = find(*c, "study"))
            converge.study = get_string(*study, "converge.study");
        if (converge.study != "caputo-power" && converge.study != "rl-constant"
            && converge.study != "solve")
            cfg_fail("converge.study", "expected caputo-power | rl-constant | solve");
    }

    OutputPaths outputs;
    if (const json* o = find(root, "outputs")) {
        check_keys(*o, "outputs", {"trajectory", "report"});
        if (const json* t = find(*o, "trajectory")) outputs.trajectory = get_string(*t, "outputs.trajectory");
        if (const json* r = find(*o, "report")) outputs.report = get_string(*r, "outputs.report");
        if (find(*o, "trajectory") && outputs.trajectory.empty())
            cfg_fail("outputs.trajectory", "path must be nonempty");
        if (find(*o, "report") && outputs.report.empty())
            cfg_fail("outputs.report", "path must be nonempty");
    }

    return RunConfig{mode, std::move(spec), solver, continuation, validate, converge, outputs};
}

}  // namespace fractherm
