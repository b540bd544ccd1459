#pragma once

#include "fractherm/continuation.hpp"
#include "fractherm/model.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace fractherm {

/// Config-file problem: schema violation, unknown key, bad value. The message
/// names the offending field path.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed CSV input; the message carries the line number.
struct csv_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RunMode { Local, Global, Validate, Converge, Gronwall };

struct SolverConfig {
    Real b = 1.0;
    Real tol = 1e-10;
    int max_iter = 200;
    Index grid_points = 512;  // cells; nodes = cells + 1
    Real grading = 1.0;       // 1 = uniform, > 1 clusters nodes at t = 0
};

struct ValidateConfig {
    Interval s_range{0.0, 1.0};
    Interval u_range{-1.0, 1.0};
    Index samples = 64;
};

struct ConvergeConfig {
    std::vector<Index> ladder{128, 256, 512, 1024};
    std::string study = "caputo-power";  // caputo-power | rl-constant | solve
};

struct OutputPaths {
    std::string trajectory;
    std::string report;
};

struct RunConfig {
    RunMode mode;
    ProblemSpec problem;
    SolverConfig solver;
    ContinuationConfig continuation;
    ValidateConfig validate;
    ConvergeConfig converge;
    OutputPaths outputs;
};

/// Parses and validates a JSON run configuration. Unknown keys are errors;
/// every reported problem names its field path. User-table CSV paths resolve
/// relative to the config file.
[[nodiscard]] RunConfig load_run_config(const std::string& path);

/// Reads a gridded conductivity table: header `s,u,f`, then row-major
/// rectangular (s outer, u inner) triples with strictly ascending axes.
[[nodiscard]] ConductivityTable read_conductivity_csv(const std::string& path);

/// Trajectory columns t,u,I,S,residual; S and residual cells are empty at
/// t = 0 when delta = 0 (the source is undefined there) and on non-finite
/// blow-up rows.
void write_trajectory_csv(const std::string& path, const ProblemSpec& spec, const SampledFn& u);

/// Applies the output-directory override (environment variable
/// FRACTHERM_OUT_DIR) to a relative path; absolute paths pass through.
[[nodiscard]] std::string resolve_output_path(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

/// Locale-independent "%.17g" rendering used for all CSV numbers.
[[nodiscard]] std::string format_real(Real x);

}  // namespace fractherm
