#pragma once

// Flat key-value run configuration (mesh.n_cells = 400 style), the built-in
// named models, and the translation into assembled problem objects.

#include "aplab/continuation.hpp"
#include "aplab/problem.hpp"
#include "aplab/solvers.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aplab {

/// Configuration or CLI error with the offending source line/field when
/// known. The CLI maps this to its config-error exit code.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string message, std::string field = {}, int line = 0);
    const std::string& field() const { return field_; }
    int line() const { return line_; }

private:
    std::string field_;
    int line_;
};

struct ForcingSpec {
    enum class Kind { constant, table, file };
    Kind kind = Kind::constant;
    double value = 0.0;
    std::vector<std::pair<double, double>> table; // (x, value), interpolated
    std::string file;                             // rows of "x value"
};

struct RunConfig {
    // mesh
    double mesh_left = -1.0;
    double mesh_right = 1.0;
    int n_cells = 400;
    double grading = 2.0;
    int radial_dimension = 1;
    double alpha = 0.5;

    // nonlinearity
    std::string f_kind = "piecewise_linear";
    double f_a = 1.0;
    double f_b = 1.0;
    std::string f_table_file;
    NonlinearityConstants f_constants{};
    double u_check = 1e3;

    // forcing
    ForcingSpec phi{ForcingSpec::Kind::constant, 1.0, {}, {}};
    ForcingSpec h{ForcingSpec::Kind::constant, 0.0, {}, {}};

    // runs
    double t = -1.0;
    std::vector<double> t_grid;
    std::uint64_t seed = 1;
    int jobs = 1;
    bool verbose = false;

    SolveOptions solve;
    double linear_tol = 1e-10;
    RegionSpec region;

    // output
    std::string out_dir = "out";
    double probe_x = 0.0;
    bool dump_matrices = false;

    // manufactured-solution study
    std::vector<int> mms_refinements = {100, 200, 400, 800};

    /// Ordered (key, value) echo of every field, as written to summary.kv.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Parses the flat key-value format; unknown keys and malformed values
/// throw ConfigError with line diagnostics.
RunConfig parse_config(std::istream& in, const std::string& source_name);

/// Loads a config file, or a built-in model when `path_or_model` names one.
RunConfig load_config(const std::string& path_or_model);

/// Embedded config text for the built-in models ("pl11", "smoothabs").
std::optional<std::string> builtin_config(const std::string& name);

/// Mesh + operator + validated problem data built from a config.
struct BuiltProblem {
    Mesh mesh;
    WeightedOperator op;
    ProblemSpec spec;
};

BuiltProblem build_problem(const RunConfig& config);

/// Samples a forcing specification at the mesh nodes.
std::vector<double> sample_forcing(const ForcingSpec& forcing, const Mesh& mesh);

Nonlinearity make_nonlinearity(const RunConfig& config);

} // namespace aplab
