#pragma once

// Command implementations behind the CLI: single-t solve, t-sweep, branch
// tracing, threshold bracketing, index/degree tables, the invariant check
// suite, and the manufactured-solution convergence study. Each command
// returns an in-memory report; write_outputs renders the delimited tables,
// the key-value summary, and the plot script.

#include "aplab/config.hpp"

#include <string>
#include <vector>

namespace aplab {

struct SolutionRow {
    double t = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    double u_probe = 0.0;
    double residual_norm = 0.0;
    double defect = 0.0;
    int index = 0;
    std::string method;
};

struct SweepRow {
    double t = 0.0;
    int count = 0;
    double max_abs_u = 0.0;
    std::string indices; // comma-joined local indices
    std::string error;   // per-t failure, recorded rather than fatal
};

struct BranchRow {
    double arclength = 0.0;
    double t = 0.0;
    double u_mean = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    int index = 0;
    double tangent_dt = 0.0;
};

struct CheckItem {
    std::string name;
    bool pass = false;
    bool hard = true; // hard failures give the CLI a nonzero exit status
    std::string measured;
};

struct RunReport {
    std::string command;
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<Solution> solutions;
    std::vector<SolutionRow> solution_rows;
    std::vector<SweepRow> sweep;
    std::vector<BranchRow> branch_rows;
    std::vector<CheckItem> checks;
    bool ok = true;
    double elapsed_seconds = 0.0;
};

RunReport run_solve(const RunConfig& config, double t);
RunReport run_sweep(const RunConfig& config, const std::vector<double>& t_grid);
RunReport run_branch(const RunConfig& config, double t_start, double step,
                     double t_stop);
RunReport run_bracket(const RunConfig& config, double t_lo, double t_hi,
                      double tol);
RunReport run_index(const RunConfig& config, double t);
RunReport run_check(const RunConfig& config);
RunReport run_mms(const RunConfig& config);

/// Writes solutions.tsv / sweep.tsv / branch.tsv / summary.kv / plot.gp (as
/// applicable) plus mesh.txt, into out_dir (created if missing).
void write_outputs(const RunReport& report, const RunConfig& config,
                   const std::string& out_dir);

/// L2 error of the discrete solve against the manufactured solution
/// cos(pi x) for one mesh resolution (integer interval endpoints required).
double mms_l2_error(const RunConfig& config, int n_cells);

} // namespace aplab
