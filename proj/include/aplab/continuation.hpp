#pragma once

// Branch tracing in (t, u) by pseudo-arclength continuation, fold detection
// and refinement, solvability bracketing for the threshold t*, local
// fixed-point indices from determinant signs, and the degree bookkeeping
// over the regions G and B(0,R).

#include "aplab/solvers.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aplab {

struct BranchPoint {
    double t = 0.0;
    std::vector<double> u;
    double arclength = 0.0;
    int index = 0;          // local fixed-point index (-1, 0, +1)
    double tangent_dt = 0.0; // dt/ds component of the unit tangent
};

struct FoldPoint {
    double t = 0.0;
    std::vector<double> u;
};

struct Branch {
    std::vector<BranchPoint> points;
    std::optional<FoldPoint> fold;
    bool stalled = false;
    std::string stall_reason;
};

/// Caps defining G = {v : max v^+ < rho_plus, max v^- < rho_minus} and the
/// enclosing sup-norm ball B(0, R).
struct RegionSpec {
    double rho_plus = 0.5;
    double rho_minus = 2.0;
    double R = 10.0;

    void validate() const;
    bool in_G(std::span<const double> u) const;
    bool in_ball(std::span<const double> u) const;
};

/// Pseudo-arclength predictor-corrector from a converged solution at
/// t_start toward t_stop. The step is halved on corrector failure, doubled
/// after four clean steps, and capped at the initial value; a step below
/// 1e-10 of the initial one stalls the trace (reported on the Branch).
/// Fold detection runs automatically on the traced branch.
Branch trace_branch(const ProblemSpec& spec, const WeightedOperator& op,
                    double t_start, const Solution& u_start, double step,
                    double t_stop, const SolveOptions& opts = {});

/// Locates a sign change of dt/ds along the branch and refines it by
/// bisection on arclength until the t-gap of the bracket is below 1e-8.
/// Returns nothing when the tangent never turns in the traced range.
std::optional<FoldPoint> detect_fold(const ProblemSpec& spec,
                                     const WeightedOperator& op,
                                     const Branch& branch,
                                     const SolveOptions& opts = {});

/// Bisection on the solvability predicate (find_all_solutions nonempty).
/// Requires a solvable t_lo and an unsolvable t_hi; returns an enclosing
/// interval of width <= tol. Throws std::invalid_argument when the
/// precondition fails (in particular when t_hi is solvable).
std::pair<double, double> bracket_t_star(const ProblemSpec& spec,
                                         const WeightedOperator& op,
                                         double t_lo, double t_hi, double tol,
                                         const SolveOptions& opts = {});

/// Local fixed-point index of a converged solution: the sign of
/// det(K - M diag(f'(u))). Returns 0 (degenerate) when the factorization is
/// numerically singular or when the two one-sided slope conventions at
/// kinks of f disagree on the sign.
int local_index(const ProblemSpec& spec, const WeightedOperator& op,
                std::span<const double> u, double t);

struct DegreeRow {
    std::size_t solution = 0; // position in the supplied list
    bool in_G = false;
    bool in_ball = false;
    int index = 0;
};

struct DegreeReport {
    std::vector<DegreeRow> rows;
    int deg_G = 0;
    int deg_ball = 0;
    int deg_ball_minus_G = 0;
    std::string caveat;
};

/// Index sums over G, B(0,R) and B \ G for the supplied solutions. Refuses
/// (std::runtime_error) when any solution carries a degenerate index. The
/// report always carries the exhaustiveness caveat: the sums equal the
/// topological degree only if the list contains every solution in the
/// region.
DegreeReport degree_over_region(const ProblemSpec& spec,
                                const WeightedOperator& op,
                                const RegionSpec& region, double t,
                                const std::vector<Solution>& solutions);

struct BoundaryMarginReport {
    double min_margin = 0.0;       // min over all samples of max|v - s S_t(v)|
    double min_margin_plus = 0.0;  // piece with max v^+ pinned to rho_plus
    double min_margin_minus = 0.0; // piece with max v^- pinned to rho_minus
    int s_samples = 0;
    int v_samples = 0;             // per boundary piece
    std::uint64_t seed = 0;
};

/// Sampled check of the homotopy a priori estimates: v != s S_t(v) on the
/// two boundary pieces of G. Draws v_samples random profiles per piece and
/// s on a uniform grid in [0,1]; a strictly positive minimum margin is
/// consistency evidence, not a proof, and a zero margin is reported rather
/// than thrown.
BoundaryMarginReport verify_homotopy_boundary(const ProblemSpec& spec,
                                              const WeightedOperator& op,
                                              double t, const RegionSpec& region,
                                              int s_samples, int v_samples,
                                              std::uint64_t seed);

} // namespace aplab
