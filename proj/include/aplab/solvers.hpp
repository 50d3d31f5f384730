#pragma once

// Root finders for the discrete problem F(u;t) = 0: monotone iteration from
// the constant subsolution, damped (semismooth) Newton, deflated Newton for
// further solutions, and the enumerator combining them.

#include "aplab/problem.hpp"

#include <span>
#include <vector>

namespace aplab {

struct SolveOptions {
    double tol_residual = 1e-10;  // Euclidean norm of F
    int max_iters = 200;
    double damping = 0.5;         // backtracking factor, in (0, 1)
    double deflation_shift = 1.0;
    double deflation_power = 2.0;
    double divergence_ceiling = 1e8;  // sup-norm blow-up threshold
    int newton_starts = 9;            // constant starts in [c_sub, -c_sub]
    double dedup_tol = 1e-6;          // sup-norm identification threshold
    double distinct_tol = 1e-4;       // deflated solutions must differ by this

    void validate() const;
};

enum class SolveStatus {
    converged,
    diverged,            // monotone iterates exceeded the ceiling
    max_iterations,
    singular_jacobian,
    line_search_stalled,
    not_distinct,        // deflated solve fell back onto a known solution
};

const char* to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::max_iterations;
    std::optional<Solution> solution;  // set iff status == converged
    int iterations = 0;
    double final_residual = 0.0;
    double max_abs_iterate = 0.0;      // divergence evidence for bracketing

    bool converged() const { return status == SolveStatus::converged; }
};

/// Fixed-point iteration u <- S_t(u) from a subsolution. Iterates must be
/// componentwise nondecreasing (slack 1e-12); a decreasing step aborts with
/// std::runtime_error since it contradicts the monotonicity hypotheses.
/// Divergence (sup-norm above the ceiling) is an expected outcome consumed
/// by the solvability bracketing.
SolveResult monotone_iterate(const ProblemSpec& spec, const WeightedOperator& op,
                             double t, std::span<const double> start,
                             const SolveOptions& opts = {});
SolveResult monotone_iterate(const ProblemSpec& spec, const WeightedOperator& op,
                             double t, const SolveOptions& opts = {});

/// Damped Newton with backtracking line search on the residual norm.
SolveResult newton(const ProblemSpec& spec, const WeightedOperator& op, double t,
                   std::span<const double> u0, const SolveOptions& opts = {});

/// Newton on the deflated residual F(u) * prod_k (shift + ||u - u_k||^-p);
/// converged solutions satisfy the undeflated tolerance and differ from
/// every known solution by at least distinct_tol in sup norm.
SolveResult deflated_newton(const ProblemSpec& spec, const WeightedOperator& op,
                            double t, std::span<const double> u0,
                            const std::vector<Solution>& known,
                            const SolveOptions& opts = {});

/// Enumerates solutions at fixed t: monotone iteration, Newton from a grid
/// of constant starts, then deflation passes. Deduplicates (sup norm below
/// dedup_tol), sorts by measure-weighted mean, and attaches local indices
/// and compatibility defects. An empty list is a valid outcome.
std::vector<Solution> find_all_solutions(const ProblemSpec& spec,
                                         const WeightedOperator& op, double t,
                                         const SolveOptions& opts = {});

} // namespace aplab
