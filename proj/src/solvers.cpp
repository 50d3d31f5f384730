#include "aplab/solvers.hpp"

#include "aplab/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aplab {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Solution make_solution(const ProblemSpec& spec, std::vector<double> u, double t,
                       double residual_norm, SolveMethod method, int iterations) {
    Solution s;
    s.u = std::move(u);
    s.t = t;
    s.residual_norm = residual_norm;
    s.compatibility_defect = compatibility_defect(spec, s.u, t);
    s.method = method;
    s.iterations = iterations;
    return s;
}

// Extra full Newton steps while the residual strictly improves. Regular
// roots hit the rounding floor after a step or two; degenerate roots (folds)
// keep halving the error, which lets nearly-identical fold solutions from
// different starts collapse under the deduplication threshold.
void polish(const ProblemSpec& spec, const WeightedOperator& op, double t,
            std::vector<double>& u, std::vector<double>& f, double& rnorm) {
    for (int k = 0; k < 20; ++k) {
        Tridiag j = jacobian(spec, op, u, t);
        TridiagLU lu(j);
        if (lu.singular()) return;
        std::vector<double> rhs(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
        std::vector<double> s = lu.solve(rhs);
        std::vector<double> trial(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + s[i];
        std::vector<double> ft = residual(spec, op, trial, t);
        double rt = 0.0;
        for (double x : ft) rt += x * x;
        rt = std::sqrt(rt);
        if (!(rt < rnorm)) return;
        u = std::move(trial);
        f = std::move(ft);
        rnorm = rt;
    }
}

} // namespace

void SolveOptions::validate() const {
    if (!(tol_residual > 0.0))
        throw std::invalid_argument("SolveOptions: tol_residual must be positive");
    if (!(damping > 0.0 && damping < 1.0))
        throw std::invalid_argument("SolveOptions: damping must lie in (0, 1)");
    if (max_iters < 1)
        throw std::invalid_argument("SolveOptions: max_iters must be >= 1");
    if (newton_starts < 1)
        throw std::invalid_argument("SolveOptions: newton_starts must be >= 1");
}

const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::singular_jacobian: return "singular_jacobian";
    case SolveStatus::line_search_stalled: return "line_search_stalled";
    case SolveStatus::not_distinct: return "not_distinct";
    }
    return "?";
}

SolveResult monotone_iterate(const ProblemSpec& spec, const WeightedOperator& op,
                             double t, std::span<const double> start,
                             const SolveOptions& opts) {
    opts.validate();
    SolveResult res;
    std::vector<double> u(start.begin(), start.end());

    for (int it = 1; it <= opts.max_iters; ++it) {
        std::vector<double> next = apply_S(spec, op, u, t);

        double min_step = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            min_step = std::min(min_step, next[i] - u[i]);
        if (min_step < -1e-12)
            throw std::runtime_error(
                "monotone_iterate: decreasing iterate; monotonicity hypotheses violated "
                "(step " + std::to_string(min_step) + ")");

        u = std::move(next);
        res.iterations = it;
        res.max_abs_iterate = std::max(res.max_abs_iterate, max_norm(u));

        if (max_norm(u) > opts.divergence_ceiling) {
            res.status = SolveStatus::diverged;
            return res;
        }
        const double rnorm = norm2(residual(spec, op, u, t));
        res.final_residual = rnorm;
        if (rnorm <= opts.tol_residual) {
            res.status = SolveStatus::converged;
            res.solution = make_solution(spec, std::move(u), t, rnorm,
                                         SolveMethod::monotone, it);
            return res;
        }
    }
    res.status = SolveStatus::max_iterations;
    return res;
}

SolveResult monotone_iterate(const ProblemSpec& spec, const WeightedOperator& op,
                             double t, const SolveOptions& opts) {
    const double c = constant_subsolution(spec, t);
    return monotone_iterate(spec, op, t,
                            constant_vector(spec.n_nodes(), c), opts);
}

SolveResult newton(const ProblemSpec& spec, const WeightedOperator& op, double t,
                   std::span<const double> u0, const SolveOptions& opts) {
    opts.validate();
    SolveResult res;
    std::vector<double> u(u0.begin(), u0.end());
    std::vector<double> f = residual(spec, op, u, t);
    double rnorm = norm2(f);

    for (int it = 0; it <= opts.max_iters; ++it) {
        res.iterations = it;
        res.final_residual = rnorm;
        res.max_abs_iterate = std::max(res.max_abs_iterate, max_norm(u));
        if (rnorm <= opts.tol_residual) {
            polish(spec, op, t, u, f, rnorm);
            res.final_residual = rnorm;
            res.status = SolveStatus::converged;
            res.solution =
                make_solution(spec, std::move(u), t, rnorm, SolveMethod::newton, it);
            return res;
        }
        if (it == opts.max_iters) break;

        TridiagLU lu(jacobian(spec, op, u, t));
        if (lu.singular()) {
            res.status = SolveStatus::singular_jacobian;
            return res;
        }
        std::vector<double> step(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) step[i] = -f[i];
        std::vector<double> s = lu.solve(step);

        // Backtracking on the residual norm.
        double lambda = 1.0;
        std::vector<double> trial(u.size());
        while (true) {
            for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + lambda * s[i];
            std::vector<double> ft = residual(spec, op, trial, t);
            const double rt = norm2(ft);
            if (rt <= (1.0 - 1e-4 * lambda) * rnorm) {
                u = trial;
                f = std::move(ft);
                rnorm = rt;
                break;
            }
            lambda *= opts.damping;
            if (lambda < 1e-12) {
                res.status = SolveStatus::line_search_stalled;
                res.final_residual = rnorm;
                return res;
            }
        }
    }
    res.status = SolveStatus::max_iterations;
    return res;
}

namespace {

// Deflation multiplier m(u) = prod_k (shift + d_k^-p) in the mass-weighted
// L2 distance, and its gradient. Infinite when u coincides with a known
// solution; callers start elsewhere.
struct Deflation {
    const WeightedOperator& op;
    const std::vector<Solution>& known;
    double shift, power;

    double value(std::span<const double> u) const {
        double m = 1.0;
        for (const auto& k : known) {
            const double d = distance(u, k.u);
            m *= shift + std::pow(d, -power);
        }
        return m;
    }

    // grad m = sum_k m / (shift + d_k^-p) * (-p d_k^{-p-2}) M (u - u_k)
    std::vector<double> gradient(std::span<const double> u, double m) const {
        std::vector<double> g(u.size(), 0.0);
        auto md = op.m_diag();
        for (const auto& k : known) {
            const double d = distance(u, k.u);
            const double factor =
                m / (shift + std::pow(d, -power)) * (-power * std::pow(d, -power - 2.0));
            for (std::size_t i = 0; i < u.size(); ++i)
                g[i] += factor * md[i] * (u[i] - k.u[i]);
        }
        return g;
    }

    double distance(std::span<const double> u, std::span<const double> v) const {
        double s = 0.0;
        auto md = op.m_diag();
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double d = u[i] - v[i];
            s += md[i] * d * d;
        }
        return std::sqrt(s);
    }
};

} // namespace

SolveResult deflated_newton(const ProblemSpec& spec, const WeightedOperator& op,
                            double t, std::span<const double> u0,
                            const std::vector<Solution>& known,
                            const SolveOptions& opts) {
    opts.validate();
    if (known.empty())
        throw std::invalid_argument("deflated_newton: known solutions list is empty");
    Deflation defl{op, known, opts.deflation_shift, opts.deflation_power};

    SolveResult res;
    std::vector<double> u(u0.begin(), u0.end());

    auto deflated_norm = [&](std::span<const double> uu,
                             std::span<const double> f) {
        return defl.value(uu) * norm2(f);
    };

    std::vector<double> f = residual(spec, op, u, t);
    double gnorm = deflated_norm(u, f);

    for (int it = 0; it <= opts.max_iters; ++it) {
        res.iterations = it;
        double rnorm = norm2(f);
        res.final_residual = rnorm;
        res.max_abs_iterate = std::max(res.max_abs_iterate, max_norm(u));
        if (rnorm <= opts.tol_residual) {
            polish(spec, op, t, u, f, rnorm);
            double dmin = std::numeric_limits<double>::infinity();
            for (const auto& k : known) dmin = std::min(dmin, sup_distance(u, k.u));
            if (dmin < opts.distinct_tol) {
                res.status = SolveStatus::not_distinct;
                return res;
            }
            res.status = SolveStatus::converged;
            res.solution = make_solution(spec, std::move(u), t, rnorm,
                                         SolveMethod::deflation, it);
            return res;
        }
        if (it == opts.max_iters) break;

        TridiagLU lu(jacobian(spec, op, u, t));
        if (lu.singular()) {
            res.status = SolveStatus::singular_jacobian;
            return res;
        }
        std::vector<double> rhs(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
        std::vector<double> s0 = lu.solve(rhs); // undeflated Newton step

        // Sherman-Morrison: the deflated Newton step is the undeflated one
        // scaled by m / (m - grad m . s0). The factor turns negative when
        // the plain step points into a deflated solution; that reversal is
        // what steers the iteration away from known roots.
        const double m = defl.value(u);
        if (!std::isfinite(m)) {
            res.status = SolveStatus::not_distinct;
            return res;
        }
        std::vector<double> g = defl.gradient(u, m);
        double gs = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) gs += g[i] * s0[i];
        const double denom = m - gs;
        double beta;
        if (std::abs(denom) > 1e-12 * std::max(1.0, std::abs(m)))
            beta = m / denom;
        else
            beta = denom >= 0.0 ? 1e3 : -1e3;
        beta = std::clamp(beta, -1e3, 1e3);

        double lambda = 1.0;
        std::vector<double> trial(u.size());
        while (true) {
            for (std::size_t i = 0; i < u.size(); ++i)
                trial[i] = u[i] + lambda * beta * s0[i];
            std::vector<double> ft = residual(spec, op, trial, t);
            const double gt = deflated_norm(trial, ft);
            if (gt <= (1.0 - 1e-4 * lambda) * gnorm) {
                u = trial;
                f = std::move(ft);
                gnorm = gt;
                break;
            }
            lambda *= opts.damping;
            if (lambda < 1e-12) {
                res.status = SolveStatus::line_search_stalled;
                return res;
            }
        }
    }
    res.status = SolveStatus::max_iterations;
    return res;
}

std::vector<Solution> find_all_solutions(const ProblemSpec& spec,
                                         const WeightedOperator& op, double t,
                                         const SolveOptions& opts) {
    opts.validate();
    std::vector<Solution> found;

    auto add_if_new = [&](Solution&& s) {
        for (const auto& k : found)
            if (sup_distance(s.u, k.u) < opts.dedup_tol) return false;
        found.push_back(std::move(s));
        return true;
    };

    SolveResult mono = monotone_iterate(spec, op, t, opts);
    if (mono.converged()) add_if_new(std::move(*mono.solution));

    const double c_sub = constant_subsolution(spec, t);
    std::vector<double> starts;
    if (opts.newton_starts == 1) {
        starts.push_back(c_sub);
    } else {
        for (int i = 0; i < opts.newton_starts; ++i)
            starts.push_back(c_sub + (-2.0 * c_sub) * i / (opts.newton_starts - 1));
    }

    for (double c : starts) {
        SolveResult r = newton(spec, op, t, constant_vector(spec.n_nodes(), c), opts);
        if (r.converged()) add_if_new(std::move(*r.solution));
    }

    // Deflation passes: restart near every found solution (shifted off it
    // along the constant direction and along the softest nonconstant mode)
    // and from the constant grid, deflating everything known so far. The
    // eigenmode offsets make symmetry-broken solutions reachable
    // deterministically instead of by rounding accidents.
    std::vector<double> soft_mode;
    if (!found.empty()) soft_mode = smallest_nonzero_eigenpair(op).second;
    for (int round = 0; round < 3; ++round) {
        if (found.empty()) break;
        bool grew = false;
        std::vector<std::vector<double>> defl_starts;
        for (const auto& s : found) {
            const double off = 0.5 * (1.0 + max_norm(s.u));
            const double scale = 0.01 + max_norm(s.u);
            for (double sign : {+1.0, -1.0}) {
                std::vector<double> shifted = s.u;
                for (auto& x : shifted) x += sign * off;
                defl_starts.push_back(std::move(shifted));
                for (double rel : {0.5, 1.5}) {
                    std::vector<double> tilted = s.u;
                    for (std::size_t i = 0; i < tilted.size(); ++i)
                        tilted[i] += sign * rel * scale * soft_mode[i];
                    defl_starts.push_back(std::move(tilted));
                }
            }
        }
        for (double c : starts) defl_starts.push_back(constant_vector(spec.n_nodes(), c));

        for (const auto& s0 : defl_starts) {
            SolveResult r = deflated_newton(spec, op, t, s0, found, opts);
            if (r.converged() && add_if_new(std::move(*r.solution))) grew = true;
        }
        if (!grew) break;
    }

    const std::vector<double> masses = lumped_masses(spec.mesh);
    const double measure = op.domain_measure();
    auto mean = [&](const Solution& s) {
        double v = 0.0;
        for (std::size_t i = 0; i < masses.size(); ++i) v += masses[i] * s.u[i];
        return v / measure;
    };
    std::sort(found.begin(), found.end(),
              [&](const Solution& a, const Solution& b) { return mean(a) < mean(b); });

    for (auto& s : found) s.index = local_index(spec, op, s.u, t);
    return found;
}

} // namespace aplab
