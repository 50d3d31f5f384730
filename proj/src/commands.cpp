#include "aplab/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace aplab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt(int v) { return std::to_string(v); }

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::size_t probe_node(const Mesh& mesh, double probe_x) {
    std::size_t best = 0;
    double dist = std::abs(mesh.nodes[0] - probe_x);
    for (std::size_t i = 1; i < mesh.nodes.size(); ++i) {
        const double d = std::abs(mesh.nodes[i] - probe_x);
        if (d < dist) {
            dist = d;
            best = i;
        }
    }
    return best;
}

SolutionRow make_row(const Solution& s, std::size_t probe) {
    SolutionRow row;
    row.t = s.t;
    row.u_min = *std::min_element(s.u.begin(), s.u.end());
    row.u_max = *std::max_element(s.u.begin(), s.u.end());
    row.u_probe = s.u[probe];
    row.residual_norm = s.residual_norm;
    row.defect = s.compatibility_defect;
    row.index = s.index.value_or(0);
    row.method = to_string(s.method);
    return row;
}

void add(RunReport& rep, const std::string& key, const std::string& value) {
    rep.summary.emplace_back(key, value);
}

void add_config_echo(RunReport& rep, const RunConfig& config) {
    for (const auto& [k, v] : config.echo()) add(rep, "config." + k, v);
}

void fill_solutions(RunReport& rep, const RunConfig& config, const BuiltProblem& bp,
                    std::vector<Solution> sols) {
    const std::size_t probe = probe_node(bp.mesh, config.probe_x);
    for (const auto& s : sols) {
        rep.solution_rows.push_back(make_row(s, probe));
        if (std::abs(s.compatibility_defect) > 1e-8) {
            rep.ok = false;
            add(rep, "warning",
                "solution violates the compatibility identity: defect = " +
                    fmt(s.compatibility_defect));
        }
    }
    rep.solutions = std::move(sols);
}

// Roots of f(c) = y for the built-in nonlinearities (the exact constant
// solutions under constant forcing). Empty optional when no closed form.
std::optional<std::vector<double>> constant_roots(const Nonlinearity& f, double y) {
    std::vector<double> roots;
    switch (f.kind()) {
    case Nonlinearity::Kind::piecewise_linear: {
        // f(c) = a c for c >= 0, -b c for c < 0; a = slope(1), b = -slope(-1).
        const double a = f.slope(1.0);
        const double b = -f.slope(-1.0);
        if (y > 0.0) {
            roots = {-y / b, y / a};
        } else if (y == 0.0) {
            roots = {0.0};
        }
        return roots;
    }
    case Nonlinearity::Kind::smooth_abs: {
        if (y > 0.0) {
            const double c = std::sqrt((1.0 + y) * (1.0 + y) - 1.0);
            roots = {-c, c};
        } else if (y == 0.0) {
            roots = {0.0};
        }
        return roots;
    }
    case Nonlinearity::Kind::table:
        return std::nullopt;
    }
    return std::nullopt;
}

bool constant_forcing(const ProblemSpec& spec, double& phi0, double& h0) {
    phi0 = spec.phi[0];
    h0 = spec.h[0];
    for (double p : spec.phi)
        if (p != phi0) return false;
    for (double v : spec.h)
        if (v != h0) return false;
    return true;
}

SweepRow sweep_one(const BuiltProblem& bp, const RunConfig& config, double t) {
    SweepRow row;
    row.t = t;
    try {
        const auto sols = find_all_solutions(bp.spec, bp.op, t, config.solve);
        row.count = static_cast<int>(sols.size());
        std::ostringstream idx;
        for (std::size_t i = 0; i < sols.size(); ++i) {
            row.max_abs_u = std::max(row.max_abs_u, max_norm(sols[i].u));
            if (i) idx << ',';
            idx << sols[i].index.value_or(0);
        }
        row.indices = idx.str();
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

} // namespace

RunReport run_solve(const RunConfig& config, double t) {
    Timer timer;
    BuiltProblem bp = build_problem(config);
    RunReport rep;
    rep.command = "solve";
    add(rep, "command", "solve");
    add_config_echo(rep, config);
    add(rep, "run.t", fmt(t));

    const double bound = necessary_upper_bound(bp.spec);
    add(rep, "bound.necessary_upper", fmt(bound));

    fill_solutions(rep, config, bp, find_all_solutions(bp.spec, bp.op, t, config.solve));
    add(rep, "solutions.count", fmt(static_cast<int>(rep.solutions.size())));
    if (!rep.solutions.empty() && t > bound + 1e-12) {
        rep.ok = false;
        add(rep, "warning", "solutions found above the necessary upper bound");
    }
    double umax = 0.0;
    for (const auto& s : rep.solutions) umax = std::max(umax, max_norm(s.u));
    add(rep, "umax.overall", fmt(umax));

    rep.elapsed_seconds = timer.seconds();
    add(rep, "time.total_s", fmt(rep.elapsed_seconds));
    return rep;
}

RunReport run_sweep(const RunConfig& config, const std::vector<double>& t_grid) {
    if (t_grid.empty())
        throw ConfigError("sweep: t grid is empty", "run.t_grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i - 1] < t_grid[i]))
            throw ConfigError("sweep: t grid must be strictly increasing", "run.t_grid");

    Timer timer;
    BuiltProblem bp = build_problem(config);
    RunReport rep;
    rep.command = "sweep";
    add(rep, "command", "sweep");
    add_config_echo(rep, config);

    // Warm the shift factorization so parallel workers only read the cache.
    bp.op.shifted_factorization(bp.spec.f.constants().c_f);

    rep.sweep.resize(t_grid.size());
    const int jobs = std::max(1, config.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < t_grid.size(); ++i)
            rep.sweep[i] = sweep_one(bp, config, t_grid[i]);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= t_grid.size()) break;
                rep.sweep[i] = sweep_one(bp, config, t_grid[i]);
            }
        };
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Grid estimates of the two thresholds: the largest t still carrying two
    // solutions, and the largest t carrying any.
    double t_two = std::numeric_limits<double>::quiet_NaN();
    double t_any = std::numeric_limits<double>::quiet_NaN();
    double umax = 0.0;
    for (const auto& row : rep.sweep) {
        if (row.count >= 2 && !(t_two >= row.t)) t_two = row.t;
        if (row.count >= 1 && !(t_any >= row.t)) t_any = row.t;
        umax = std::max(umax, row.max_abs_u);
    }
    add(rep, "sweep.n_points", fmt(static_cast<int>(rep.sweep.size())));
    add(rep, "tstar_lower.grid_estimate", fmt(t_two));
    add(rep, "tstar.grid_estimate", fmt(t_any));
    add(rep, "tstar.gap_estimate", fmt(t_any - t_two));
    add(rep, "bound.necessary_upper", fmt(necessary_upper_bound(bp.spec)));
    add(rep, "umax.overall", fmt(umax));

    rep.elapsed_seconds = timer.seconds();
    add(rep, "time.total_s", fmt(rep.elapsed_seconds));
    return rep;
}

RunReport run_branch(const RunConfig& config, double t_start, double step,
                     double t_stop) {
    Timer timer;
    BuiltProblem bp = build_problem(config);
    RunReport rep;
    rep.command = "branch";
    add(rep, "command", "branch");
    add_config_echo(rep, config);
    add(rep, "branch.t_start", fmt(t_start));
    add(rep, "branch.step", fmt(step));
    add(rep, "branch.t_stop", fmt(t_stop));

    const auto sols = find_all_solutions(bp.spec, bp.op, t_start, config.solve);
    if (sols.empty())
        throw std::runtime_error("branch: no solution found at t_start");
    const Branch branch =
        trace_branch(bp.spec, bp.op, t_start, sols.front(), step, t_stop, config.solve);

    const std::vector<double> masses = lumped_masses(bp.mesh);
    const double measure = bp.op.domain_measure();
    for (const auto& p : branch.points) {
        BranchRow row;
        row.arclength = p.arclength;
        row.t = p.t;
        double mean = 0.0;
        for (std::size_t i = 0; i < masses.size(); ++i) mean += masses[i] * p.u[i];
        row.u_mean = mean / measure;
        row.u_min = *std::min_element(p.u.begin(), p.u.end());
        row.u_max = *std::max_element(p.u.begin(), p.u.end());
        row.index = p.index;
        row.tangent_dt = p.tangent_dt;
        rep.branch_rows.push_back(row);
    }

    add(rep, "branch.n_points", fmt(static_cast<int>(branch.points.size())));
    if (branch.fold) {
        add(rep, "tstar.fold", fmt(branch.fold->t));
        double mean = 0.0;
        for (std::size_t i = 0; i < masses.size(); ++i)
            mean += masses[i] * branch.fold->u[i];
        add(rep, "fold.u_mean", fmt(mean / measure));
    } else {
        add(rep, "tstar.fold", "absent");
    }
    if (branch.stalled) {
        add(rep, "branch.stalled", branch.stall_reason);
        rep.ok = false;
    }

    rep.elapsed_seconds = timer.seconds();
    add(rep, "time.total_s", fmt(rep.elapsed_seconds));
    return rep;
}

RunReport run_bracket(const RunConfig& config, double t_lo, double t_hi, double tol) {
    Timer timer;
    BuiltProblem bp = build_problem(config);
    RunReport rep;
    rep.command = "bracket";
    add(rep, "command", "bracket");
    add_config_echo(rep, config);

    const auto [lo, hi] = bracket_t_star(bp.spec, bp.op, t_lo, t_hi, tol, config.solve);
    add(rep, "bracket.lo", fmt(lo));
    add(rep, "bracket.hi", fmt(hi));
    add(rep, "bracket.width", fmt(hi - lo));
    add(rep, "tstar.bracket_midpoint", fmt(0.5 * (lo + hi)));
    add(rep, "bound.necessary_upper", fmt(necessary_upper_bound(bp.spec)));

    rep.elapsed_seconds = timer.seconds();
    add(rep, "time.total_s", fmt(rep.elapsed_seconds));
    return rep;
}

RunReport run_index(const RunConfig& config, double t) {
    Timer timer;
    BuiltProblem bp = build_problem(config);
    RunReport rep;
    rep.command = "index";
    add(rep, "command", "index");
    add_config_echo(rep, config);
    add(rep, "run.t", fmt(t));

    fill_solutions(rep, config, bp, find_all_solutions(bp.spec, bp.op, t, config.solve));
    add(rep, "solutions.count", fmt(static_cast<int>(rep.solutions.size())));

    const double mu1 = smallest_nonzero_eigenvalue(bp.op);
    add(rep, "spectral.mu1", fmt(mu1));

    const DegreeReport deg =
        degree_over_region(bp.spec, bp.op, config.region, t, rep.solutions);
    add(rep, "degree.G", fmt(deg.deg_G));
    add(rep, "degree.ball", fmt(deg.deg_ball));
    add(rep, "degree.ball_minus_G", fmt(deg.deg_ball_minus_G));
    add(rep, "degree.caveat", deg.caveat);
    for (const auto& row : deg.rows) {
        const std::string prefix = "degree.solution." + std::to_string(row.solution);
        add(rep, prefix + ".index", fmt(row.index));
        add(rep, prefix + ".in_G", row.in_G ? "true" : "false");
        add(rep, prefix + ".in_ball", row.in_ball ? "true" : "false");
    }

    rep.elapsed_seconds = timer.seconds();
    add(rep, "time.total_s", fmt(rep.elapsed_seconds));
    return rep;
}

double mms_l2_error(const RunConfig& config, int n_cells) {
    const double xl = config.mesh_left, xr = config.mesh_right;
    if (std::abs(xl - std::round(xl)) > 1e-12 || std::abs(xr - std::round(xr)) > 1e-12)
        throw ConfigError(
            "mms: interval endpoints must be integers so that cos(pi x) satisfies "
            "the natural boundary conditions",
            "mesh");
    const Mesh mesh =
        build_mesh(xl, xr, n_cells, config.grading, config.radial_dimension);
    const WeightedOperator op = assemble(mesh, config.alpha);

    const double alpha = config.alpha;
    const double nd = config.radial_dimension;
    const double shift = 1.0;
    // u(x) = cos(pi x); rhs = -div(|x|^a grad u) + u
    //      = (a + N - 1) pi |x|^{a-1} sgn(x) sin(pi x) + pi^2 |x|^a cos(pi x) + u.
    auto weight_pow = [&](double x, double p) {
        if (x == 0.0) return p == 0.0 ? 1.0 : 0.0;
        return std::pow(std::abs(x), p);
    };
    std::vector<double> rhs(mesh.n_nodes());
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        const double x = mesh.nodes[i];
        const double sgn = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
        const double flux_term = (alpha + nd - 1.0) * kPi *
                                 weight_pow(x, alpha - 1.0) * sgn * std::sin(kPi * x);
        rhs[i] = flux_term + kPi * kPi * weight_pow(x, alpha) * std::cos(kPi * x) +
                 shift * std::cos(kPi * x);
    }
    const LinearSolveReport solve = solve_shifted(op, shift, rhs);

    double err2 = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        const double e = solve.w[i] - std::cos(kPi * mesh.nodes[i]);
        err2 += op.m_diag()[i] * e * e;
    }
    return std::sqrt(err2);
}

RunReport run_mms(const RunConfig& config) {
    Timer timer;
    RunReport rep;
    rep.command = "mms";
    add(rep, "command", "mms");
    add_config_echo(rep, config);

    const auto& ns = config.mms_refinements;
    if (ns.size() < 2)
        throw ConfigError("mms: need at least two refinements", "mms.refinements");

    std::vector<double> errors;
    for (int n : ns) {
        const double err = mms_l2_error(config, n);
        errors.push_back(err);
        add(rep, "mms.n" + std::to_string(n) + ".l2_error", fmt(err));
    }

    // Least-squares slope of log(error) against log(1/n).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double x = -std::log(static_cast<double>(ns[i]));
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = ns.size();
    const double rate = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    add(rep, "mms.rate", fmt(rate));
    const double required = config.alpha == 0.0 ? 1.9 : 1.5;
    add(rep, "mms.rate_required", fmt(required));
    if (rate < required) rep.ok = false;

    if (config.alpha == 0.0) {
        const Mesh mesh = build_mesh(config.mesh_left, config.mesh_right, ns.back(),
                                     config.grading, config.radial_dimension);
        const WeightedOperator op = assemble(mesh, 0.0);
        const double mu1 = smallest_nonzero_eigenvalue(op);
        const double length = config.mesh_right - config.mesh_left;
        const double exact = kPi * kPi / (length * length);
        add(rep, "mms.mu1", fmt(mu1));
        add(rep, "mms.mu1_exact", fmt(exact));
        add(rep, "mms.mu1_rel_error", fmt(std::abs(mu1 - exact) / exact));
        if (std::abs(mu1 - exact) > 1e-3 * exact) rep.ok = false;
    }

    rep.elapsed_seconds = timer.seconds();
    add(rep, "time.total_s", fmt(rep.elapsed_seconds));
    return rep;
}

RunReport run_check(const RunConfig& config) {
    Timer timer;
    BuiltProblem bp = build_problem(config);
    RunReport rep;
    rep.command = "check";
    add(rep, "command", "check");
    add_config_echo(rep, config);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = bp.op.size();
    const double cf = bp.spec.f.constants().c_f;

    auto push = [&](const std::string& name, bool pass, const std::string& measured,
                    bool hard = true) {
        rep.checks.push_back({name, pass, hard, measured});
        if (hard && !pass) rep.ok = false;
    };

    {
        const CertificationReport cert = bp.spec.f.certify(config.u_check);
        std::ostringstream os;
        os << "slacks: growth " << cert.worst_growth_slack << ", lower "
           << cert.worst_lower_slack << ", one-sided " << cert.worst_one_sided_slack;
        push("hypothesis.certification", cert.passed, os.str());
    }

    {
        // T positivity on 1000 random nonnegative inputs.
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            std::vector<double> v(n);
            const double scale = std::pow(10.0, -2.0 + 4.0 * unif(rng));
            for (auto& x : v) x = scale * unif(rng);
            const auto w = solve_shifted(bp.op, cf, v).w;
            worst = std::min(worst, *std::min_element(w.begin(), w.end()));
        }
        push("operator.positivity", worst >= -1e-12, "min component " + fmt(worst));
    }

    {
        // Comparison monotonicity on 1000 ordered pairs.
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            std::vector<double> v1(n), v2(n);
            for (std::size_t i = 0; i < n; ++i) {
                v1[i] = 2.0 * unif(rng) - 1.0;
                v2[i] = v1[i] + unif(rng);
            }
            const auto w1 = solve_shifted(bp.op, cf, v1).w;
            const auto w2 = solve_shifted(bp.op, cf, v2).w;
            for (std::size_t i = 0; i < n; ++i)
                worst = std::min(worst, w2[i] - w1[i]);
        }
        push("operator.comparison", worst >= -1e-12, "min gap " + fmt(worst));
    }

    {
        // Symmetry of K + cM in random directions.
        double worst = 0.0;
        std::vector<double> u(n), v(n), au(n), av(n);
        for (int k = 0; k < 200; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                u[i] = 2.0 * unif(rng) - 1.0;
                v[i] = 2.0 * unif(rng) - 1.0;
            }
            bp.op.apply_stiffness(u, au);
            bp.op.apply_stiffness(v, av);
            double uav = 0.0, vau = 0.0, nu = 0.0, nv = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                uav += u[i] * (av[i] + cf * bp.op.m_diag()[i] * v[i]);
                vau += v[i] * (au[i] + cf * bp.op.m_diag()[i] * u[i]);
                nu += u[i] * u[i];
                nv += v[i] * v[i];
            }
            worst = std::max(worst,
                             std::abs(uav - vau) / (std::sqrt(nu) * std::sqrt(nv)));
        }
        push("operator.symmetry", worst <= 1e-12, "max asymmetry " + fmt(worst));
    }

    {
        // Discrete divergence theorem: 1^T M (v - c w) = 1^T K w = 0.
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            std::vector<double> v(n);
            for (auto& x : v) x = 2.0 * unif(rng) - 1.0;
            const auto w = solve_shifted(bp.op, cf, v).w;
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += bp.op.m_diag()[i] * (v[i] - cf * w[i]);
            worst = std::max(worst, std::abs(s));
        }
        push("operator.solve_compatibility", worst <= 1e-10, "max |1'M(v-cw)| " + fmt(worst));
    }

    {
        // Constant identity: T maps kappa to kappa / c.
        const double kappa = 2.0 * unif(rng) - 1.0;
        const auto w = solve_shifted(bp.op, cf, constant_vector(n, kappa)).w;
        double worst = 0.0;
        for (double x : w) worst = std::max(worst, std::abs(x - kappa / cf));
        push("operator.constant_identity", worst <= 1e-12,
             "max deviation " + fmt(worst));
    }

    std::vector<Solution> sols =
        find_all_solutions(bp.spec, bp.op, config.t, config.solve);

    {
        double phi0, h0;
        if (constant_forcing(bp.spec, phi0, h0)) {
            const auto roots =
                constant_roots(bp.spec.f, -(config.t * phi0 + h0));
            if (roots) {
                bool match = roots->size() == sols.size();
                double worst = 0.0;
                if (match) {
                    std::vector<double> sorted = *roots;
                    std::sort(sorted.begin(), sorted.end());
                    for (std::size_t i = 0; i < sorted.size(); ++i) {
                        for (double x : sols[i].u)
                            worst = std::max(worst, std::abs(x - sorted[i]));
                    }
                    match = worst <= 1e-8;
                }
                push("oracle.constant_solutions", match,
                     "count " + fmt(static_cast<int>(sols.size())) + " expected " +
                         fmt(static_cast<int>(roots->size())) + ", max dev " +
                         fmt(worst));
            }
        }
    }

    {
        double worst_defect = 0.0, worst_fp = 0.0;
        for (const auto& s : sols) {
            worst_defect = std::max(worst_defect, std::abs(s.compatibility_defect));
            const auto su = apply_S(bp.spec, bp.op, s.u, s.t);
            double d = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                d = std::max(d, std::abs(su[i] - s.u[i]));
            worst_fp = std::max(worst_fp, d);
        }
        push("solutions.compatibility_defect", worst_defect <= 1e-8,
             "max |defect| " + fmt(worst_defect));
        push("solutions.fixed_point_consistency", worst_fp <= 1e-8,
             "max |S(u)-u| " + fmt(worst_fp));
    }

    {
        const double mu1 = smallest_nonzero_eigenvalue(bp.op);
        if (bp.spec.f.kind() == Nonlinearity::Kind::piecewise_linear) {
            const double a = bp.spec.f.slope(1.0);
            push("spectral.slope_below_mu1", a < mu1,
                 "a " + fmt(a) + " vs mu1 " + fmt(mu1));
        } else {
            push("spectral.mu1", mu1 > 0.0, "mu1 " + fmt(mu1), false);
        }
    }

    {
        bool applicable = sols.size() == 2;
        if (applicable) {
            try {
                const DegreeReport deg =
                    degree_over_region(bp.spec, bp.op, config.region, config.t, sols);
                std::ostringstream os;
                os << "G " << deg.deg_G << ", ball " << deg.deg_ball << ", ball\\G "
                   << deg.deg_ball_minus_G;
                push("degree.table",
                     deg.deg_G == 1 && deg.deg_ball == 0 && deg.deg_ball_minus_G == -1,
                     os.str());
            } catch (const std::exception& e) {
                push("degree.table", false, e.what());
            }
        } else {
            push("degree.table", true,
                 "skipped: needs exactly two solutions at run.t", false);
        }
    }

    {
        const BoundaryMarginReport margin = verify_homotopy_boundary(
            bp.spec, bp.op, config.t, config.region, 11, 200, config.seed);
        std::ostringstream os;
        os << "min margin " << margin.min_margin << " (v+ piece "
           << margin.min_margin_plus << ", v- piece " << margin.min_margin_minus
           << ")";
        push("boundary.margin_positive", margin.min_margin > 0.0, os.str());
    }

    {
        // Monotone limit is the minimal solution.
        const SolveResult mono = monotone_iterate(bp.spec, bp.op, config.t, config.solve);
        if (mono.converged() && !sols.empty()) {
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& s : sols)
                for (std::size_t i = 0; i < n; ++i)
                    worst = std::max(worst, mono.solution->u[i] - s.u[i]);
            push("monotone.minimal", worst <= 1e-8, "max excess " + fmt(worst));
        } else {
            push("monotone.minimal", sols.empty(),
                 mono.converged() ? "no solutions to compare"
                                  : std::string("monotone: ") + to_string(mono.status),
                 sols.empty());
        }
    }

    {
        RunConfig mms_config = config;
        mms_config.mms_refinements = {100, 200, 400};
        try {
            const RunReport mms = run_mms(mms_config);
            std::string rate = "?";
            for (const auto& [k, v] : mms.summary)
                if (k == "mms.rate") rate = v;
            push("mms.convergence", mms.ok, "rate " + rate);
        } catch (const ConfigError& e) {
            push("mms.convergence", true, std::string("skipped: ") + e.what(), false);
        }
    }

    add(rep, "checks.total", fmt(static_cast<int>(rep.checks.size())));
    int failed = 0;
    for (const auto& c : rep.checks)
        if (c.hard && !c.pass) ++failed;
    add(rep, "checks.failed", fmt(failed));
    for (const auto& c : rep.checks)
        add(rep, "check." + c.name, std::string(c.pass ? "pass" : "FAIL") + " [" +
                                        c.measured + "]");

    rep.elapsed_seconds = timer.seconds();
    add(rep, "time.total_s", fmt(rep.elapsed_seconds));
    return rep;
}

namespace {

void write_summary(const RunReport& rep, const std::string& path) {
    std::ofstream os(path);
    for (const auto& [k, v] : rep.summary) os << k << " = " << v << '\n';
}

void write_solutions_tsv(const RunReport& rep, const std::string& path) {
    std::ofstream os(path);
    os << "t\tu_min\tu_max\tu_probe\tresidual_norm\tdefect\tindex\tmethod\n";
    for (const auto& r : rep.solution_rows)
        os << fmt(r.t) << '\t' << fmt(r.u_min) << '\t' << fmt(r.u_max) << '\t'
           << fmt(r.u_probe) << '\t' << fmt(r.residual_norm) << '\t' << fmt(r.defect)
           << '\t' << r.index << '\t' << r.method << '\n';
}

void write_sweep_tsv(const RunReport& rep, const std::string& path) {
    std::ofstream os(path);
    os << "t\tcount\tumax\tindices\terror\n";
    for (const auto& r : rep.sweep)
        os << fmt(r.t) << '\t' << r.count << '\t' << fmt(r.max_abs_u) << '\t'
           << (r.indices.empty() ? "-" : r.indices) << '\t'
           << (r.error.empty() ? "-" : r.error) << '\n';
}

void write_branch_tsv(const RunReport& rep, const std::string& path) {
    std::ofstream os(path);
    os << "arclength\tt\tu_mean\tu_min\tu_max\tindex\ttangent_dt\n";
    for (const auto& r : rep.branch_rows)
        os << fmt(r.arclength) << '\t' << fmt(r.t) << '\t' << fmt(r.u_mean) << '\t'
           << fmt(r.u_min) << '\t' << fmt(r.u_max) << '\t' << r.index << '\t'
           << fmt(r.tangent_dt) << '\n';
}

void write_plot_script(const RunReport& rep, const std::string& path) {
    std::ofstream os(path);
    os << "# gnuplot script generated by aplab " << rep.command << "\n"
          "set terminal pngcairo size 900,600\n";
    if (rep.command == "branch") {
        os << "set output 'branch.png'\n"
              "set xlabel 't'\n"
              "set ylabel 'mean of u'\n"
              "plot 'branch.tsv' using 2:3 with lines lw 2 title 'solution branch'\n";
    } else if (rep.command == "sweep") {
        os << "set output 'sweep.png'\n"
              "set xlabel 't'\n"
              "set ylabel 'number of solutions'\n"
              "set yrange [-0.5:3.5]\n"
              "plot 'sweep.tsv' using 1:2 with steps lw 2 title 'solution count'\n";
    }
}

} // namespace

void write_outputs(const RunReport& rep, const RunConfig& config,
                   const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    write_summary(rep, (dir / "summary.kv").string());
    if (!rep.solution_rows.empty())
        write_solutions_tsv(rep, (dir / "solutions.tsv").string());
    if (!rep.sweep.empty()) write_sweep_tsv(rep, (dir / "sweep.tsv").string());
    if (!rep.branch_rows.empty())
        write_branch_tsv(rep, (dir / "branch.tsv").string());
    if (rep.command == "branch" || rep.command == "sweep")
        write_plot_script(rep, (dir / "plot.gp").string());

    const Mesh mesh = build_mesh(config.mesh_left, config.mesh_right, config.n_cells,
                                 config.grading, config.radial_dimension);
    {
        std::ofstream os((dir / "mesh.txt").string());
        write_mesh_table(mesh, os);
    }
    if (config.dump_matrices) {
        const WeightedOperator op = assemble(mesh, config.alpha);
        std::ofstream os((dir / "matrices.txt").string());
        write_matrix_coordinate(op, os);
    }
}

} // namespace aplab
