#include "aplab/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace aplab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Extended point and unit tangent in the metric ||du||_M^2 + dt^2.
struct ExtPoint {
    std::vector<double> u;
    double t = 0.0;
};

struct ExtTangent {
    std::vector<double> du;
    double dt = 0.0;
};

struct Stepper {
    const ProblemSpec& spec;
    const WeightedOperator& op;
    const SolveOptions& opts;

    double metric_dot(const ExtTangent& a, std::span<const double> du,
                      double dt) const {
        return op.mass_inner(a.du, du) + a.dt * dt;
    }

    std::vector<double> mass_phi() const {
        std::vector<double> r(op.size());
        auto m = op.m_diag();
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = m[i] * spec.phi[i];
        return r;
    }

    // Tangent through the bordered system {J du = dt * M phi,
    // <prev, (du,dt)> = 1}, normalized and oriented along prev.
    std::optional<ExtTangent> tangent_at(const ExtPoint& x,
                                         const ExtTangent& prev) const {
        TridiagLU lu(jacobian(spec, op, x.u, x.t));
        if (lu.singular()) return std::nullopt;
        std::vector<double> b = lu.solve(mass_phi());

        const double denom = metric_dot(prev, b, 1.0);
        ExtTangent tau;
        if (std::abs(denom) > 1e-14) {
            const double z = 1.0 / denom;
            tau.du = b;
            for (auto& v : tau.du) v *= z;
            tau.dt = z;
        } else {
            tau.du = b; // fall back to the raw direction
            tau.dt = 1.0;
        }
        const double n = std::sqrt(op.mass_quadratic(tau.du) + tau.dt * tau.dt);
        for (auto& v : tau.du) v /= n;
        tau.dt /= n;
        if (metric_dot(prev, tau.du, tau.dt) < 0.0) {
            for (auto& v : tau.du) v = -v;
            tau.dt = -tau.dt;
        }
        return tau;
    }

    // One predictor-corrector step of length s from (x0, tau). On success
    // returns the corrected point and the tangent there.
    std::optional<std::pair<ExtPoint, ExtTangent>> step(const ExtPoint& x0,
                                                        const ExtTangent& tau,
                                                        double s) const {
        ExtPoint x;
        x.u.resize(x0.u.size());
        for (std::size_t i = 0; i < x.u.size(); ++i)
            x.u[i] = x0.u[i] + s * tau.du[i];
        x.t = x0.t + s * tau.dt;

        const std::vector<double> mphi = mass_phi();
        std::vector<double> diff(x.u.size());
        for (int it = 0; it < 30; ++it) {
            std::vector<double> f = residual(spec, op, x.u, x.t);
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = x.u[i] - x0.u[i];
            const double cons = metric_dot(tau, diff, x.t - x0.t) - s;
            if (norm2(f) <= opts.tol_residual && std::abs(cons) <= 1e-10 * (1.0 + std::abs(s))) {
                auto tnew = tangent_at(x, tau);
                if (!tnew) return std::nullopt;
                return std::make_pair(std::move(x), std::move(*tnew));
            }

            TridiagLU lu(jacobian(spec, op, x.u, x.t));
            if (lu.singular()) return std::nullopt;
            std::vector<double> rhs(f.size());
            for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
            std::vector<double> a = lu.solve(rhs);
            std::vector<double> b = lu.solve(mphi);

            const double denom = metric_dot(tau, b, 1.0);
            if (std::abs(denom) < 1e-14) return std::nullopt;
            const double dt = -(cons + op.mass_inner(tau.du, a)) / denom;
            for (std::size_t i = 0; i < x.u.size(); ++i) x.u[i] += a[i] + dt * b[i];
            x.t += dt;
            if (!std::isfinite(x.t)) return std::nullopt;
        }
        return std::nullopt;
    }
};

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

} // namespace

void RegionSpec::validate() const {
    if (!(rho_plus > 0.0 && rho_minus > 0.0))
        throw std::invalid_argument("RegionSpec: rho caps must be positive");
    if (!(R > std::max(rho_plus, rho_minus)))
        throw std::invalid_argument("RegionSpec: R must exceed max(rho_plus, rho_minus)");
}

bool RegionSpec::in_G(std::span<const double> u) const {
    return pos_part_max(u) < rho_plus && neg_part_max(u) < rho_minus;
}

bool RegionSpec::in_ball(std::span<const double> u) const {
    return max_norm(u) < R;
}

Branch trace_branch(const ProblemSpec& spec, const WeightedOperator& op,
                    double t_start, const Solution& u_start, double step,
                    double t_stop, const SolveOptions& opts) {
    if (!(step > 0.0))
        throw std::invalid_argument("trace_branch: step must be positive");
    if (norm2(residual(spec, op, u_start.u, t_start)) > 1e-8)
        throw std::invalid_argument("trace_branch: u_start does not solve at t_start");

    Stepper st{spec, op, opts};
    Branch branch;

    ExtPoint x{u_start.u, t_start};
    ExtTangent seed;
    seed.du.assign(op.size(), 0.0);
    seed.dt = t_stop >= t_start ? 1.0 : -1.0;
    auto tau_opt = st.tangent_at(x, seed);
    if (!tau_opt) {
        branch.stalled = true;
        branch.stall_reason = "singular Jacobian at the start point";
        return branch;
    }
    ExtTangent tau = *tau_opt;

    auto push_point = [&](const ExtPoint& p, const ExtTangent& tp, double arc) {
        BranchPoint bp;
        bp.t = p.t;
        bp.u = p.u;
        bp.arclength = arc;
        bp.index = local_index(spec, op, p.u, p.t);
        bp.tangent_dt = tp.dt;
        branch.points.push_back(std::move(bp));
    };

    double arc = 0.0;
    push_point(x, tau, arc);

    const double t_min = std::min(t_start, t_stop);
    const double t_max = std::max(t_start, t_stop);
    const double step_init = step;
    double s = step;
    int clean = 0;
    const std::size_t max_points = 100000;

    while (branch.points.size() < max_points) {
        auto next = st.step(x, tau, s);
        if (!next) {
            s *= 0.5;
            clean = 0;
            if (s < 1e-10 * step_init) {
                branch.stalled = true;
                std::ostringstream os;
                os << "step collapsed below 1e-10 of the initial step at t = "
                   << x.t;
                branch.stall_reason = os.str();
                break;
            }
            continue;
        }
        x = std::move(next->first);
        tau = std::move(next->second);
        arc += s;
        push_point(x, tau, arc);
        if (++clean >= 4) {
            s = std::min(2.0 * s, step_init);
            clean = 0;
        }
        if (x.t < t_min - 1e-12 || x.t > t_max + 1e-12) break;
    }

    branch.fold = detect_fold(spec, op, branch, opts);
    return branch;
}

std::optional<FoldPoint> detect_fold(const ProblemSpec& spec,
                                     const WeightedOperator& op,
                                     const Branch& branch,
                                     const SolveOptions& opts) {
    if (branch.points.size() < 3) return std::nullopt;

    std::size_t i_change = 0;
    bool found = false;
    for (std::size_t i = 0; i + 1 < branch.points.size(); ++i) {
        const double a = branch.points[i].tangent_dt;
        const double b = branch.points[i + 1].tangent_dt;
        if (a == 0.0)
            return FoldPoint{branch.points[i].t, branch.points[i].u};
        if (a * b < 0.0) {
            i_change = i;
            found = true;
            break;
        }
    }
    if (!found) return std::nullopt;

    Stepper st{spec, op, opts};
    const BranchPoint& pa = branch.points[i_change];
    const BranchPoint& pb = branch.points[i_change + 1];

    ExtPoint a{pa.u, pa.t};
    // Orient the tangent at a toward b along the branch.
    ExtTangent toward;
    toward.du.resize(op.size());
    for (std::size_t i = 0; i < op.size(); ++i) toward.du[i] = pb.u[i] - pa.u[i];
    toward.dt = pb.t - pa.t;
    auto tau_a = st.tangent_at(a, toward);
    if (!tau_a) return FoldPoint{pa.t, pa.u};
    const int sign_a = sign_of(pa.tangent_dt);

    double gap = pb.arclength - pa.arclength;
    double t_other = pb.t;
    ExtPoint other{pb.u, pb.t};

    for (int it = 0; it < 200 && std::abs(a.t - t_other) > 1e-8; ++it) {
        if (gap < 1e-14) break;
        auto mid = st.step(a, *tau_a, 0.5 * gap);
        if (!mid) {
            gap *= 0.5;
            continue;
        }
        const int sign_mid = sign_of(mid->second.dt);
        if (sign_mid == 0) return FoldPoint{mid->first.t, mid->first.u};
        if (sign_mid == sign_a) {
            a = std::move(mid->first);
            tau_a = std::move(mid->second);
        } else {
            other = std::move(mid->first);
            t_other = other.t;
        }
        gap *= 0.5;
    }

    // Return the bracket end with the flatter tangent (closest to the fold).
    auto tau_o = st.tangent_at(other, *tau_a);
    if (tau_o && std::abs(tau_o->dt) < std::abs(tau_a->dt))
        return FoldPoint{other.t, other.u};
    return FoldPoint{a.t, a.u};
}

std::pair<double, double> bracket_t_star(const ProblemSpec& spec,
                                         const WeightedOperator& op,
                                         double t_lo, double t_hi, double tol,
                                         const SolveOptions& opts) {
    if (!(t_lo < t_hi))
        throw std::invalid_argument("bracket_t_star: need t_lo < t_hi");
    if (!(tol > 0.0))
        throw std::invalid_argument("bracket_t_star: tol must be positive");

    auto solvable = [&](double t) {
        return !find_all_solutions(spec, op, t, opts).empty();
    };
    if (!solvable(t_lo))
        throw std::invalid_argument("bracket_t_star: no solution found at t_lo");
    if (solvable(t_hi))
        throw std::invalid_argument("bracket_t_star: t_hi is solvable; precondition violated");

    while (t_hi - t_lo > tol) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (solvable(mid))
            t_lo = mid;
        else
            t_hi = mid;
    }
    return {t_lo, t_hi};
}

int local_index(const ProblemSpec& spec, const WeightedOperator& op,
                std::span<const double> u, double t) {
    (void)t;
    auto sign_with = [&](bool left_slopes) -> int {
        Tridiag j;
        j.diag.assign(op.k_diag().begin(), op.k_diag().end());
        j.sub.assign(op.k_off().begin(), op.k_off().end());
        j.super = j.sub;
        auto m = op.m_diag();
        for (std::size_t i = 0; i < op.size(); ++i) {
            const double s =
                left_slopes ? spec.f.slope_left(u[i]) : spec.f.slope(u[i]);
            j.diag[i] -= m[i] * s;
        }
        return TridiagLU(j).det_sign(1e-10);
    };
    const int right = sign_with(false);
    const int left = sign_with(true);
    if (right == 0 || left == 0) return 0;
    if (right != left) return 0; // kink of f' crosses the solution: no index
    return right;
}

DegreeReport degree_over_region(const ProblemSpec& spec,
                                const WeightedOperator& op,
                                const RegionSpec& region, double t,
                                const std::vector<Solution>& solutions) {
    region.validate();
    DegreeReport rep;
    rep.caveat =
        "index sums assume the supplied solution list is exhaustive in B(0,R)";
    for (std::size_t k = 0; k < solutions.size(); ++k) {
        const Solution& s = solutions[k];
        const int idx =
            s.index ? *s.index : local_index(spec, op, s.u, t);
        if (idx == 0) {
            std::ostringstream os;
            os << "degree_over_region: solution " << k
               << " has a degenerate index; degree is undefined";
            throw std::runtime_error(os.str());
        }
        DegreeRow row;
        row.solution = k;
        row.in_G = region.in_G(s.u);
        row.in_ball = region.in_ball(s.u);
        row.index = idx;
        if (row.in_G) rep.deg_G += idx;
        if (row.in_ball) rep.deg_ball += idx;
        if (row.in_ball && !row.in_G) rep.deg_ball_minus_G += idx;
        rep.rows.push_back(row);
    }
    return rep;
}

BoundaryMarginReport verify_homotopy_boundary(const ProblemSpec& spec,
                                              const WeightedOperator& op,
                                              double t, const RegionSpec& region,
                                              int s_samples, int v_samples,
                                              std::uint64_t seed) {
    region.validate();
    if (s_samples < 2)
        throw std::invalid_argument("verify_homotopy_boundary: need >= 2 s-samples");
    if (v_samples < 1)
        throw std::invalid_argument("verify_homotopy_boundary: need >= 1 v-samples");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    const std::size_t n = op.size();
    const auto& nodes = spec.mesh.nodes;
    const double xl = spec.mesh.x_left, xr = spec.mesh.x_right;

    auto random_profile = [&](bool smooth) {
        std::vector<double> w(n);
        if (smooth) {
            double a[5];
            for (auto& c : a) c = unif(rng);
            for (std::size_t i = 0; i < n; ++i) {
                const double xi = (nodes[i] - xl) / (xr - xl);
                double v = 0.0;
                for (int k = 0; k < 5; ++k) v += a[k] * std::cos(k * kPi * xi);
                w[i] = v;
            }
        } else {
            for (auto& v : w) v = unif(rng);
        }
        return w;
    };

    // Rescale so the pinned part attains its cap exactly and the other part
    // stays strictly inside its cap.
    auto boundary_profile = [&](bool plus_piece) {
        std::vector<double> w = random_profile(rng() % 2 == 0);
        double pinned = plus_piece ? pos_part_max(w) : neg_part_max(w);
        if (pinned == 0.0) {
            for (auto& v : w) v = -v;
            pinned = plus_piece ? pos_part_max(w) : neg_part_max(w);
            if (pinned == 0.0) {
                w[n / 2] = plus_piece ? 1.0 : -1.0;
                pinned = 1.0;
            }
        }
        const double cap = plus_piece ? region.rho_plus : region.rho_minus;
        const double scale = cap / pinned;
        for (auto& v : w) v *= scale;
        const double other_cap =
            (plus_piece ? region.rho_minus : region.rho_plus) *
            (0.2 + 0.8 * unif01(rng));
        for (auto& v : w) {
            if (plus_piece)
                v = std::max(v, -other_cap);
            else
                v = std::min(v, other_cap);
        }
        // Pin the extremal entry exactly to the cap.
        std::size_t arg = 0;
        double best = plus_piece ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (plus_piece ? w[i] > best : w[i] < best) {
                best = w[i];
                arg = i;
            }
        }
        w[arg] = plus_piece ? cap : -cap;
        return w;
    };

    BoundaryMarginReport rep;
    rep.s_samples = s_samples;
    rep.v_samples = v_samples;
    rep.seed = seed;
    rep.min_margin_plus = rep.min_margin_minus =
        std::numeric_limits<double>::infinity();

    for (int piece = 0; piece < 2; ++piece) {
        const bool plus_piece = piece == 0;
        double& piece_min =
            plus_piece ? rep.min_margin_plus : rep.min_margin_minus;
        for (int j = 0; j < v_samples; ++j) {
            const std::vector<double> v = boundary_profile(plus_piece);
            const std::vector<double> sv = apply_S(spec, op, v, t);
            for (int k = 0; k < s_samples; ++k) {
                const double s = static_cast<double>(k) / (s_samples - 1);
                double m = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    m = std::max(m, std::abs(v[i] - s * sv[i]));
                piece_min = std::min(piece_min, m);
            }
        }
    }
    rep.min_margin = std::min(rep.min_margin_plus, rep.min_margin_minus);
    return rep;
}

} // namespace aplab
