#include "aplab/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace aplab {

Nonlinearity Nonlinearity::piecewise_linear(double a, double b) {
    if (!(a > 0.0 && b > 0.0))
        throw std::invalid_argument("piecewise_linear: slopes must be positive");
    Nonlinearity f;
    f.kind_ = Kind::piecewise_linear;
    f.a_ = a;
    f.b_ = b;
    f.constants_ = {std::max(a, b), std::min(a, b), 0.0, b / 2.0, 0.0};
    return f;
}

Nonlinearity Nonlinearity::smooth_abs() {
    Nonlinearity f;
    f.kind_ = Kind::smooth_abs;
    f.constants_ = {1.0, 1.0, 1.0, 0.5, 1.0};
    return f;
}

Nonlinearity Nonlinearity::table(std::vector<double> u, std::vector<double> fv,
                                 NonlinearityConstants constants) {
    if (u.size() != fv.size() || u.size() < 2)
        throw std::invalid_argument("table nonlinearity: need >= 2 matching samples");
    for (std::size_t i = 1; i < u.size(); ++i)
        if (!(u[i - 1] < u[i]))
            throw std::invalid_argument("table nonlinearity: abscissae must be strictly increasing");
    if (!(constants.c_f > 0.0 && constants.c1 > 0.0 && constants.c3 > 0.0 &&
          constants.c3 < constants.c_f))
        throw std::invalid_argument("table nonlinearity: constants must satisfy c_f > 0, c1 > 0, 0 < c3 < c_f");
    Nonlinearity f;
    f.kind_ = Kind::table;
    f.table_u_ = std::move(u);
    f.table_f_ = std::move(fv);
    f.constants_ = constants;
    return f;
}

double Nonlinearity::eval(double u) const {
    switch (kind_) {
    case Kind::piecewise_linear:
        return u >= 0.0 ? a_ * u : -b_ * u;
    case Kind::smooth_abs:
        return std::sqrt(1.0 + u * u) - 1.0;
    case Kind::table: {
        const auto& xs = table_u_;
        const auto& fs = table_f_;
        // Clamp to the end segments for extrapolation.
        std::size_t i = std::upper_bound(xs.begin(), xs.end(), u) - xs.begin();
        if (i == 0) i = 1;
        if (i == xs.size()) i = xs.size() - 1;
        const double s = (fs[i] - fs[i - 1]) / (xs[i] - xs[i - 1]);
        return fs[i - 1] + s * (u - xs[i - 1]);
    }
    }
    return 0.0;
}

double Nonlinearity::slope(double u) const {
    switch (kind_) {
    case Kind::piecewise_linear:
        return u >= 0.0 ? a_ : -b_;
    case Kind::smooth_abs:
        return u / std::sqrt(1.0 + u * u);
    case Kind::table: {
        const auto& xs = table_u_;
        // Segment to the right of u (right derivative).
        std::size_t i = std::upper_bound(xs.begin(), xs.end(), u) - xs.begin();
        if (i == 0) i = 1;
        if (i == xs.size()) i = xs.size() - 1;
        return (table_f_[i] - table_f_[i - 1]) / (xs[i] - xs[i - 1]);
    }
    }
    return 0.0;
}

double Nonlinearity::slope_left(double u) const {
    switch (kind_) {
    case Kind::piecewise_linear:
        return u > 0.0 ? a_ : -b_;
    case Kind::smooth_abs:
        return slope(u);
    case Kind::table: {
        const auto& xs = table_u_;
        std::size_t i = std::lower_bound(xs.begin(), xs.end(), u) - xs.begin();
        if (i == 0) i = 1;
        if (i == xs.size()) i = xs.size() - 1;
        return (table_f_[i] - table_f_[i - 1]) / (xs[i] - xs[i - 1]);
    }
    }
    return 0.0;
}

std::string Nonlinearity::describe() const {
    std::ostringstream os;
    switch (kind_) {
    case Kind::piecewise_linear:
        os << "piecewise_linear(" << a_ << ", " << b_ << ")";
        break;
    case Kind::smooth_abs:
        os << "smooth_abs";
        break;
    case Kind::table:
        os << "table[" << table_u_.size() << " samples]";
        break;
    }
    return os.str();
}

CertificationReport Nonlinearity::certify(double u_check) const {
    CertificationReport rep;
    const auto& c = constants_;

    // Logarithmic grid over [-1e6, 1e6] plus zero: magnitudes from 1e-6 to
    // 1e6, 20 points per decade, both signs.
    std::vector<double> grid;
    grid.push_back(0.0);
    for (int j = 0; j <= 12 * 20; ++j) {
        const double mag = std::pow(10.0, -6.0 + j / 20.0);
        grid.push_back(mag);
        grid.push_back(-mag);
    }

    const double slack_floor = -1e-9;
    rep.worst_growth_slack = rep.worst_lower_slack = rep.worst_one_sided_slack =
        std::numeric_limits<double>::infinity();
    for (double u : grid) {
        const double fu = eval(u);
        rep.worst_growth_slack =
            std::min(rep.worst_growth_slack, c.c_f * (1.0 + std::abs(u)) - std::abs(fu));
        rep.worst_lower_slack =
            std::min(rep.worst_lower_slack, fu - (c.c1 * std::abs(u) - c.c2));
        rep.worst_one_sided_slack =
            std::min(rep.worst_one_sided_slack, fu - (-c.c3 * u - c.c4));
    }
    rep.growth_ok = rep.worst_growth_slack >= slack_floor;
    rep.lower_ok = rep.worst_lower_slack >= slack_floor;
    rep.one_sided_ok = rep.worst_one_sided_slack >= slack_floor;

    rep.asymptotic_ok = true;
    for (double u : grid) {
        if (u <= -u_check && !(eval(u) / u < 0.0)) rep.asymptotic_ok = false;
        if (u >= u_check && !(eval(u) / u > 0.0)) rep.asymptotic_ok = false;
    }

    rep.passed = rep.growth_ok && rep.lower_ok && rep.one_sided_ok && rep.asymptotic_ok;
    return rep;
}

void ProblemSpec::validate() const {
    if (mesh.n_nodes() < 3)
        throw std::invalid_argument("ProblemSpec: mesh too coarse");
    if (!(alpha >= 0.0 && alpha < 2.0))
        throw std::invalid_argument("ProblemSpec: alpha must lie in [0, 2)");
    if (phi.size() != mesh.n_nodes() || h.size() != mesh.n_nodes())
        throw std::invalid_argument("ProblemSpec: phi/h size must match the node count");
    double phi_max = 0.0;
    for (double p : phi) {
        if (!std::isfinite(p) || p < 0.0)
            throw std::invalid_argument("ProblemSpec: phi must be nonnegative and finite");
        phi_max = std::max(phi_max, p);
    }
    if (!(phi_max > 0.0))
        throw std::invalid_argument("ProblemSpec: phi must not be identically zero");
    for (double v : h)
        if (!std::isfinite(v))
            throw std::invalid_argument("ProblemSpec: h must be finite");
    const auto& c = f.constants();
    if (!(c.c_f > 0.0 && c.c1 > 0.0 && c.c3 > 0.0 && c.c3 < c.c_f))
        throw std::invalid_argument("ProblemSpec: nonlinearity constants violate hypotheses");
}

const char* to_string(SolveMethod m) {
    switch (m) {
    case SolveMethod::monotone: return "monotone";
    case SolveMethod::newton: return "newton";
    case SolveMethod::deflation: return "deflation";
    case SolveMethod::continuation: return "continuation";
    }
    return "?";
}

std::vector<double> residual(const ProblemSpec& spec, const WeightedOperator& op,
                             std::span<const double> u, double t) {
    const std::size_t n = op.size();
    if (u.size() != n)
        throw std::invalid_argument("residual: dimension mismatch");
    std::vector<double> out(n);
    op.apply_stiffness(u, out);
    auto m = op.m_diag();
    for (std::size_t i = 0; i < n; ++i)
        out[i] -= m[i] * (spec.f.eval(u[i]) + t * spec.phi[i] + spec.h[i]);
    return out;
}

Tridiag jacobian(const ProblemSpec& spec, const WeightedOperator& op,
                 std::span<const double> u, double /*t*/) {
    const std::size_t n = op.size();
    if (u.size() != n)
        throw std::invalid_argument("jacobian: dimension mismatch");
    Tridiag j;
    j.diag.assign(op.k_diag().begin(), op.k_diag().end());
    j.sub.assign(op.k_off().begin(), op.k_off().end());
    j.super = j.sub;
    auto m = op.m_diag();
    for (std::size_t i = 0; i < n; ++i) j.diag[i] -= m[i] * spec.f.slope(u[i]);
    return j;
}

std::vector<double> apply_S(const ProblemSpec& spec, const WeightedOperator& op,
                            std::span<const double> v, double t) {
    const std::size_t n = op.size();
    if (v.size() != n)
        throw std::invalid_argument("apply_S: dimension mismatch");
    const double cf = spec.f.constants().c_f;
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i)
        rhs[i] = spec.f.eval(v[i]) + cf * v[i] + t * spec.phi[i] + spec.h[i];
    return solve_shifted(op, cf, rhs).w;
}

double compatibility_defect(const ProblemSpec& spec, std::span<const double> u,
                            double t) {
    const std::vector<double> m = lumped_masses(spec.mesh);
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        s += m[i] * (spec.f.eval(u[i]) + t * spec.phi[i] + spec.h[i]);
    return s;
}

double necessary_upper_bound(const ProblemSpec& spec) {
    const std::vector<double> m = lumped_masses(spec.mesh);
    double measure = 0.0, int_phi = 0.0, int_h = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        measure += m[i];
        int_phi += m[i] * spec.phi[i];
        int_h += m[i] * spec.h[i];
    }
    return (spec.f.constants().c2 * measure - int_h) / int_phi;
}

double constant_subsolution(const ProblemSpec& spec, double t) {
    const auto& c = spec.f.constants();
    const double phi_inf = max_norm(spec.phi);
    const double h_inf = max_norm(spec.h);
    return -(std::abs(t) * phi_inf + h_inf + c.c4) / c.c3;
}

double max_norm(std::span<const double> u) {
    double m = 0.0;
    for (double x : u) m = std::max(m, std::abs(x));
    return m;
}

double pos_part_max(std::span<const double> u) {
    double m = 0.0;
    for (double x : u) m = std::max(m, x);
    return std::max(m, 0.0);
}

double neg_part_max(std::span<const double> u) {
    double m = 0.0;
    for (double x : u) m = std::max(m, -x);
    return std::max(m, 0.0);
}

std::vector<double> constant_vector(std::size_t n, double value) {
    return std::vector<double>(n, value);
}

} // namespace aplab
