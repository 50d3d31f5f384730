#pragma once

// The nonlinear problem data: the nonlinearity f with its certified growth
// constants, the forcing pair (phi, h), and the derived quantities used by
// the solvers and the degree bookkeeping: the nodal residual, the Jacobian,
// the fixed-point map S_t, the integral compatibility defect, the necessary
// upper bound on t, and the constant subsolution.

#include "aplab/mesh.hpp"
#include "aplab/operators.hpp"
#include "aplab/tridiag.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aplab {

/// Growth constants certifying the hypotheses on f:
///   |f(u)| <= c_f (1 + |u|),   f(u) >= c1 |u| - c2,   f(u) >= -c3 u - c4,
/// with c_f > 0, c1 > 0 and 0 < c3 < c_f.
struct NonlinearityConstants {
    double c_f = 0, c1 = 0, c2 = 0, c3 = 0, c4 = 0;
};

struct CertificationReport {
    bool passed = false;
    bool growth_ok = false;      // |f(u)| <= c_f (1+|u|)
    bool lower_ok = false;       // f(u) >= c1|u| - c2
    bool one_sided_ok = false;   // f(u) >= -c3 u - c4
    bool asymptotic_ok = false;  // f(u)/u sign at +-u_check and beyond
    double worst_growth_slack = 0;
    double worst_lower_slack = 0;
    double worst_one_sided_slack = 0;
};

/// Scalar nonlinearity with one-sided derivatives (right derivative is the
/// solver convention at kinks) and certified constants.
class Nonlinearity {
public:
    enum class Kind { piecewise_linear, smooth_abs, table };

    /// f(u) = a u^+ + b u^-, a, b > 0. Constants: c_f = max(a,b),
    /// c1 = min(a,b), c2 = 0, c3 = b/2, c4 = 0.
    static Nonlinearity piecewise_linear(double a, double b);

    /// f(u) = sqrt(1 + u^2) - 1. Constants: c_f = 1, c1 = 1, c2 = 1,
    /// c3 = 1/2, c4 = 1.
    static Nonlinearity smooth_abs();

    /// Piecewise-linear interpolation of (u_i, f_i) samples with end-slope
    /// extrapolation; the caller supplies its own certified constants.
    static Nonlinearity table(std::vector<double> u, std::vector<double> f,
                              NonlinearityConstants constants);

    double eval(double u) const;
    double slope(double u) const;      // right derivative
    double slope_left(double u) const; // left derivative; differs at kinks

    Kind kind() const { return kind_; }
    const NonlinearityConstants& constants() const { return constants_; }
    std::string describe() const;

    /// Sampled certification of the three inequalities (slack >= -1e-9 on a
    /// logarithmic grid in [-1e6, 1e6]) and of the asymptotic sign of f(u)/u
    /// beyond +-u_check.
    CertificationReport certify(double u_check = 1e3) const;

private:
    Kind kind_ = Kind::piecewise_linear;
    double a_ = 1.0, b_ = 1.0;                  // piecewise_linear
    std::vector<double> table_u_, table_f_;     // table
    NonlinearityConstants constants_;
};

/// Problem data on a fixed mesh. phi and h are nodal samples; phi must be
/// nonnegative and not identically zero.
struct ProblemSpec {
    Mesh mesh;
    double alpha = 0.5;
    Nonlinearity f;
    std::vector<double> phi;
    std::vector<double> h;

    std::size_t n_nodes() const { return mesh.n_nodes(); }
    /// Throws std::invalid_argument when a field violates its hypothesis.
    void validate() const;
};

enum class SolveMethod { monotone, newton, deflation, continuation };

const char* to_string(SolveMethod m);

struct Solution {
    std::vector<double> u;
    double t = 0.0;
    double residual_norm = 0.0;       // Euclidean norm of the nodal residual
    double compatibility_defect = 0.0;
    std::optional<int> index;         // -1, 0, +1 when computed
    SolveMethod method = SolveMethod::newton;
    int iterations = 0;
};

/// Nodal residual F(u;t) = K u - M (f(u) + t phi + h); u solves the discrete
/// problem iff F = 0.
std::vector<double> residual(const ProblemSpec& spec, const WeightedOperator& op,
                             std::span<const double> u, double t);

/// J(u) = K - M diag(f'(u)) with the right derivative at kinks.
Tridiag jacobian(const ProblemSpec& spec, const WeightedOperator& op,
                 std::span<const double> u, double t);

/// Fixed-point map S_t(v) = (K + C_f M)^{-1} M (f(v) + C_f v + t phi + h).
std::vector<double> apply_S(const ProblemSpec& spec, const WeightedOperator& op,
                            std::span<const double> v, double t);

/// Integral identity value 1^T M (f(u) + t phi + h); zero for exact discrete
/// solutions. Computed from the mesh alone (lumped masses), so it does not
/// need the assembled operator.
double compatibility_defect(const ProblemSpec& spec, std::span<const double> u,
                            double t);

/// Necessary upper bound (c2 |Omega| - int h) / int phi: no solution can
/// exist for t above this value.
double necessary_upper_bound(const ProblemSpec& spec);

/// Constant subsolution -(|t| max|phi| + max|h| + c4) / c3; the residual at
/// it is <= 0 componentwise (F(c) = -M(f(c) + t phi + h)).
double constant_subsolution(const ProblemSpec& spec, double t);

// Small nodal-vector helpers shared across modules.
double max_norm(std::span<const double> u);
double pos_part_max(std::span<const double> u); // max(u, 0) sup norm
double neg_part_max(std::span<const double> u); // max(-u, 0) sup norm
std::vector<double> constant_vector(std::size_t n, double value);

} // namespace aplab
