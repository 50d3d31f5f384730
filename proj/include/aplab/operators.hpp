#pragma once

// Weighted P1 finite element operators on a 1D mesh: the stiffness matrix K
// discretizing -div(|x|^alpha grad u) with natural Neumann conditions, the
// lumped mass matrix M, the shifted solve (K + cM) w = M v, the discrete
// weighted norm, and the first nonzero Neumann eigenvalue.

#include "aplab/mesh.hpp"
#include "aplab/tridiag.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace aplab {

/// Assembled weighted stiffness K (symmetric tridiagonal, K 1 = 0, all
/// off-diagonal entries negative) and diagonal lumped mass M. Immutable
/// after assembly; the factorization cache is internally synchronized, so
/// const use from several threads is safe.
class WeightedOperator {
public:
    WeightedOperator(Mesh mesh, double alpha);

    std::size_t size() const { return k_diag_.size(); }
    double alpha() const { return alpha_; }
    const Mesh& mesh() const { return mesh_; }

    std::span<const double> k_diag() const { return k_diag_; }
    std::span<const double> k_off() const { return k_off_; }
    std::span<const double> m_diag() const { return m_diag_; }

    void apply_stiffness(std::span<const double> u, std::span<double> out) const;
    double stiffness_quadratic(std::span<const double> u) const; // u^T K u
    double mass_quadratic(std::span<const double> u) const;      // u^T M u
    double mass_inner(std::span<const double> u, std::span<const double> v) const;
    double integrate(std::span<const double> u) const;           // 1^T M u
    double domain_measure() const;                               // 1^T M 1

    /// Cholesky factorization of K + shift*M, cached per shift. shift must
    /// be positive. `reused` (when non-null) reports a cache hit.
    const TridiagCholesky& shifted_factorization(double shift,
                                                 bool* reused = nullptr) const;

private:
    Mesh mesh_;
    double alpha_;
    std::vector<double> k_diag_, k_off_, m_diag_;

    struct FactorCache {
        std::mutex mutex;
        std::map<double, std::unique_ptr<TridiagCholesky>> by_shift;
    };
    std::unique_ptr<FactorCache> cache_;
};

WeightedOperator assemble(const Mesh& mesh, double alpha);

struct LinearSolveReport {
    std::vector<double> w;
    double residual_norm = 0.0; // Euclidean norm of (K + cM) w - M v
    bool factorization_reused = false;
};

/// Solves (K + c M) w = M v, realizing w = T v when c equals the growth
/// constant of the nonlinearity. Requires c > 0.
LinearSolveReport solve_shifted(const WeightedOperator& op, double shift,
                                std::span<const double> v);

/// Discrete weighted norm sqrt(u^T K u + u^T M u).
double norm_alpha(const WeightedOperator& op, std::span<const double> u);

/// Smallest nonzero eigenvalue of K u = mu M u (the first nonzero Neumann
/// eigenvalue), by inverse iteration on the M-orthogonal complement of the
/// constants. Throws std::runtime_error on non-convergence.
double smallest_nonzero_eigenvalue(const WeightedOperator& op,
                                   double rel_tol = 1e-8, int max_iters = 400);

/// Same iteration, also returning the eigenvector scaled to unit sup norm.
std::pair<double, std::vector<double>> smallest_nonzero_eigenpair(
    const WeightedOperator& op, double rel_tol = 1e-8, int max_iters = 400);

/// Coordinate-format text dump (row, col, value) of K and M for external
/// cross-checks.
void write_matrix_coordinate(const WeightedOperator& op, std::ostream& os);

} // namespace aplab
