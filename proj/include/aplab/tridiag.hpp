#pragma once

// Tridiagonal direct solvers: LDL^T for symmetric positive definite systems
// (the shifted operator K + cM) and LU with partial pivoting for possibly
// indefinite Jacobians K - M diag(f'(u)). Pivoting fills in one extra
// superdiagonal; the determinant sign comes from the pivots and the row
// swap count.

#include <cstddef>
#include <span>
#include <vector>

namespace aplab {

/// General tridiagonal matrix: sub[i] = A(i+1,i), diag[i] = A(i,i),
/// super[i] = A(i,i+1).
struct Tridiag {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> super;

    std::size_t size() const { return diag.size(); }
    void apply(std::span<const double> x, std::span<double> y) const;
};

/// LDL^T factorization of a symmetric positive definite tridiagonal matrix
/// given by its diagonal and off-diagonal. Throws std::runtime_error if a
/// nonpositive pivot appears (loss of positive definiteness).
class TridiagCholesky {
public:
    TridiagCholesky(std::span<const double> diag, std::span<const double> off);

    std::size_t size() const { return d_.size(); }
    void solve(std::span<const double> rhs, std::span<double> x) const;
    std::vector<double> solve(std::span<const double> rhs) const;

private:
    std::vector<double> d_; // pivots of D
    std::vector<double> l_; // unit lower bidiagonal multipliers
};

/// LU factorization with partial pivoting of a general tridiagonal matrix.
class TridiagLU {
public:
    explicit TridiagLU(const Tridiag& a);

    std::size_t size() const { return d_.size(); }
    bool singular() const { return singular_; }

    /// Solves A x = rhs. Throws std::runtime_error if the factorization hit
    /// an exactly zero pivot.
    void solve(std::span<const double> rhs, std::span<double> x) const;
    std::vector<double> solve(std::span<const double> rhs) const;

    /// Sign of det(A): +1 or -1, or 0 when the smallest pivot magnitude is
    /// below `degeneracy_ratio` times the largest (numerically singular).
    int det_sign(double degeneracy_ratio = 1e-10) const;

private:
    std::vector<double> dl_, d_, du_, du2_;
    std::vector<int> swapped_; // 1 where rows i, i+1 were exchanged
    bool singular_ = false;
};

} // namespace aplab
