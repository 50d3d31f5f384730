#include "aplab/tridiag.hpp"

#include <cmath>
#include <stdexcept>

namespace aplab {

void Tridiag::apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag[i] * x[i];
        if (i > 0) v += sub[i - 1] * x[i - 1];
        if (i + 1 < n) v += super[i] * x[i + 1];
        y[i] = v;
    }
}

TridiagCholesky::TridiagCholesky(std::span<const double> diag,
                                 std::span<const double> off) {
    const std::size_t n = diag.size();
    if (off.size() + 1 != n)
        throw std::invalid_argument("TridiagCholesky: off-diagonal size mismatch");
    d_.resize(n);
    l_.resize(n > 0 ? n - 1 : 0);
    d_[0] = diag[0];
    if (!(d_[0] > 0.0))
        throw std::runtime_error("TridiagCholesky: nonpositive pivot at row 0");
    for (std::size_t i = 1; i < n; ++i) {
        l_[i - 1] = off[i - 1] / d_[i - 1];
        d_[i] = diag[i] - off[i - 1] * l_[i - 1];
        if (!(d_[i] > 0.0))
            throw std::runtime_error("TridiagCholesky: nonpositive pivot, matrix not positive definite");
    }
}

void TridiagCholesky::solve(std::span<const double> rhs, std::span<double> x) const {
    const std::size_t n = d_.size();
    x[0] = rhs[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = rhs[i] - l_[i - 1] * x[i - 1];
    for (std::size_t i = 0; i < n; ++i) x[i] /= d_[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= l_[i] * x[i + 1];
}

std::vector<double> TridiagCholesky::solve(std::span<const double> rhs) const {
    std::vector<double> x(rhs.size());
    solve(rhs, x);
    return x;
}

TridiagLU::TridiagLU(const Tridiag& a) {
    const std::size_t n = a.size();
    dl_ = a.sub;
    d_ = a.diag;
    du_ = a.super;
    du2_.assign(n > 2 ? n - 2 : 0, 0.0);
    swapped_.assign(n > 1 ? n - 1 : 0, 0);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d_[i]) >= std::abs(dl_[i])) {
            if (d_[i] != 0.0) {
                const double fact = dl_[i] / d_[i];
                dl_[i] = fact;
                d_[i + 1] -= fact * du_[i];
            } else {
                singular_ = true;
            }
        } else {
            const double fact = d_[i] / dl_[i];
            d_[i] = dl_[i];
            dl_[i] = fact;
            const double tmp = du_[i];
            du_[i] = d_[i + 1];
            d_[i + 1] = tmp - fact * d_[i + 1];
            if (i + 2 < n) {
                du2_[i] = du_[i + 1];
                du_[i + 1] = -fact * du_[i + 1];
            }
            swapped_[i] = 1;
        }
    }
    if (n > 0 && d_[n - 1] == 0.0) singular_ = true;
}

void TridiagLU::solve(std::span<const double> rhs, std::span<double> x) const {
    if (singular_)
        throw std::runtime_error("TridiagLU: matrix is exactly singular");
    const std::size_t n = d_.size();
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[i];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!swapped_[i]) {
            x[i + 1] -= dl_[i] * x[i];
        } else {
            const double tmp = x[i];
            x[i] = x[i + 1];
            x[i + 1] = tmp - dl_[i] * x[i];
        }
    }
    x[n - 1] /= d_[n - 1];
    if (n > 1) x[n - 2] = (x[n - 2] - du_[n - 2] * x[n - 1]) / d_[n - 2];
    for (long r = static_cast<long>(n) - 3; r >= 0; --r)
        x[r] = (x[r] - du_[r] * x[r + 1] - du2_[r] * x[r + 2]) / d_[r];
}

std::vector<double> TridiagLU::solve(std::span<const double> rhs) const {
    std::vector<double> x(rhs.size());
    solve(rhs, x);
    return x;
}

int TridiagLU::det_sign(double degeneracy_ratio) const {
    double pmin = std::abs(d_[0]), pmax = pmin;
    int sign = 1;
    for (std::size_t i = 0; i < d_.size(); ++i) {
        const double p = std::abs(d_[i]);
        pmin = std::min(pmin, p);
        pmax = std::max(pmax, p);
        if (d_[i] < 0.0) sign = -sign;
    }
    for (int s : swapped_)
        if (s) sign = -sign;
    if (pmax == 0.0 || pmin < degeneracy_ratio * pmax) return 0;
    return sign;
}

} // namespace aplab
