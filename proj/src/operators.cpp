#include "aplab/operators.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace aplab {

WeightedOperator::WeightedOperator(Mesh mesh, double alpha)
    : mesh_(std::move(mesh)), alpha_(alpha), cache_(std::make_unique<FactorCache>()) {
    if (!(alpha >= 0.0 && alpha < 2.0))
        throw std::invalid_argument("WeightedOperator: alpha must lie in [0, 2)");
    const std::size_t n = mesh_.n_nodes();
    k_diag_.assign(n, 0.0);
    k_off_.assign(n - 1, 0.0);
    for (std::size_t c = 0; c < mesh_.n_cells(); ++c) {
        const double a = mesh_.nodes[c];
        const double b = mesh_.nodes[c + 1];
        const double h = b - a;
        const double w = weight_cell_integral(a, b, alpha_, mesh_.radial_dimension);
        const double k = w / (h * h);
        k_diag_[c] += k;
        k_diag_[c + 1] += k;
        k_off_[c] -= k;
    }
    m_diag_ = lumped_masses(mesh_);
}

WeightedOperator assemble(const Mesh& mesh, double alpha) {
    return WeightedOperator(mesh, alpha);
}

void WeightedOperator::apply_stiffness(std::span<const double> u,
                                       std::span<double> out) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        double v = k_diag_[i] * u[i];
        if (i > 0) v += k_off_[i - 1] * u[i - 1];
        if (i + 1 < n) v += k_off_[i] * u[i + 1];
        out[i] = v;
    }
}

double WeightedOperator::stiffness_quadratic(std::span<const double> u) const {
    // Sum of per-cell contributions w_c (du/h)^2 * h^2/h^2; assembled form
    // keeps exactness for piecewise-linear u.
    double q = 0.0;
    for (std::size_t c = 0; c + 1 < size(); ++c) {
        const double du = u[c + 1] - u[c];
        q += -k_off_[c] * du * du;
    }
    return q;
}

double WeightedOperator::mass_quadratic(std::span<const double> u) const {
    double q = 0.0;
    for (std::size_t i = 0; i < size(); ++i) q += m_diag_[i] * u[i] * u[i];
    return q;
}

double WeightedOperator::mass_inner(std::span<const double> u,
                                    std::span<const double> v) const {
    double q = 0.0;
    for (std::size_t i = 0; i < size(); ++i) q += m_diag_[i] * u[i] * v[i];
    return q;
}

double WeightedOperator::integrate(std::span<const double> u) const {
    double q = 0.0;
    for (std::size_t i = 0; i < size(); ++i) q += m_diag_[i] * u[i];
    return q;
}

double WeightedOperator::domain_measure() const {
    double q = 0.0;
    for (double m : m_diag_) q += m;
    return q;
}

const TridiagCholesky& WeightedOperator::shifted_factorization(double shift,
                                                               bool* reused) const {
    if (!(shift > 0.0))
        throw std::invalid_argument("shifted_factorization: shift must be positive");
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto it = cache_->by_shift.find(shift);
    if (it != cache_->by_shift.end()) {
        if (reused) *reused = true;
        return *it->second;
    }
    if (reused) *reused = false;
    std::vector<double> diag(k_diag_);
    for (std::size_t i = 0; i < diag.size(); ++i) diag[i] += shift * m_diag_[i];
    auto fact = std::make_unique<TridiagCholesky>(diag, k_off_);
    auto [pos, _] = cache_->by_shift.emplace(shift, std::move(fact));
    return *pos->second;
}

LinearSolveReport solve_shifted(const WeightedOperator& op, double shift,
                                std::span<const double> v) {
    if (v.size() != op.size())
        throw std::invalid_argument("solve_shifted: rhs dimension mismatch");
    bool reused = false;
    const TridiagCholesky& fact = op.shifted_factorization(shift, &reused);

    const std::size_t n = op.size();
    std::vector<double> rhs(n);
    auto m = op.m_diag();
    for (std::size_t i = 0; i < n; ++i) rhs[i] = m[i] * v[i];

    LinearSolveReport report;
    report.factorization_reused = reused;
    report.w = fact.solve(rhs);

    std::vector<double> kw(n);
    op.apply_stiffness(report.w, kw);
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = kw[i] + shift * m[i] * report.w[i] - rhs[i];
        r2 += r * r;
    }
    report.residual_norm = std::sqrt(r2);
    return report;
}

double norm_alpha(const WeightedOperator& op, std::span<const double> u) {
    if (u.size() != op.size())
        throw std::invalid_argument("norm_alpha: dimension mismatch");
    return std::sqrt(op.stiffness_quadratic(u) + op.mass_quadratic(u));
}

double smallest_nonzero_eigenvalue(const WeightedOperator& op, double rel_tol,
                                   int max_iters) {
    return smallest_nonzero_eigenpair(op, rel_tol, max_iters).first;
}

std::pair<double, std::vector<double>> smallest_nonzero_eigenpair(
    const WeightedOperator& op, double rel_tol, int max_iters) {
    const std::size_t n = op.size();
    if (n < 3)
        throw std::invalid_argument("smallest_nonzero_eigenvalue: mesh too coarse");

    // K restricted to the complement of constants is definite; pin the last
    // node to zero and solve with the leading (n-1)x(n-1) block, which is an
    // SPD M-matrix. Compatibility of the right-hand side is guaranteed by
    // deflating the constant mode in the M inner product.
    std::vector<double> kd(op.k_diag().begin(), op.k_diag().end() - 1);
    std::vector<double> ko(op.k_off().begin(), op.k_off().end() - 1);
    TridiagCholesky reduced(kd, ko);

    const double measure = op.domain_measure();
    auto m = op.m_diag();

    auto deflate = [&](std::vector<double>& v) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += m[i] * v[i];
        mean /= measure;
        for (std::size_t i = 0; i < n; ++i) v[i] -= mean;
    };

    std::mt19937_64 rng(0x5eedu);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = unif(rng);
    deflate(v);
    double vnorm = std::sqrt(op.mass_quadratic(v));
    for (auto& x : v) x /= vnorm;

    std::vector<double> rhs(n), z(n), kz(n);
    double mu = 0.0, mu_prev = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] = m[i] * v[i];
        reduced.solve(std::span<const double>(rhs.data(), n - 1),
                      std::span<double>(z.data(), n - 1));
        z[n - 1] = 0.0;
        deflate(z);

        op.apply_stiffness(z, kz);
        double num = 0.0;
        for (std::size_t i = 0; i < n; ++i) num += z[i] * kz[i];
        const double den = op.mass_quadratic(z);
        mu = num / den;

        const double znorm = std::sqrt(den);
        for (std::size_t i = 0; i < n; ++i) v[i] = z[i] / znorm;

        if (it > 0 && std::abs(mu - mu_prev) <= rel_tol * std::abs(mu)) {
            double sup = 0.0;
            for (double x : v) sup = std::max(sup, std::abs(x));
            for (auto& x : v) x /= sup;
            return {mu, std::move(v)};
        }
        mu_prev = mu;
    }
    throw std::runtime_error("smallest_nonzero_eigenvalue: inverse iteration did not converge");
}

void write_matrix_coordinate(const WeightedOperator& op, std::ostream& os) {
    const std::size_t n = op.size();
    os << "# matrix K (row col value)\n";
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) os << i << ' ' << i - 1 << ' ' << op.k_off()[i - 1] << '\n';
        os << i << ' ' << i << ' ' << op.k_diag()[i] << '\n';
        if (i + 1 < n) os << i << ' ' << i + 1 << ' ' << op.k_off()[i] << '\n';
    }
    os << "# matrix M (row col value)\n";
    for (std::size_t i = 0; i < n; ++i)
        os << i << ' ' << i << ' ' << op.m_diag()[i] << '\n';
}

} // namespace aplab
