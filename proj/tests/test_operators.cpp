#include "aplab/operators.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace aplab;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo,
                                  double hi) {
    std::uniform_real_distribution<double> unif(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = unif(rng);
    return v;
}

// Manufactured problem for the shifted solve: u = cos(pi x), rhs derived by
// differentiating the flux analytically.
double manufactured_rhs(double x, double alpha, double shift) {
    const double sgn = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    const double wpow =
        x == 0.0 ? (alpha == 1.0 ? 1.0 : 0.0) : std::pow(std::abs(x), alpha - 1.0);
    const double w = x == 0.0 ? (alpha == 0.0 ? 1.0 : 0.0)
                              : std::pow(std::abs(x), alpha);
    return alpha * kPi * wpow * sgn * std::sin(kPi * x) +
           kPi * kPi * w * std::cos(kPi * x) + shift * std::cos(kPi * x);
}

double manufactured_l2_error(int n, double alpha) {
    const Mesh mesh = build_mesh(-1.0, 1.0, n, 2.0, 1);
    const WeightedOperator op = assemble(mesh, alpha);
    std::vector<double> rhs(mesh.n_nodes());
    for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs[i] = manufactured_rhs(mesh.nodes[i], alpha, 1.0);
    const auto w = solve_shifted(op, 1.0, rhs).w;
    double err2 = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        const double e = w[i] - std::cos(kPi * mesh.nodes[i]);
        err2 += op.m_diag()[i] * e * e;
    }
    return std::sqrt(err2);
}

} // namespace

TEST_CASE("assemble: alpha = 0 on a uniform mesh gives the standard Laplacian") {
    const Mesh mesh = build_mesh(0.0, 1.0, 10, 1.0, 1);
    const WeightedOperator op = assemble(mesh, 0.0);
    const double h = 0.1;
    for (std::size_t i = 1; i + 1 < op.size(); ++i) {
        CHECK(op.k_diag()[i] == doctest::Approx(2.0 / h).epsilon(1e-12));
        CHECK(op.k_off()[i - 1] == doctest::Approx(-1.0 / h).epsilon(1e-12));
    }
}

TEST_CASE("assemble: cell next to the degeneracy, alpha = 1") {
    // Cell (0, h): weight integral h^2/2, stiffness factor 1/2.
    const Mesh mesh = build_mesh(0.0, 1.0, 2, 1.0, 1);
    const WeightedOperator op = assemble(mesh, 1.0);
    CHECK(op.k_off()[0] == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("assemble: constants lie in the stiffness kernel") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        const double alpha = 1.999 * unif(rng);
        const Mesh mesh =
            build_mesh(-1.0 - unif(rng), 1.0 + unif(rng), 50, 1.5, 1);
        const WeightedOperator op = assemble(mesh, alpha);
        std::vector<double> ones(op.size(), 1.0), out(op.size());
        op.apply_stiffness(ones, out);
        double scale = 0.0;
        for (std::size_t i = 0; i < op.size(); ++i)
            scale = std::max(scale, op.k_diag()[i]);
        for (double v : out) CHECK(std::abs(v) <= 1e-14 * scale);
    }
}

TEST_CASE("assemble: M-matrix sign structure, degeneracy does not disconnect") {
    const Mesh mesh = build_mesh(-1.0, 1.0, 40, 2.0, 1);
    const WeightedOperator op = assemble(mesh, 1.5);
    for (double v : op.k_off()) CHECK(v < 0.0);
    for (double v : op.m_diag()) CHECK(v > 0.0);
    const std::size_t zero = *mesh.origin_node();
    CHECK(std::abs(op.k_off()[zero - 1]) > 0.0);
    CHECK(std::abs(op.k_off()[zero]) > 0.0);
}

TEST_CASE("solve_shifted: constants map to kappa / c") {
    const Mesh mesh = build_mesh(-1.0, 1.0, 100, 2.0, 1);
    const WeightedOperator op = assemble(mesh, 0.5);
    for (double kappa : {1.0, -3.5, 0.25}) {
        const auto rep = solve_shifted(op, 2.0, std::vector<double>(op.size(), kappa));
        for (double w : rep.w)
            CHECK(w == doctest::Approx(kappa / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("solve_shifted: positivity and comparison (discrete maximum principle)") {
    const Mesh mesh = build_mesh(-1.0, 1.0, 120, 2.0, 1);
    const WeightedOperator op = assemble(mesh, 0.7);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        const auto v1 = random_vector(rng, op.size(), 0.0, 1.0);
        const auto w1 = solve_shifted(op, 1.0, v1).w;
        for (double w : w1) CHECK(w >= -1e-12);

        auto v2 = v1;
        const auto bump = random_vector(rng, op.size(), 0.0, 1.0);
        for (std::size_t i = 0; i < v2.size(); ++i) v2[i] += bump[i];
        const auto w2 = solve_shifted(op, 1.0, v2).w;
        for (std::size_t i = 0; i < w1.size(); ++i) CHECK(w2[i] >= w1[i] - 1e-12);
    }
}

TEST_CASE("solve_shifted: factorization cache and residual report") {
    const Mesh mesh = build_mesh(0.0, 1.0, 50, 2.0, 1);
    const WeightedOperator op = assemble(mesh, 0.5);
    std::mt19937_64 rng(9);
    const auto v = random_vector(rng, op.size(), -1.0, 1.0);
    const auto rep1 = solve_shifted(op, 1.0, v);
    CHECK_FALSE(rep1.factorization_reused);
    const auto rep2 = solve_shifted(op, 1.0, v);
    CHECK(rep2.factorization_reused);
    CHECK(rep1.residual_norm <= 1e-12);
    CHECK_THROWS_AS(solve_shifted(op, -1.0, v), std::invalid_argument);
}

TEST_CASE("solve_shifted: discrete divergence identity") {
    const Mesh mesh = build_mesh(-1.0, 1.0, 80, 2.0, 1);
    const WeightedOperator op = assemble(mesh, 0.5);
    std::mt19937_64 rng(17);
    for (int k = 0; k < 100; ++k) {
        const auto v = random_vector(rng, op.size(), -1.0, 1.0);
        const auto w = solve_shifted(op, 1.5, v).w;
        double s = 0.0;
        for (std::size_t i = 0; i < op.size(); ++i)
            s += op.m_diag()[i] * (v[i] - 1.5 * w[i]);
        CHECK(std::abs(s) <= 1e-10);
    }
}

TEST_CASE("solve_shifted: symmetry of the shifted operator") {
    const Mesh mesh = build_mesh(-1.0, 1.0, 60, 2.0, 1);
    const WeightedOperator op = assemble(mesh, 1.0);
    std::mt19937_64 rng(21);
    std::vector<double> au(op.size()), av(op.size());
    for (int k = 0; k < 100; ++k) {
        const auto u = random_vector(rng, op.size(), -1.0, 1.0);
        const auto v = random_vector(rng, op.size(), -1.0, 1.0);
        op.apply_stiffness(u, au);
        op.apply_stiffness(v, av);
        double uav = 0.0, vau = 0.0, nu = 0.0, nv = 0.0;
        for (std::size_t i = 0; i < op.size(); ++i) {
            uav += u[i] * (av[i] + 2.0 * op.m_diag()[i] * v[i]);
            vau += v[i] * (au[i] + 2.0 * op.m_diag()[i] * u[i]);
            nu += u[i] * u[i];
            nv += v[i] * v[i];
        }
        CHECK(std::abs(uav - vau) <= 1e-12 * std::sqrt(nu) * std::sqrt(nv));
    }
}

TEST_CASE("solve_shifted: manufactured solution converges at second order") {
    for (double alpha : {0.0, 1.0}) {
        std::vector<double> errs;
        for (int n : {50, 100, 200, 400}) errs.push_back(manufactured_l2_error(n, alpha));
        const double rate = std::log2(errs[errs.size() - 2] / errs.back());
        INFO("alpha = ", alpha, ", last rate = ", rate);
        CHECK(rate >= 1.5);
        if (alpha == 0.0) CHECK(rate >= 1.9);
    }
}

TEST_CASE("norm_alpha: zero, constants, and a linear ramp") {
    const Mesh mesh = build_mesh(0.0, 1.0, 1000, 1.0, 1);
    const WeightedOperator op = assemble(mesh, 1.0);

    CHECK(norm_alpha(op, std::vector<double>(op.size(), 0.0)) == 0.0);
    CHECK(norm_alpha(op, std::vector<double>(op.size(), 1.0)) ==
          doctest::Approx(1.0).epsilon(1e-13));

    std::vector<double> ramp(mesh.nodes);
    // Exact value sqrt(int x dx + int x^2 dx) = sqrt(5/6); lumped mass
    // commits an O(h^2) quadrature error on the second integral.
    const double exact = std::sqrt(
        oracle::adaptive_simpson([](double x) { return x; }, 0.0, 1.0, 1e-14) +
        oracle::adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0, 1e-14));
    CHECK(exact == doctest::Approx(std::sqrt(5.0 / 6.0)).epsilon(1e-13));
    CHECK(norm_alpha(op, ramp) == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("smallest_nonzero_eigenvalue: classical Neumann values at alpha = 0") {
    {
        const Mesh mesh = build_mesh(0.0, 1.0, 400, 1.0, 1);
        const WeightedOperator op = assemble(mesh, 0.0);
        CHECK(smallest_nonzero_eigenvalue(op) ==
              doctest::Approx(kPi * kPi).epsilon(2e-4));
    }
    {
        const Mesh mesh = build_mesh(-1.0, 1.0, 400, 1.0, 1);
        const WeightedOperator op = assemble(mesh, 0.0);
        CHECK(smallest_nonzero_eigenvalue(op) ==
              doctest::Approx(kPi * kPi / 4.0).epsilon(2e-4));
    }
}

TEST_CASE("smallest_nonzero_eigenvalue: weighted case against the Sturm oracle") {
    const Mesh mesh = build_mesh(0.0, 1.0, 2000, 2.0, 1);
    const WeightedOperator op = assemble(mesh, 1.0);
    const double mu = smallest_nonzero_eigenvalue(op);
    // Second-smallest eigenvalue of the pencil (the smallest is the zero
    // mode), located independently by Sturm-sequence bisection.
    const double ref =
        oracle::sturm_eigenvalue(op.k_diag(), op.k_off(), op.m_diag(), 1);
    CHECK(mu == doctest::Approx(ref).epsilon(1e-7));
}

TEST_CASE("eigenpair vector is a nonconstant mode") {
    const Mesh mesh = build_mesh(-1.0, 1.0, 200, 2.0, 1);
    const WeightedOperator op = assemble(mesh, 0.5);
    const auto [mu, psi] = smallest_nonzero_eigenpair(op);
    CHECK(mu > 0.0);
    // Residual check: ||K psi - mu M psi|| small relative to ||K psi||.
    std::vector<double> kpsi(op.size());
    op.apply_stiffness(psi, kpsi);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i) {
        const double r = kpsi[i] - mu * op.m_diag()[i] * psi[i];
        num += r * r;
        den += kpsi[i] * kpsi[i];
    }
    CHECK(std::sqrt(num / den) < 1e-5);
}

TEST_CASE("matrix coordinate dump") {
    const Mesh mesh = build_mesh(0.0, 1.0, 2, 1.0, 1);
    const WeightedOperator op = assemble(mesh, 0.0);
    std::ostringstream os;
    write_matrix_coordinate(op, os);
    CHECK(os.str().find("# matrix K (row col value)") != std::string::npos);
    CHECK(os.str().find("# matrix M (row col value)") != std::string::npos);
}
