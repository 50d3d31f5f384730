#include "aplab/mesh.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace aplab;

TEST_CASE("build_mesh: uniform grading forces the origin as a node") {
    const Mesh m = build_mesh(-1.0, 1.0, 4, 1.0, 1);
    REQUIRE(m.n_nodes() == 5);
    CHECK(m.nodes[0] == -1.0);
    CHECK(m.nodes[1] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(m.nodes[2] == 0.0);
    CHECK(m.nodes[3] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.nodes[4] == 1.0);
    CHECK(m.origin_node() == std::size_t{2});
}

TEST_CASE("build_mesh: quadratic grading of the unit parameter") {
    const Mesh m = build_mesh(0.0, 1.0, 2, 2.0, 1);
    REQUIRE(m.n_nodes() == 3);
    CHECK(m.nodes[0] == 0.0);
    CHECK(m.nodes[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(m.nodes[2] == 1.0);
}

TEST_CASE("build_mesh: radial mesh accepted when anchored at zero") {
    const Mesh m = build_mesh(0.0, 1.0, 100, 2.0, 3);
    CHECK(m.radial_dimension == 3);
    CHECK(m.n_cells() == 100);
}

TEST_CASE("build_mesh: rejects bad input") {
    CHECK_THROWS_AS(build_mesh(0.0, 1.0, 1, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(1.0, 0.0, 4, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(0.5, 1.5, 4, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(0.0, 1.0, 4, 0.5, 1), std::invalid_argument);
}

TEST_CASE("build_mesh: origin is always a node when inside the interval") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.1, 3.0);
    for (int k = 0; k < 50; ++k) {
        const double xl = -unif(rng);
        const double xr = unif(rng);
        const int n = 2 + static_cast<int>(rng() % 40);
        const double gamma = 1.0 + 2.0 * unif(rng) / 3.0;
        const Mesh m = build_mesh(xl, xr, n, gamma, 1);
        REQUIRE(m.origin_node().has_value());
        for (std::size_t i = 1; i < m.n_nodes(); ++i)
            REQUIRE(m.nodes[i - 1] < m.nodes[i]);
    }
}

TEST_CASE("weight_cell_integral: closed forms") {
    CHECK(weight_cell_integral(0.0, 1.0, 0.5, 1) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < 30; ++k) {
        const double h = 0.01 + unif(rng);
        const double alpha = 1.999 * unif(rng);
        CHECK(weight_cell_integral(0.0, h, alpha, 1) ==
              doctest::Approx(std::pow(h, alpha + 1.0) / (alpha + 1.0))
                  .epsilon(1e-14));
    }
}

TEST_CASE("weight_cell_integral: negative-axis cell against quadrature") {
    CHECK(weight_cell_integral(-1.0, -0.5, 1.0, 1) ==
          doctest::Approx(0.375).epsilon(1e-14));
    const double q = oracle::adaptive_simpson(
        [](double x) { return std::abs(x); }, -1.0, -0.5, 1e-14);
    CHECK(weight_cell_integral(-1.0, -0.5, 1.0, 1) ==
          doctest::Approx(q).epsilon(1e-12));

    const double q2 = oracle::adaptive_simpson(
        [](double x) { return std::pow(std::abs(x), 0.7); }, -2.0, -0.3, 1e-14);
    CHECK(weight_cell_integral(-2.0, -0.3, 0.7, 1) ==
          doctest::Approx(q2).epsilon(1e-12));
}

TEST_CASE("weight_cell_integral: rejects straddling cells and bad alpha") {
    CHECK_THROWS_AS(weight_cell_integral(-0.5, 0.5, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(weight_cell_integral(0.0, 1.0, 2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(weight_cell_integral(0.0, 1.0, -0.1, 1), std::invalid_argument);
}

TEST_CASE("weight integrals over a mesh sum to the whole-domain value") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int nd = 1; nd <= 3; ++nd) {
        for (int k = 0; k < 20; ++k) {
            const double alpha = 1.999 * unif(rng);
            const double gamma = 1.0 + 2.0 * unif(rng);
            const int n = 10 + static_cast<int>(rng() % 200);
            const Mesh m = build_mesh(0.0, 1.0, n, gamma, nd);
            double total = 0.0;
            for (std::size_t c = 0; c < m.n_cells(); ++c)
                total += weight_cell_integral(m.nodes[c], m.nodes[c + 1], alpha, nd);
            CHECK(total == doctest::Approx(1.0 / (alpha + nd)).epsilon(1e-12));
        }
    }
}

TEST_CASE("uniform meshes nest under refinement") {
    const Mesh coarse = build_mesh(-1.0, 2.0, 12, 1.0, 1);
    const Mesh fine = build_mesh(-1.0, 2.0, 24, 1.0, 1);
    for (std::size_t i = 0; i < coarse.n_nodes(); ++i)
        CHECK(coarse.nodes[i] == doctest::Approx(fine.nodes[2 * i]).epsilon(1e-13));
}

TEST_CASE("lumped masses sum to the domain measure") {
    for (int nd : {1, 2, 3}) {
        const Mesh m = build_mesh(0.0, 1.0, 37, 2.0, nd);
        const auto lm = lumped_masses(m);
        double total = 0.0;
        for (double v : lm) {
            CHECK(v > 0.0);
            total += v;
        }
        CHECK(total == doctest::Approx(1.0 / nd).epsilon(1e-13));
    }
}

TEST_CASE("mesh table serialization") {
    const Mesh m = build_mesh(0.0, 1.0, 2, 1.0, 1);
    std::ostringstream os;
    write_mesh_table(m, os);
    CHECK(os.str() == "# node\tx\n0\t0\n1\t0.5\n2\t1\n");
}
