#include "aplab/continuation.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace aplab;

namespace {

ProblemSpec make_spec(double xl, double xr, Nonlinearity f, int n = 100,
                      double h0 = 0.0) {
    ProblemSpec spec;
    spec.mesh = build_mesh(xl, xr, n, 2.0, 1);
    spec.alpha = 0.5;
    spec.f = std::move(f);
    spec.phi.assign(spec.mesh.n_nodes(), 1.0);
    spec.h.assign(spec.mesh.n_nodes(), h0);
    spec.validate();
    return spec;
}

Solution solve_at(const ProblemSpec& spec, const WeightedOperator& op, double t,
                  double c0) {
    const SolveResult r =
        newton(spec, op, t, constant_vector(spec.n_nodes(), c0), {});
    REQUIRE(r.converged());
    return *r.solution;
}

double sup_dist_to(std::span<const double> u, double c) {
    double m = 0.0;
    for (double x : u) m = std::max(m, std::abs(x - c));
    return m;
}

} // namespace

TEST_CASE("trace_branch follows the constant tent of the piecewise model") {
    const ProblemSpec spec = make_spec(0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0));
    const WeightedOperator op = assemble(spec.mesh, spec.alpha);
    const Solution start = solve_at(spec, op, -2.0, -2.0);

    const Branch branch = trace_branch(spec, op, -2.0, start, 0.05, 0.5, {});
    REQUIRE(branch.points.size() >= 3);
    CHECK_FALSE(branch.stalled);

    for (const auto& p : branch.points) {
        // Residual tolerance for every accepted point.
        const auto F = residual(spec, op, p.u, p.t);
        double rn = 0.0;
        for (double x : F) rn += x * x;
        CHECK(std::sqrt(rn) <= 1e-8);
        // Constant-branch oracle: u = t on the rising side, u = -t beyond
        // the fold.
        const double expect = p.tangent_dt > 0.0 ? p.t : -p.t;
        CHECK(sup_dist_to(p.u, expect) <= 1e-6);
    }

    REQUIRE(branch.fold.has_value());
    CHECK(std::abs(branch.fold->t) <= 1e-6);
    CHECK(sup_dist_to(branch.fold->u, 0.0) <= 1e-4);
}

TEST_CASE("trace_branch on the smooth model matches t = 1 - sqrt(1+c^2)") {
    const ProblemSpec spec = make_spec(0.0, 1.0, Nonlinearity::smooth_abs());
    const WeightedOperator op = assemble(spec.mesh, spec.alpha);
    const Solution start = solve_at(spec, op, -3.0, -std::sqrt(15.0));

    const Branch branch = trace_branch(spec, op, -3.0, start, 0.1, 0.5, {});
    REQUIRE(branch.fold.has_value());
    CHECK(std::abs(branch.fold->t) <= 1e-6);

    for (const auto& p : branch.points) {
        const double c = p.u[p.u.size() / 2];
        CHECK(p.t == doctest::Approx(1.0 - std::sqrt(1.0 + c * c)).epsilon(1e-6));
    }
}

TEST_CASE("detect_fold: absent when the trace stops before the turn") {
    const ProblemSpec spec = make_spec(0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0));
    const WeightedOperator op = assemble(spec.mesh, spec.alpha);
    const Solution start = solve_at(spec, op, -2.0, -2.0);
    const Branch branch = trace_branch(spec, op, -2.0, start, 0.05, -1.0, {});
    CHECK_FALSE(branch.fold.has_value());
}

TEST_CASE("bracket_t_star encloses the threshold") {
    SUBCASE("piecewise model, threshold 0") {
        const ProblemSpec spec =
            make_spec(0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0));
        const WeightedOperator op = assemble(spec.mesh, spec.alpha);
        const auto [lo, hi] = bracket_t_star(spec, op, -1.0, 1.0, 1e-4, {});
        CHECK(hi - lo <= 1e-4);
        CHECK(lo <= 0.0);
        CHECK(hi >= 0.0);
    }
    SUBCASE("smooth model: the necessary bound overestimates the threshold") {
        const ProblemSpec spec = make_spec(0.0, 1.0, Nonlinearity::smooth_abs());
        const WeightedOperator op = assemble(spec.mesh, spec.alpha);
        CHECK(necessary_upper_bound(spec) == doctest::Approx(1.0).epsilon(1e-12));
        const auto [lo, hi] = bracket_t_star(spec, op, -1.0, 2.0, 1e-4, {});
        CHECK(hi - lo <= 1e-4);
        CHECK(std::abs(0.5 * (lo + hi)) <= 1e-4);
    }
    SUBCASE("forcing offset h = -0.5 shifts the threshold to 0.5") {
        const ProblemSpec spec = make_spec(
            0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0), 100, -0.5);
        const WeightedOperator op = assemble(spec.mesh, spec.alpha);
        const auto [lo, hi] = bracket_t_star(spec, op, 0.0, 2.0, 1e-4, {});
        CHECK(std::abs(0.5 * (lo + hi) - 0.5) <= 1e-4);
    }
    SUBCASE("precondition violation reported") {
        const ProblemSpec spec =
            make_spec(0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0));
        const WeightedOperator op = assemble(spec.mesh, spec.alpha);
        CHECK_THROWS_AS(bracket_t_star(spec, op, -3.0, -1.0, 1e-4, {}),
                        std::invalid_argument);
    }
}

TEST_CASE("fold and bracket agree on the threshold") {
    for (const bool use_pl : {true, false}) {
        const ProblemSpec spec =
            make_spec(0.0, 1.0, use_pl ? Nonlinearity::piecewise_linear(1.0, 1.0)
                                       : Nonlinearity::smooth_abs());
        const WeightedOperator op = assemble(spec.mesh, spec.alpha);
        const double c0 = use_pl ? -2.0 : -std::sqrt(8.0);
        const Solution start = solve_at(spec, op, -2.0, c0);
        const Branch branch = trace_branch(spec, op, -2.0, start, 0.05, 1.0, {});
        REQUIRE(branch.fold.has_value());
        const auto [lo, hi] = bracket_t_star(spec, op, -1.0, 1.0, 1e-4, {});
        CHECK(std::abs(branch.fold->t - 0.5 * (lo + hi)) <= 10.0 * 1e-4);
    }
}

TEST_CASE("local_index: signs on the two constant branches") {
    // Unit interval: mu1 (about 6.4 at alpha = 0.5) is far above the slope
    // a = 1, so u = +1 carries exactly one negative eigenvalue.
    const ProblemSpec spec = make_spec(0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0));
    const WeightedOperator op = assemble(spec.mesh, spec.alpha);
    REQUIRE(smallest_nonzero_eigenvalue(op) > 1.0);

    CHECK(local_index(spec, op, constant_vector(spec.n_nodes(), -1.0), -1.0) == 1);
    CHECK(local_index(spec, op, constant_vector(spec.n_nodes(), 1.0), -1.0) == -1);
}

TEST_CASE("local_index: degenerate outcomes at the fold") {
    const ProblemSpec pl = make_spec(0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0));
    const WeightedOperator op = assemble(pl.mesh, pl.alpha);
    // Kink of f' at the fold solution: one-sided conventions disagree.
    CHECK(local_index(pl, op, constant_vector(pl.n_nodes(), 0.0), 0.0) == 0);

    // Smooth model at the fold: f'(0) = 0 makes the Jacobian exactly K,
    // which is singular.
    const ProblemSpec sa = make_spec(0.0, 1.0, Nonlinearity::smooth_abs());
    CHECK(local_index(sa, op, constant_vector(sa.n_nodes(), 0.0), 0.0) == 0);
}

TEST_CASE("index pair {+1, -1} inside the two-solution regime, minimal has +1") {
    const ProblemSpec spec = make_spec(0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0));
    const WeightedOperator op = assemble(spec.mesh, spec.alpha);
    for (const double t : {-2.0, -1.0, -0.4}) {
        const auto sols = find_all_solutions(spec, op, t, {});
        REQUIRE(sols.size() == 2);
        CHECK(sols[0].index == 1);  // minimal (monotone) solution
        CHECK(sols[1].index == -1);
        CHECK(*sols[0].index + *sols[1].index == 0);
    }
}

TEST_CASE("local_index is stable under mesh refinement on constant branches") {
    for (const int n : {200, 400}) {
        const ProblemSpec spec =
            make_spec(0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0), n);
        const WeightedOperator op = assemble(spec.mesh, spec.alpha);
        CHECK(local_index(spec, op, constant_vector(spec.n_nodes(), -1.0), -1.0) == 1);
        CHECK(local_index(spec, op, constant_vector(spec.n_nodes(), 1.0), -1.0) == -1);
    }
}

TEST_CASE("degree_over_region reproduces the three regional values") {
    const ProblemSpec spec = make_spec(0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0));
    const WeightedOperator op = assemble(spec.mesh, spec.alpha);
    const RegionSpec region{0.5, 2.0, 10.0};

    const auto sols = find_all_solutions(spec, op, -1.0, {});
    REQUIRE(sols.size() == 2);
    const DegreeReport rep = degree_over_region(spec, op, region, -1.0, sols);
    CHECK(rep.deg_G == 1);
    CHECK(rep.deg_ball == 0);
    CHECK(rep.deg_ball_minus_G == -1);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].in_G);
    CHECK_FALSE(rep.rows[1].in_G);
    CHECK(rep.rows[0].in_ball);
    CHECK(rep.rows[1].in_ball);
    CHECK_FALSE(rep.caveat.empty());
}

TEST_CASE("degree_over_region: empty lists and degenerate indices") {
    const ProblemSpec spec = make_spec(0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0));
    const WeightedOperator op = assemble(spec.mesh, spec.alpha);
    const RegionSpec region{0.5, 2.0, 10.0};

    const DegreeReport empty = degree_over_region(spec, op, region, 1.0, {});
    CHECK(empty.deg_G == 0);
    CHECK(empty.deg_ball == 0);
    CHECK(empty.deg_ball_minus_G == 0);

    // A fold solution carries index 0 and must be refused.
    const auto at_fold = find_all_solutions(spec, op, 0.0, {});
    REQUIRE(at_fold.size() == 1);
    REQUIRE(at_fold[0].index == 0);
    CHECK_THROWS_WITH_AS(
        degree_over_region(spec, op, region, 0.0, at_fold),
        doctest::Contains("degenerate index"), std::runtime_error);

    RegionSpec bad{1.0, 2.0, 1.5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("verify_homotopy_boundary: positive sampled margin away from t*") {
    const ProblemSpec spec = make_spec(0.0, 1.0, Nonlinearity::piecewise_linear(1.0, 1.0));
    const WeightedOperator op = assemble(spec.mesh, spec.alpha);
    const RegionSpec region{0.5, 2.0, 10.0};

    const BoundaryMarginReport rep =
        verify_homotopy_boundary(spec, op, -2.0, region, 11, 50, 12345);
    CHECK(rep.min_margin > 0.0);
    CHECK(rep.min_margin_plus > 0.0);
    CHECK(rep.min_margin_minus > 0.0);
    CHECK(rep.s_samples == 11);
    CHECK(rep.v_samples == 50);

    // Determinism under a fixed seed.
    const BoundaryMarginReport rep2 =
        verify_homotopy_boundary(spec, op, -2.0, region, 11, 50, 12345);
    CHECK(rep.min_margin == rep2.min_margin);
}
