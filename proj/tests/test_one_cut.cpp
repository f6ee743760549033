#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spm/density.hpp"
#include "spm/errors.hpp"
#include "spm/one_cut.hpp"
#include "spm/shrink_scan.hpp"
#include "spm/two_cut.hpp"

using namespace spm;

TEST_CASE("gamma coefficients regression") {
    const auto g = gamma_coeffs(OneCutSupport::from_endpoints(-2.0, 2.0), 3.0, 0.5);
    CHECK(g[0] == doctest::Approx(-33.046327811159429).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(29.897944098839726).epsilon(1e-12));
    CHECK(g[2] == doctest::Approx(-9.3935479640399624).epsilon(1e-12));
    CHECK(g[3] == 1.0);
    // A = 0 leaves (p - a)^3
    const auto g0 = gamma_coeffs(OneCutSupport::from_endpoints(-2.0, 2.0), 3.0, 0.0);
    CHECK(g0[0] == doctest::Approx(-27.0));
    CHECK(g0[1] == doctest::Approx(27.0));
    CHECK(g0[2] == doctest::Approx(-9.0));
}

TEST_CASE("semicircle solves the one-cut system at A = 0") {
    for (double a : {2.5, 3.0, 5.0}) {
        const OneCutSupport s = OneCutSupport::from_endpoints(-2.0, 2.0);
        const auto r = one_cut_residuals(s, a, 0.0);
        CHECK(std::abs(r[0]) < 1e-14);
        CHECK(std::abs(r[1]) < 1e-14);
        CHECK(std::abs(traceless_residual(s, a, 0.0)) < 1e-12);
        const OneCutSolution sol = solve_one_cut(a, 0.0);
        CHECK(one_cut_density_eval(sol, 0.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    }
    CHECK_THROWS_AS(solve_one_cut(1.5, 0.0), InvalidSupport);
}

TEST_CASE("non-traceless one-cut solution at a = 2.5, A = 2 is positive and normalized") {
    const OneCutSolution sol = solve_one_cut(2.5, 2.0);
    CHECK(sol.support.y1 == doctest::Approx(-2.2483170578023426).epsilon(1e-9));
    CHECK(sol.support.y2 == doctest::Approx(0.97869339042073633).epsilon(1e-9));
    CHECK(sol.residual_norm < 1e-10);
    CHECK(sol.min_density > 0.0);
    CHECK(std::abs(sol.traceless_residual) > 1e-3);
    const ConstraintReport rep = constraint_report(one_cut_density(sol), 2.5);
    CHECK(std::abs(rep.norm - 1.0) < 1e-10);
    CHECK(std::abs(rep.trace) > 1e-3);
}

TEST_CASE("one-cut density is the discontinuity of L2") {
    // rho(x) 2 pi (x - a)^3 / sqrt((x - y1)(y2 - x)) recovers the cubic numerator
    const OneCutSolution sol = solve_one_cut(2.5, 2.0);
    const double y1 = sol.support.y1, y2 = sol.support.y2;
    for (double t : {0.1, 0.4, 0.8}) {
        const double x = y1 + t * (y2 - y1);
        const double d = x - 2.5;
        const double lhs = one_cut_density_eval(sol, x) * d * d * d * 2.0 * std::numbers::pi /
                           std::sqrt((x - y1) * (y2 - x));
        CHECK(lhs == doctest::Approx(one_cut_numerator(sol.gamma, x)).epsilon(1e-12));
        CHECK(L2(sol, x) == doctest::Approx(one_cut_numerator(sol.gamma, x) / (d * d * d)).epsilon(1e-14));
    }
}

TEST_CASE("critical line") {
    const CriticalPoint c2 = critical_line(2.0);
    CHECK(c2.exists);
    CHECK(c2.degenerate);
    CHECK(std::abs(c2.A) < 1e-8);
    CHECK_FALSE(critical_line(1.5).exists);
    // A_crit -> 0 as a -> 2+
    CHECK(std::abs(critical_line(2.05).A) < 1e-5);

    const double as[] = {2.5, 3.0, 4.0};
    const double crit[] = {-0.0043633996049900091, -0.05270785994801943, -0.66591678714066704};
    const double edge[] = {-0.0074369423161223759, -0.086196747624229353, -1.0217406611052291};
    for (int k = 0; k < 3; ++k) {
        CAPTURE(as[k]);
        const CriticalPoint c = critical_line(as[k]);
        CHECK(c.A == doctest::Approx(crit[k]).epsilon(1e-8));
        CHECK(c.solution.residual_norm < 1e-10);
        CHECK(std::abs(c.solution.traceless_residual) < 1e-10);
        CHECK(c.solution.min_density < 0.0);
        const ConstraintReport rep = constraint_report(one_cut_density(c.solution), as[k]);
        CHECK(std::abs(rep.norm - 1.0) < 1e-8);
        CHECK(std::abs(rep.trace) < 1e-8);

        const EdgePoint e = edge_zero_line(as[k]);
        CHECK(e.A == doctest::Approx(edge[k]).epsilon(1e-8));
        CHECK(std::abs(e.edge_residual) < 1e-10);
        // the edge line is the fold of the branch: larger in magnitude than the critical line
        CHECK(std::abs(e.A) > std::abs(c.A));
    }
}

TEST_CASE("branch tracing meets the edge line before the traceless point") {
    for (double a : {2.5, 3.0, 4.0, 6.0}) {
        CAPTURE(a);
        const auto branch = trace_branch(a);
        REQUIRE(branch.size() > 3);
        CHECK(branch.front().A == 0.0);
        std::size_t first_edge = 0, first_trace = 0;
        for (std::size_t i = 1; i < branch.size(); ++i) {
            if (!first_edge && (branch[i - 1].edge < 0) != (branch[i].edge < 0)) first_edge = i;
            if (i >= 2 && !first_trace && (branch[i - 1].traceless < 0) != (branch[i].traceless < 0)) first_trace = i;
        }
        CHECK(first_edge > 0);
        CHECK(first_trace > first_edge);
        for (std::size_t i = 0; i <= first_trace && i < branch.size(); ++i) CHECK(branch[i].A <= 0.0);
    }
}

TEST_CASE("edge line at moderate a on a grid") {
    double prev = 0.0;
    for (double a = 2.2; a <= 5.0; a += 0.4) {
        CAPTURE(a);
        const EdgePoint e = edge_zero_line(a);
        CHECK(e.A < prev);
        prev = e.A;
        // rho ~ (y2 - x)^{3/2} at the edge, so rho / sqrt(h) scales like h
        const double y2 = e.solution.support.y2;
        const double h = 1e-3 * (y2 - e.solution.support.y1);
        const double r1 = one_cut_density_eval(e.solution, y2 - h) / std::sqrt(h);
        const double r4 = one_cut_density_eval(e.solution, y2 - h / 4) / std::sqrt(h / 4);
        CHECK(std::abs(r4 / r1 - 0.25) < 0.01);
    }
}

TEST_CASE("collapse relation holds at an independent three-equation solve") {
    // The scan point must satisfy the three alpha equations of the collapsed support directly.
    const auto pts = shrink_points(3.0, 1.0);
    REQUIRE(pts.size() == 1);
    const ShrinkPoint& p = pts.front();
    CHECK(p.A == doctest::Approx(0.87444081406395247).epsilon(1e-9));
    CHECK(p.y1 == doctest::Approx(-2.089735).epsilon(1e-6));
    CHECK(p.y2 == doctest::Approx(1.526453).epsilon(1e-6));
    CHECK(std::abs(p.collapse_residual) < 1e-10);
    const TwoCutSupport s = TwoCutSupport::from_endpoints(p.y1, p.y2, 4.0, 4.0);
    const auto al = alpha_coeffs_m2(s, 3.0, p.A);
    const auto r = endpoint_residuals_m2(s, 3.0, p.A);
    CHECK(std::abs(al[2] - 1.0) < 1e-9);
    CHECK(std::abs(r[0]) < 1e-9);
    CHECK(std::abs(r[1]) < 1e-9);
    CHECK(std::abs(r[2]) < 1e-9);
    // the printed relation equals the fourth equation there and does not vanish
    CHECK(p.firstgood_residual == doctest::Approx(0.38127546231896003).epsilon(1e-9));
    CHECK(p.fourth_residual == doctest::Approx(p.firstgood_residual).epsilon(1e-9));
    CHECK_FALSE(p.admissible);
}

TEST_CASE("shrink scan on a reduced grid") {
    ShrinkGrid g;
    g.a_max = 4.0;
    g.a_step = 0.5;
    g.gap_points = 10;
    const ShrinkReport rep = shrink_condition_scan(g);
    CHECK(rep.grid_points == 90);
    CHECK(rep.roots > 0);
    CHECK(rep.constraint_points > 0);
    CHECK(rep.admissible == 0);
    for (const ShrinkPoint& p : rep.points) {
        if (!p.constraints_ok) continue;
        CHECK(std::abs(p.collapse_residual) < 1e-8);
        // the two differ only by the normalization factor x3 - a
        CHECK(p.fourth_residual == doctest::Approx(p.gap * p.firstgood_residual).epsilon(1e-6).scale(1e-8));
    }
}
