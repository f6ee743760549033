#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "spm/density.hpp"
#include "spm/errors.hpp"
#include "spm/two_cut.hpp"

using namespace spm;
using std::numbers::pi;

namespace {

// Plain tanh-sinh integration of rho f over every cut, independent of the Chebyshev rule.
double ts_integral(const DensityFn& rho, const std::function<double(double)>& f) {
    boost::math::quadrature::tanh_sinh<double> ts;
    double s = 0.0;
    for (const Cut& c : rho.cuts()) s += ts.integrate([&](double x) { return rho(x) * f(x); }, c.lo, c.hi);
    return s;
}

}  // namespace

TEST_CASE("Chebyshev rule of the second kind") {
    const ChebyshevRule r = chebyshev_second_kind(16);
    double w = 0.0, w2 = 0.0;
    for (int k = 0; k < 16; ++k) {
        w += r.w[k];
        w2 += r.w[k] * r.t[k] * r.t[k];
    }
    // int sqrt(1 - t^2) = pi/2, int t^2 sqrt(1 - t^2) = pi/8
    CHECK(w == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(w2 == doctest::Approx(pi / 8).epsilon(1e-15));
}

TEST_CASE("semicircle closed-form values") {
    const DensityFn sc = semicircle_density();
    CHECK(std::abs(sc(0.0) - 1.0 / pi) < 1e-12);
    CHECK(sc(2.5) == 0.0);
    const ConstraintReport rep = constraint_report(sc, 3.0);
    CHECK(std::abs(rep.norm - 1.0) < 1e-14);
    CHECK(std::abs(rep.trace) < 1e-15);
    CHECK(sc.integrate([](double x) { return x * x; }) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sc.integrate([](double x) { return x * x * x * x; }) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::abs(log_energy(sc) + 0.25) < 1e-12);
    CHECK(std::abs(action(sc, 3.0, 0.0, 0.0) - semicircle_action()) < 1e-12);
    CHECK(semicircle_action() == 0.375);
}

TEST_CASE("semicircle log energy against Monte Carlo") {
    // uniform points on a disk of radius 2 project onto the semicircle
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto draw = [&] { return 2.0 * std::sqrt(u(rng)) * std::cos(2.0 * pi * u(rng)); };
    const int n = 1000000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double v = std::log(std::abs(draw() - draw()));
        s += v;
        s2 += v * v;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - log_energy(semicircle_density())) < 5.0 * se);
}

TEST_CASE("chi0 closed form and quadrature") {
    CHECK(chi0(2.5).value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(chi0(2.0).divergent);
    for (double a : {2.1, 2.5, 3.0, 5.0}) {
        CAPTURE(a);
        CHECK(std::abs(susceptibility(semicircle_density(), a) - chi0(a).value) < 1e-8);
    }
}

TEST_CASE("Sherrington-Kirkpatrick pole position") {
    CHECK(sk_a_of_beta(1.0) == 2.0);
    CHECK(sk_a_of_beta(2.0) == 2.5);
    CHECK_THROWS_AS(sk_a_of_beta(0.0), ConfigError);
}

TEST_CASE("two-cut quadrature against tanh-sinh") {
    const TwoCutSolution sol = solve_endpoints({2.5, 0.1, 2});
    const DensityFn rho = two_cut_density(sol);
    CHECK(rho.integrate([](double) { return 1.0; }) == doctest::Approx(ts_integral(rho, [](double) { return 1.0; })).epsilon(1e-10));
    const auto chi_f = [](double x) { return 1.0 / ((2.5 - x) * (2.5 - x)); };
    CHECK(susceptibility(rho, 2.5) == doctest::Approx(ts_integral(rho, chi_f)).epsilon(1e-9));
}

TEST_CASE("susceptibility at a = 2.5 is not monotone in A") {
    const double c1 = susceptibility_of_solution(solve_endpoints({2.5, 0.1, 2}));
    const double c2 = susceptibility_of_solution(solve_endpoints({2.5, 0.2, 2}));
    CHECK(c1 == doctest::Approx(0.33438893637981754).epsilon(1e-10));
    CHECK(c2 == doctest::Approx(0.30523561869046023).epsilon(1e-10));
    CHECK(c2 < c1);
    const double small = susceptibility_of_solution(solve_endpoints({2.5, 0.001, 2}));
    CHECK(small > chi0(2.5).value);
}

TEST_CASE("two-cut log energy from the constant effective potential on each cut") {
    // On cut k, int ln|x - y| rho(y) dy = V(x)/2 - c_k, so the double integral is
    // sum_k ( int_k V rho / 2 - c_k m_k ) with c_k read off at the left edge of the cut.
    const TwoCutSolution sol = solve_endpoints({1.5, 0.1, 2});
    const DensityFn rho = two_cut_density(sol);
    boost::math::quadrature::tanh_sinh<double> ts;
    double oracle = 0.0;
    for (std::size_t k = 0; k < rho.cuts().size(); ++k) {
        const double x0 = rho.cuts()[k].lo;
        double inner = 0.0;
        for (const Cut& c : rho.cuts()) {
            inner += ts.integrate([&](double y) { return std::log(std::abs(x0 - y)) * rho(y); }, c.lo, c.hi);
        }
        const double ck = 0.5 * eval_potential(sol.params, x0) - inner;
        const double vk = rho.cut_integral(k, [&](double x) { return eval_potential(sol.params, x); });
        oracle += 0.5 * vk - ck * rho.mass(k);
    }
    CHECK(log_energy(rho, 512) == doctest::Approx(oracle).epsilon(1e-7));
    CHECK(log_energy(rho) == doctest::Approx(-0.19998320271814191).epsilon(1e-9));
}

TEST_CASE("quadrature self-convergence under node doubling") {
    for (double A : {0.01, 0.1, 1.0}) {
        const TwoCutSolution sol = solve_endpoints({2.5, A, 2});
        const DensityFn rho = two_cut_density(sol);
        CHECK(std::abs(susceptibility(rho, 2.5, 256) - susceptibility(rho, 2.5, 512)) < 1e-8);
        CHECK(std::abs(log_energy(rho, 256) - log_energy(rho, 512)) < 1e-8);
        CHECK(std::abs(action(sol, 0.35, 256) - action(sol, 0.35, 512)) < 1e-8);
    }
}

TEST_CASE("susceptibility inversion and the rate function") {
    const double A = 0.003;
    const double chi = susceptibility_of_solution(solve_endpoints({2.5, A, 2}));
    CHECK(invert_susceptibility(2.5, chi) == doctest::Approx(A).epsilon(1e-8));
    CHECK_THROWS_AS(invert_susceptibility(2.0, 0.5), OutOfRange);
    CHECK_THROWS_AS(invert_susceptibility(2.5, 0.3), OutOfRange);
    // chi(A) at a = 2.5 peaks near 0.3813
    CHECK_THROWS_AS(invert_susceptibility(2.5, 0.4), OutOfRange);
    CHECK(std::abs(rate_function(2.5, chi0(2.5).value)) < 1e-12);

    const double grid[] = {0.34, 0.35, 0.3667, 0.38};
    const double psi_frozen[] = {8.8869922115764055e-07, 1.5974138137364591e-05, 0.00018670470108528292,
                                 0.0011588648929412027};
    double prev = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double psi = rate_function(2.5, grid[k]);
        CHECK(psi == doctest::Approx(psi_frozen[k]).epsilon(1e-6));
        CHECK(psi > prev);
        prev = psi;
    }
}

TEST_CASE("rate function slope from the effective potential on each cut") {
    // psi' = -A + (U_right - U_left) dm_right/dchi, with U = V/2 - int ln|x - y| rho(y) dy
    // constant on each cut; the second term is absent only when both cuts share one constant.
    const double c = 0.35, h = 1e-5;
    const double slope = (rate_function(2.5, c + h) - rate_function(2.5, c - h)) / (2 * h);
    const double A = invert_susceptibility(2.5, c);
    const TwoCutSolution sol = solve_endpoints({2.5, A, 2});
    const DensityFn rho = two_cut_density(sol);
    boost::math::quadrature::tanh_sinh<double> ts;
    auto U = [&](double x0) {
        double inner = 0.0;
        for (const Cut& cut : rho.cuts()) {
            inner += ts.integrate([&](double y) { return std::log(std::abs(x0 - y)) * rho(y); }, cut.lo, cut.hi);
        }
        return 0.5 * eval_potential(sol.params, x0) - inner;
    };
    const double d = 1e-4 * A;
    const TwoCutSolution up = solve_endpoints({2.5, A + d, 2}), down = solve_endpoints({2.5, A - d, 2});
    const double dm = two_cut_density(up).mass(1) - two_cut_density(down).mass(1);
    const double dchi = susceptibility_of_solution(up) - susceptibility_of_solution(down);
    const double predicted = -A + (U(sol.support.x4) - U(sol.support.x1)) * dm / dchi;
    CHECK(slope == doctest::Approx(predicted).epsilon(1e-4));
    CHECK(slope > 0.0);
}

TEST_CASE("minimum density locates the smallest interior value") {
    const DensityFn sc = semicircle_density();
    const MinimumDensity md = minimum_density(sc);
    CHECK(md.value >= 0.0);
    CHECK(md.value < 0.01);
    const DensityFn bump({Cut{-1.0, 1.0}}, [](double x, std::size_t) { return (x - 0.3) * (x - 0.3) - 0.04; });
    const MinimumDensity mb = minimum_density(bump);
    // h(x) sqrt(1 - x^2) has its minimum close to x = 0.3
    CHECK(std::abs(mb.location - 0.3) < 0.02);
    CHECK(mb.value < -0.03);
}
