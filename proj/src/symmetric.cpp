#include "spm/symmetric.hpp"

#include <cmath>
#include <numbers>

#include "spm/errors.hpp"

namespace spm {

using std::numbers::pi;

SymmetricSolution solve_symmetric(double A) {
    if (!(A > 0.0)) throw Infeasible("the symmetric endpoints are real only for A > 0");
    auto f = [A](double s) { return std::pow(0.25 * s * s - s, 1.5) - 2.0 * A * s; };
    double lo = 4.0;
    double hi = 8.0;
    while (f(hi) <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NoConvergence("no upper bracket for the symmetric solve", f(lo));
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? hi : lo) = mid;
    }
    SymmetricSolution sol;
    sol.A = A;
    sol.s = 0.5 * (lo + hi);
    sol.e2 = -sol.s;
    sol.e4 = 0.25 * sol.s * sol.s - sol.s;
    // t^2 - s t + e4 = 0 with discriminant s^2 - 4 e4 = 4 s
    const double r = std::sqrt(sol.s);
    const double t4 = 0.5 * sol.s + r;
    sol.x4 = std::sqrt(t4);
    sol.x3 = std::sqrt(sol.e4 / t4);
    return sol;
}

double density_symmetric(const SymmetricSolution& sol, double x) {
    const double l2 = x * x;
    const double a2 = sol.x3 * sol.x3, b2 = sol.x4 * sol.x4;
    if (!(l2 > a2 && l2 < b2)) return 0.0;
    const double ax = std::abs(x);
    const double d = a2 - b2;
    return 2.0 * (l2 * (a2 + b2) + 2.0 * a2 * b2) / (pi * ax * ax * ax * d * d) * std::sqrt((l2 - a2) * (b2 - l2));
}

double density_symmetric_e(const SymmetricSolution& sol, double x) {
    const double l2 = x * x;
    const double rad = -l2 * l2 - sol.e2 * l2 - sol.e4;
    if (!(rad > 0.0)) return 0.0;
    const double ax = std::abs(x);
    return (l2 - (8.0 + 2.0 * sol.e2) / 4.0) / (2.0 * pi * ax * ax * ax) * std::sqrt(rad);
}

DensityFn symmetric_density(const SymmetricSolution& sol) {
    const double x3 = sol.x3, x4 = sol.x4, e2 = sol.e2;
    auto h = [x3, x4, e2](double x, std::size_t cut) {
        const double o1 = cut == 0 ? x3 : -x4;
        const double o2 = cut == 0 ? x4 : -x3;
        const double ax = std::abs(x);
        return std::abs(x * x - (8.0 + 2.0 * e2) / 4.0) / (2.0 * pi * ax * ax * ax) *
               std::sqrt(std::abs((x - o1) * (x - o2)));
    };
    return DensityFn({Cut{-x4, -x3}, Cut{x3, x4}}, h);
}

TwoCutSupport symmetric_support(const SymmetricSolution& sol) {
    return TwoCutSupport::from_endpoints(-sol.x4, -sol.x3, sol.x3, sol.x4);
}

}  // namespace spm
