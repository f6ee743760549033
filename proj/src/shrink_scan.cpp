#include "spm/shrink_scan.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>

#include "spm/core.hpp"
#include "spm/parallel.hpp"
#include "spm/two_cut.hpp"

namespace spm {

namespace {

// The relation is linear in f2: t (L0 + c f2) = R0 - f2/2.
struct Linear {
    double L0, c;
};

Linear bracket(double f1, double a, ShrinkRelation which) {
    if (which == ShrinkRelation::Traceless) {
        return {a * a * f1 / 2.0 - 0.75 * a * f1 * f1 + 4.0 * a + 5.0 / 16.0 * f1 * f1 * f1 - f1, a - 0.75 * f1};
    }
    return {a * a * f1 / 2.0 - 7.0 / 8.0 * a * f1 * f1 + 6.0 * a + 9.0 / 16.0 * f1 * f1 * f1 - 3.0 * f1,
            1.5 * a - 1.75 * f1};
}

double R0(double f1, double a, double t) {
    return -a * f1 / 2.0 + 0.375 * f1 * f1 - f1 / (2.0 * t) + 1.0 / (t * t) - 2.0;
}

struct Reduced {
    double residual, f2, A, G;
};

// Eliminates f2 with the extra relation and A with the first one-cut equation; what
// remains is the second one-cut equation as a function of f1.
Reduced reduce(double f1, double a, double t, ShrinkRelation which) {
    const Linear L = bracket(f1, a, which);
    const double f2 = (R0(f1, a, t) - t * L.L0) / (t * L.c + 0.5);
    const double G = a * a - a * f1 + f2;
    const double K1 = -8.0 * a * a + 8.0 * a * f1 - 3.0 * f1 * f1 + 4.0 * f2;
    const double G52 = std::pow(std::abs(G), 2.5);
    const double A = f1 * G52 / K1;
    const double K2 = 12.0 * a * a * a - 14.0 * a * a * f1 + 5.0 * a * f1 * f1 - 2.0 * f1 * f2;
    const double r = -2.0 + 0.375 * f1 * f1 - 1.5 * a * f1 - 0.5 * f2 - A / G52 * K2;
    return {r, f2, A, G};
}

}  // namespace

double shrink_relation(double f1, double f2, double a, double t, ShrinkRelation which) {
    const Linear L = bracket(f1, a, which);
    return t * (L.L0 + L.c * f2) - (R0(f1, a, t) - 0.5 * f2);
}

std::vector<ShrinkPoint> shrink_points(double a, double gap, const ShrinkGrid& grid) {
    std::vector<ShrinkPoint> out;
    const double t = -1.0 / gap;
    const double x3 = a + gap;
    const double lo = -(2.0 * a + 60.0);
    const double hi = 2.0 * a - 1e-9;
    const int n = grid.f1_samples;
    auto f = [&](double f1) { return reduce(f1, a, t, grid.relation).residual; };
    double prev_x = lo;
    double prev = f(lo);
    for (int i = 1; i < n; ++i) {
        const double x = lo + (hi - lo) * i / (n - 1);
        const double v = f(x);
        if (std::isfinite(prev) && std::isfinite(v) && (prev < 0.0) != (v < 0.0)) {
            boost::math::tools::eps_tolerance<double> tol(50);
            std::uintmax_t iters = 200;
            const auto r = boost::math::tools::toms748_solve(f, prev_x, x, prev, v, tol, iters);
            const double f1 = 0.5 * (r.first + r.second);
            const Reduced red = reduce(f1, a, t, grid.relation);
            // Sign changes across poles of the reduced function are not roots.
            if (std::isfinite(red.residual) && std::abs(red.residual) < 1e-8) {
                ShrinkPoint p;
                p.a = a;
                p.gap = gap;
                p.f1 = f1;
                p.f2 = red.f2;
                p.A = red.A;
                p.firstgood_residual = shrink_relation(f1, red.f2, a, t, ShrinkRelation::Traceless);
                p.collapse_residual = shrink_relation(f1, red.f2, a, t, ShrinkRelation::Collapse);
                const double disc = f1 * f1 - 4.0 * red.f2;
                if (disc > 0.0) {
                    const OneCutSupport s = OneCutSupport::from_symmetric(f1, red.f2);
                    p.y1 = s.y1;
                    p.y2 = s.y2;
                    p.constraints_ok = red.G > 0.0 && red.A > 0.0 && s.y1 < s.y2 && s.y2 < a && x3 > a;
                    if (p.constraints_ok) {
                        const Elementary e = elementary_symmetric(s.y1, s.y2, x3, x3);
                        p.fourth_residual = closing_relation_m2(e, a);
                        p.admissible = std::abs(p.fourth_residual) < 1e-10 &&
                                       std::abs(p.collapse_residual) < 1e-10 &&
                                       std::abs(p.firstgood_residual) < 1e-10;
                    }
                } else {
                    p.y1 = p.y2 = std::numeric_limits<double>::quiet_NaN();
                }
                if (!p.constraints_ok) p.fourth_residual = std::numeric_limits<double>::quiet_NaN();
                out.push_back(p);
            }
        }
        prev_x = x;
        prev = v;
    }
    return out;
}

ShrinkReport shrink_condition_scan(const ShrinkGrid& grid) {
    std::vector<double> as;
    const int na = static_cast<int>(std::floor((grid.a_max - grid.a_min) / grid.a_step + 1e-9)) + 1;
    for (int i = 0; i < na; ++i) as.push_back(grid.a_min + i * grid.a_step);
    std::vector<double> gaps;
    for (int j = 0; j < grid.gap_points; ++j) {
        const double u = grid.gap_points == 1 ? 0.0 : static_cast<double>(j) / (grid.gap_points - 1);
        gaps.push_back(grid.gap_min * std::pow(grid.gap_max / grid.gap_min, u));
    }
    std::vector<std::vector<ShrinkPoint>> cells(as.size() * gaps.size());
    parallel_for(cells.size(), [&](std::size_t k) {
        cells[k] = shrink_points(as[k / gaps.size()], gaps[k % gaps.size()], grid);
    });
    ShrinkReport rep;
    rep.grid_points = static_cast<int>(cells.size());
    for (const auto& c : cells) {
        for (const ShrinkPoint& p : c) {
            rep.points.push_back(p);
            ++rep.roots;
            if (p.constraints_ok) ++rep.constraint_points;
            if (p.admissible) ++rep.admissible;
        }
    }
    return rep;
}

}  // namespace spm
