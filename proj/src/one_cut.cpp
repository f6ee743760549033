#include "spm/one_cut.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "spm/errors.hpp"

namespace spm {

namespace {

double G_at(const OneCutSupport& s, double a) { return a * a - a * s.f1 + s.f2; }

void check_one_cut(const OneCutSupport& s, double a) {
    if (!(s.y1 < s.y2 && s.y2 < a)) throw InvalidSupport("one-cut endpoints must satisfy y1 < y2 < a");
    if (!(G_at(s, a) > 0.0)) throw InvalidSupport("G(a) must be positive");
}

struct Kernels {
    double K1, K2, K0, scale;
};

Kernels kernels(const OneCutSupport& s, double a, double A) {
    check_one_cut(s, a);
    const double f1 = s.f1, f2 = s.f2;
    Kernels k;
    k.scale = A / std::pow(G_at(s, a), 2.5);
    k.K1 = -8.0 * a * a + 8.0 * a * f1 - 3.0 * f1 * f1 + 4.0 * f2;
    k.K2 = 12.0 * a * a * a - 14.0 * a * a * f1 + 5.0 * a * f1 * f1 - 2.0 * f1 * f2;
    k.K0 = 12.0 * std::pow(a, 4) - 18.0 * a * a * a * f1 + 7.5 * a * a * f1 * f1 + 10.0 * a * a * f2 -
           10.0 * a * f1 * f2 + 4.0 * f2 * f2;
    return k;
}

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

std::optional<OneCutSupport> support_of(double y1, double y2, double a) {
    if (!(std::isfinite(y1) && std::isfinite(y2) && y1 < y2 && y2 < a)) return std::nullopt;
    return OneCutSupport::from_endpoints(y1, y2);
}

// Damped Newton with a finite-difference Jacobian; `eval` returns nullopt outside the domain.
template <int N>
struct SmallNewton {
    using Vec = Eigen::Matrix<double, N, 1>;
    using Mat = Eigen::Matrix<double, N, N>;

    std::function<std::optional<Vec>(const Vec&)> eval;
    double tolerance = 1e-12;
    int max_iterations = 100;

    std::optional<Vec> operator()(Vec x, double* final_norm = nullptr) const {
        auto r0 = eval(x);
        if (!r0) return std::nullopt;
        Vec r = *r0;
        for (int it = 0; it < max_iterations; ++it) {
            if (r.cwiseAbs().maxCoeff() < tolerance) break;
            Mat J;
            for (int k = 0; k < N; ++k) {
                const double h = 1e-7 * std::max(1.0, std::abs(x[k]));
                Vec xp = x, xm = x;
                xp[k] += h;
                xm[k] -= h;
                auto rp = eval(xp), rm = eval(xm);
                if (!rp || !rm) return std::nullopt;
                J.col(k) = (*rp - *rm) / (2.0 * h);
            }
            const Vec dx = J.colPivHouseholderQr().solve(-r);
            if (!dx.allFinite()) return std::nullopt;
            double t = 1.0;
            bool ok = false;
            while (t > 1e-12) {
                if (auto rt = eval(x + t * dx); rt && rt->norm() <= (1.0 - 1e-4 * t) * r.norm()) {
                    x += t * dx;
                    r = *rt;
                    ok = true;
                    break;
                }
                t *= 0.5;
            }
            if (!ok) break;
        }
        const double n = r.cwiseAbs().maxCoeff();
        if (final_norm) *final_norm = n;
        if (!(n < tolerance * 100.0)) return std::nullopt;
        return x;
    }
};

std::optional<Vec2> branch_residual(const Vec3& v, double a) {
    auto s = support_of(v[0], v[1], a);
    if (!s || !(G_at(*s, a) > 0.0)) return std::nullopt;
    const auto r = one_cut_residuals(*s, a, v[2]);
    if (!std::isfinite(r[0]) || !std::isfinite(r[1])) return std::nullopt;
    return Vec2(r[0], r[1]);
}

std::optional<Eigen::Matrix<double, 2, 3>> branch_jacobian(const Vec3& v, double a) {
    Eigen::Matrix<double, 2, 3> J;
    for (int k = 0; k < 3; ++k) {
        const double h = 1e-7 * std::max(1.0, std::abs(v[k]));
        Vec3 vp = v, vm = v;
        vp[k] += h;
        vm[k] -= h;
        auto rp = branch_residual(vp, a), rm = branch_residual(vm, a);
        if (!rp || !rm) return std::nullopt;
        J.col(k) = (*rp - *rm) / (2.0 * h);
    }
    return J;
}

std::optional<Vec3> tangent(const Vec3& v, double a, const Vec3* previous) {
    auto J = branch_jacobian(v, a);
    if (!J) return std::nullopt;
    Vec3 t = Vec3(J->row(0)).cross(Vec3(J->row(1)));
    const double n = t.norm();
    if (!(n > 0.0)) return std::nullopt;
    t /= n;
    if (previous && t.dot(*previous) < 0.0) t = -t;
    return t;
}

BranchPoint to_branch_point(const Vec3& v, double a) {
    BranchPoint p;
    p.y1 = v[0];
    p.y2 = v[1];
    p.A = v[2];
    const OneCutSupport s = OneCutSupport::from_endpoints(v[0], v[1]);
    p.traceless = traceless_residual(s, a, v[2]);
    p.edge = one_cut_numerator(gamma_coeffs(s, a, v[2]), v[1]);
    return p;
}

// Newton on {one-cut equations, extra(y1, y2, A)} seeded from a bracketing pair of branch points.
OneCutSolution refine_on_branch(double a, const BranchPoint& p, const BranchPoint& q, double wp, double wq,
                                const std::function<double(const OneCutSupport&, double)>& extra,
                                const char* what) {
    const double u = wp / (wp - wq);
    const Vec3 seed(p.y1 + u * (q.y1 - p.y1), p.y2 + u * (q.y2 - p.y2), p.A + u * (q.A - p.A));
    SmallNewton<3> solver;
    solver.eval = [a, &extra](const Vec3& v) -> std::optional<Vec3> {
        auto r = branch_residual(v, a);
        if (!r) return std::nullopt;
        const double e = extra(OneCutSupport::from_endpoints(v[0], v[1]), v[2]);
        if (!std::isfinite(e)) return std::nullopt;
        return Vec3((*r)[0], (*r)[1], e);
    };
    double norm = 0.0;
    auto v = solver(seed, &norm);
    if (!v) {
        std::ostringstream os;
        os << what << " refinement did not converge at a = " << a;
        throw NoConvergence(os.str(), norm);
    }
    return make_one_cut(OneCutSupport::from_endpoints((*v)[0], (*v)[1]), a, (*v)[2]);
}

}  // namespace

std::array<double, 4> gamma_coeffs(const OneCutSupport& s, double a, double A) {
    const Kernels k = kernels(s, a, A);
    return {-a * a * a - k.scale * k.K0, 3.0 * a * a + k.scale * k.K2, -3.0 * a + 0.5 * k.scale * k.K1, 1.0};
}

std::array<double, 2> one_cut_residuals(const OneCutSupport& s, double a, double A) {
    const Kernels k = kernels(s, a, A);
    const double f1 = s.f1, f2 = s.f2;
    return {f1 - k.scale * k.K1, -2.0 + 0.375 * f1 * f1 - 1.5 * a * f1 - 0.5 * f2 - k.scale * k.K2};
}

double traceless_residual(const OneCutSupport& s, double a, double A) {
    const double f1 = s.f1, f2 = s.f2;
    const double g0 = gamma_coeffs(s, a, A)[0];
    return g0 - (6.0 * a - f1 + 1.5 * a * f2 - a * a * a + 1.5 * a * a * f1 - 9.0 / 8.0 * a * f1 * f1 -
                 0.75 * f1 * f2 + 5.0 / 16.0 * f1 * f1 * f1);
}

double one_cut_numerator(const std::array<double, 4>& g, double p) { return ((g[3] * p + g[2]) * p + g[1]) * p + g[0]; }

double L2(const OneCutSolution& sol, double p) {
    const double d = p - sol.params.a;
    return one_cut_numerator(sol.gamma, p) / (d * d * d);
}

DensityFn one_cut_density(const OneCutSolution& sol) {
    const auto gamma = sol.gamma;
    const double a = sol.params.a;
    auto h = [gamma, a](double x, std::size_t) {
        const double d = x - a;
        return one_cut_numerator(gamma, x) / (d * d * d) / (2.0 * std::numbers::pi);
    };
    return DensityFn({Cut{sol.support.y1, sol.support.y2}}, h);
}

double one_cut_density_eval(const OneCutSolution& sol, double x) { return one_cut_density(sol)(x); }

OneCutSolution make_one_cut(const OneCutSupport& s, double a, double A) {
    OneCutSolution sol;
    sol.params = PotentialParams{a, A, 2};
    sol.support = s;
    sol.gamma = gamma_coeffs(s, a, A);
    const auto r = one_cut_residuals(s, a, A);
    sol.residual_norm = std::max(std::abs(r[0]), std::abs(r[1]));
    sol.traceless_residual = traceless_residual(s, a, A);
    const MinimumDensity md = minimum_density(one_cut_density(sol));
    sol.min_density = md.value;
    sol.min_location = md.location;
    return sol;
}

OneCutSolution solve_one_cut(double a, double A) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("one-cut analysis needs a finite a > 0");
    if (!std::isfinite(A)) throw ConfigError("A must be finite");
    if (A == 0.0) {
        if (!(a > 2.0)) throw InvalidSupport("the semicircle [-2, 2] does not lie left of the pole");
        return make_one_cut(OneCutSupport::from_endpoints(-2.0, 2.0), a, 0.0);
    }
    SmallNewton<2> solver;
    double current_A = A;
    solver.eval = [a, &current_A](const Vec2& y) -> std::optional<Vec2> {
        auto s = support_of(y[0], y[1], a);
        if (!s || !(G_at(*s, a) > 0.0)) return std::nullopt;
        const auto r = one_cut_residuals(*s, a, current_A);
        if (!std::isfinite(r[0]) || !std::isfinite(r[1])) return std::nullopt;
        return Vec2(r[0], r[1]);
    };
    double best = std::numeric_limits<double>::infinity();
    std::vector<Vec2> seeds;
    if (a > 2.0) seeds.emplace_back(-2.0, 2.0);
    seeds.emplace_back(-2.0, a - 0.25 * (a + 2.0));
    for (const Vec2& seed : seeds) {
        double n = 0.0;
        if (auto y = solver(seed, &n)) return make_one_cut(OneCutSupport::from_endpoints((*y)[0], (*y)[1]), a, A);
        best = std::min(best, n);
    }
    if (a > 2.0) {
        // Continuation from the semicircle.
        Vec2 y(-2.0, 2.0);
        constexpr int steps = 64;
        bool ok = true;
        for (int k = 1; k <= steps && ok; ++k) {
            current_A = A * k / steps;
            double n = 0.0;
            auto next = solver(y, &n);
            if (!next) {
                best = std::min(best, n);
                ok = false;
            } else {
                y = *next;
            }
        }
        if (ok) return make_one_cut(OneCutSupport::from_endpoints(y[0], y[1]), a, A);
    }
    std::ostringstream os;
    os << "one-cut solve failed at a = " << a << ", A = " << A;
    throw NoConvergence(os.str(), best);
}

std::vector<BranchPoint> trace_branch(double a, const BranchOptions& o) {
    if (!(a > 2.0)) throw ConfigError("the one-cut branch from the semicircle needs a > 2");
    std::vector<BranchPoint> out;
    Vec3 v(-2.0, 2.0, 0.0);
    out.push_back(to_branch_point(v, a));
    auto t0 = tangent(v, a, nullptr);
    if (!t0) return out;
    Vec3 t = *t0;
    if (t[2] > 0.0) t = -t;
    double ds = o.ds;
    for (int step = 0; step < o.max_steps; ++step) {
        const Vec3 pred = v + ds * t;
        Vec3 w = pred;
        bool ok = false;
        int iterations = 0;
        for (int it = 0; it < 30; ++it) {
            auto r = branch_residual(w, a);
            auto J = branch_jacobian(w, a);
            if (!r || !J) break;
            Eigen::Matrix3d B;
            B.topRows<2>() = *J;
            B.row(2) = t.transpose();
            const Vec3 rhs(-(*r)[0], -(*r)[1], -(w - pred).dot(t));
            const Vec3 dw = B.colPivHouseholderQr().solve(rhs);
            if (!dw.allFinite()) break;
            w += dw;
            iterations = it + 1;
            if (dw.cwiseAbs().maxCoeff() < o.corrector_tolerance) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            auto r = branch_residual(w, a);
            ok = r && r->cwiseAbs().maxCoeff() < 1e-11;
        }
        std::optional<Vec3> tn;
        if (ok && w[0] < w[1] && w[1] < a) tn = tangent(w, a, &t);
        if (!tn) {
            ds *= 0.5;
            if (ds < o.ds_min) break;
            continue;
        }
        if (iterations <= 4) ds = std::min(1.5 * ds, o.ds_max);
        t = *tn;
        v = w;
        out.push_back(to_branch_point(v, a));
    }
    return out;
}

CriticalPoint critical_line(double a) {
    CriticalPoint c;
    if (a < 2.0) return c;
    c.exists = true;
    if (a == 2.0) {
        c.degenerate = true;
        c.A = 0.0;
        c.solution.params = PotentialParams{a, 0.0, 2};
        c.solution.support = OneCutSupport::from_endpoints(-2.0, 2.0);
        c.solution.gamma = {-a * a * a, 3.0 * a * a, -3.0 * a, 1.0};
        return c;
    }
    const auto branch = trace_branch(a);
    for (std::size_t i = 2; i < branch.size(); ++i) {
        const double p = branch[i - 1].traceless, q = branch[i].traceless;
        if ((p < 0.0) != (q < 0.0)) {
            c.solution = refine_on_branch(
                a, branch[i - 1], branch[i], p, q,
                [a](const OneCutSupport& s, double A) { return traceless_residual(s, a, A); }, "critical line");
            c.A = c.solution.params.A;
            return c;
        }
    }
    std::ostringstream os;
    os << "no traceless point found along the one-cut branch at a = " << a;
    throw NoConvergence(os.str(), std::numeric_limits<double>::quiet_NaN());
}

EdgePoint edge_zero_line(double a) {
    if (!(a > 2.0)) throw ConfigError("the edge-zero line is defined for a > 2");
    const auto branch = trace_branch(a);
    for (std::size_t i = 2; i < branch.size(); ++i) {
        const double p = branch[i - 1].edge, q = branch[i].edge;
        if ((p < 0.0) != (q < 0.0)) {
            EdgePoint e;
            e.solution = refine_on_branch(
                a, branch[i - 1], branch[i], p, q,
                [a](const OneCutSupport& s, double A) { return one_cut_numerator(gamma_coeffs(s, a, A), s.y2); },
                "edge-zero line");
            e.A = e.solution.params.A;
            e.edge_residual = one_cut_numerator(e.solution.gamma, e.solution.support.y2);
            return e;
        }
    }
    std::ostringstream os;
    os << "no edge zero found along the one-cut branch at a = " << a;
    throw NoConvergence(os.str(), std::numeric_limits<double>::quiet_NaN());
}

}  // namespace spm
