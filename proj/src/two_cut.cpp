#include "spm/two_cut.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spm/errors.hpp"
#include "spm/jet.hpp"

namespace spm {

namespace {

void check_support(const TwoCutSupport& s, double a) {
    const bool in_left = a >= s.x1 && a <= s.x2;
    const bool in_right = a >= s.x3 && a <= s.x4;
    if (in_left || in_right) throw InvalidSupport("pole lies on the support");
    if (!(s.x1 <= s.x2 && s.x2 < a && a < s.x3 && s.x3 <= s.x4)) {
        throw InvalidSupport("endpoints must satisfy x1 <= x2 < a < x3 <= x4");
    }
    const FValues f = eval_F(s, a);
    if (!(f.F > 0.0)) throw InvalidSupport("F(a) must be positive between the cuts");
}

// Jet of F^{-1/2} at w = a, positive branch.
SeriesJet inverse_sqrt_F_jet(const TwoCutSupport& s, double a, std::size_t order) {
    const auto c = taylor_F(s, a);
    SeriesJet F(order);
    for (std::size_t k = 0; k <= order && k < c.size(); ++k) F[k] = c[k];
    return F.pow(-0.5);
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

using Vec4 = Eigen::Vector4d;

bool finite4(const std::array<double, 4>& r) {
    return std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); });
}

bool ordered(const Vec4& x, double a) {
    return x.allFinite() && x[0] < x[1] && x[1] < a && a < x[2] && x[2] < x[3];
}

std::optional<Vec4> eval_residual(const Vec4& x, const PotentialParams& p) {
    if (!ordered(x, p.a)) return std::nullopt;
    try {
        const auto r = endpoint_residuals(TwoCutSupport::from_endpoints(x[0], x[1], x[2], x[3]), p);
        if (!finite4(r)) return std::nullopt;
        return Vec4(r[0], r[1], r[2], r[3]);
    } catch (const InvalidSupport&) {
        return std::nullopt;
    }
}

struct NewtonOutcome {
    Vec4 x;
    double norm_inf = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

NewtonOutcome newton(Vec4 x, const PotentialParams& p, const SolverOptions& opt) {
    NewtonOutcome out;
    out.x = x;
    auto r0 = eval_residual(x, p);
    if (!r0) return out;
    Vec4 r = *r0;
    double n_inf = r.cwiseAbs().maxCoeff();
    int polish = 0;
    for (int it = 0; it < opt.max_iterations; ++it) {
        out.iterations = it;
        if (n_inf < opt.tolerance) {
            out.converged = true;
            if (polish >= 2 || n_inf < 1e-14) break;
            ++polish;
        }
        Eigen::Matrix4d J;
        const double inf = std::numeric_limits<double>::infinity();
        const double left_gap[4] = {inf, x[1] - x[0], x[2] - p.a, x[3] - x[2]};
        const double right_gap[4] = {x[1] - x[0], p.a - x[1], x[3] - x[2], inf};
        bool jac_ok = true;
        for (int k = 0; k < 4 && jac_ok; ++k) {
            double h = 1e-7 * std::max(1.0, std::abs(x[k]));
            h = std::min(h, 0.25 * std::min(left_gap[k], right_gap[k]));
            Vec4 xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            auto rp = eval_residual(xp, p);
            auto rm = eval_residual(xm, p);
            if (!rp || !rm) {
                jac_ok = false;
                break;
            }
            J.col(k) = (*rp - *rm) / (2.0 * h);
        }
        if (!jac_ok || !J.allFinite()) break;
        const Vec4 dx = J.colPivHouseholderQr().solve(-r);
        if (!dx.allFinite()) break;
        const double n2 = r.norm();
        double t = 1.0;
        bool accepted = false;
        while (t >= 1e-12) {
            const Vec4 xt = x + t * dx;
            if (auto rt = eval_residual(xt, p); rt && rt->norm() <= (1.0 - 1e-4 * t) * n2) {
                x = xt;
                r = *rt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        n_inf = r.cwiseAbs().maxCoeff();
    }
    out.x = x;
    out.norm_inf = n_inf;
    if (n_inf < opt.tolerance) out.converged = true;
    return out;
}

std::vector<Vec4> seeds_for(double a, double A0) {
    const double d = std::cbrt(A0);
    std::vector<Vec4> s;
    if (a >= 2.0) {
        s.emplace_back(-2.0 + 1e-3, 2.0 - 1e-3, a + d, a + 2.0 * d);
        s.emplace_back(-2.0, a - d, a + d, a + 2.0 * d);
    } else {
        s.emplace_back(-2.0, a - d, a + d, std::max(2.0, a + 2.0 * d));
        s.emplace_back(-2.0 + 1e-3, a - d, a + d, a + 2.0 * d);
    }
    return s;
}

TwoCutSolution make_solution(const PotentialParams& p, const Vec4& x, double norm, int iters, int steps) {
    TwoCutSolution sol;
    sol.params = p;
    sol.support = TwoCutSupport::from_endpoints(x[0], x[1], x[2], x[3]);
    sol.alpha = alpha_coeffs_general(sol.support, p);
    sol.residual_norm = norm;
    sol.newton_iterations = iters;
    sol.continuation_steps = steps;
    return sol;
}

void check_collapse(const Vec4& x, double A) {
    if (x[3] - x[2] < 1e-8 * (x[1] - x[0])) {
        std::ostringstream os;
        os << "cut collapse during continuation at A = " << A << " (x4 - x3 = " << (x[3] - x[2]) << ")";
        throw NoConvergence(os.str(), std::numeric_limits<double>::quiet_NaN());
    }
}

}  // namespace

std::array<double, 3> alpha_coeffs_m2(const TwoCutSupport& s, double a, double A) {
    check_support(s, a);
    const FValues f = eval_F(s, a);
    const double F = f.F, F1 = f.dF, F2 = f.d2F;
    const double F52 = std::pow(F, 2.5);
    const double al2 = -A / (2.0 * F52) * (2.0 * F * F2 - 3.0 * F1 * F1);
    const double al1 = -A / F52 * (2.0 * F * F1 - 2.0 * a * F * F2 + 3.0 * a * F1 * F1);
    const double al0 = A / F52 * (4.0 * F * F + 2.0 * a * F * F1 - a * a * F * F2 + 1.5 * a * a * F1 * F1);
    return {al0, al1, al2};
}

std::vector<double> alpha_coeffs_general(const TwoCutSupport& s, const PotentialParams& params) {
    if (params.m < 1) throw ConfigError("pole order m must be >= 1");
    check_support(s, params.a);
    const int m = params.m;
    const SeriesJet r = inverse_sqrt_F_jet(s, params.a, static_cast<std::size_t>(m));
    // P(p) = 2 m A sum_j r_j (p - a)^j
    std::vector<double> alpha(static_cast<std::size_t>(m) + 1, 0.0);
    for (int j = 0; j <= m; ++j) {
        const double cj = 2.0 * m * params.A * r[static_cast<std::size_t>(j)];
        for (int i = 0; i <= j; ++i) {
            alpha[static_cast<std::size_t>(i)] += cj * binomial(j, i) * std::pow(-params.a, j - i);
        }
    }
    return alpha;
}

std::array<double, 4> expansion_coefficients(const TwoCutSupport& s, double a, int m) {
    const double M = m;
    const double e1 = s.e1, e2 = s.e2, e3 = s.e3;
    const double c1 = (M + 1.0) * a - e1 / 2.0;
    const double c2 = -(M + 1.0) / 2.0 * a * e1 - e1 * e1 / 8.0 + e2 / 2.0 + (M + 1.0) * (M + 2.0) / 2.0 * a * a;
    const double c3 = (8.0 * (M + 1.0) * (M + 2.0) * (M + 3.0) / 3.0 * a * a * a -
                       ((2.0 * M + 3.0) * (2.0 * M + 3.0) - 1.0) * a * a * e1 - (2.0 * M + 2.0) * a * e1 * e1 -
                       e1 * e1 * e1 + 4.0 * e1 * e2 - 8.0 * e3 + 8.0 * (M + 1.0) * a * e2) /
                      16.0;
    return {1.0, c1, c2, c3};
}

std::array<double, 4> endpoint_residuals_general(const TwoCutSupport& s, const PotentialParams& params) {
    const std::vector<double> al = alpha_coeffs_general(s, params);
    const int m = params.m;
    const auto c = expansion_coefficients(s, params.a, m);
    auto g = [&](int j) { return j >= 0 ? al[static_cast<std::size_t>(j)] : 0.0; };
    const double r1 = g(m) - 1.0;
    const double r2 = g(m - 1) + g(m) * c[1];
    const double r3 = 1.0 + 0.5 * (g(m - 2) + g(m - 1) * c[1] + g(m) * c[2]);
    const double r4 = g(m - 3) + g(m - 2) * c[1] + g(m - 1) * c[2] + g(m) * c[3] + (m == 1 ? 2.0 * params.A : 0.0);
    return {r1, r2, r3, r4};
}

double closing_relation_m2(const Elementary& e, double a) {
    const double e1 = e.e1, e2 = e.e2, e3 = e.e3;
    return a * a * a - 6.0 * a - 1.5 * a * e2 + 9.0 / 8.0 * a * e1 * e1 - 1.5 * a * a * e1 + e1 + 0.75 * e1 * e2 -
           5.0 / 16.0 * e1 * e1 * e1 - 0.5 * e3;
}

std::array<double, 4> endpoint_residuals_m2(const TwoCutSupport& s, double a, double A) {
    const auto al = alpha_coeffs_m2(s, a, A);
    const double e1 = s.e1, e2 = s.e2;
    const double r1 = al[2] - 1.0;
    const double r2 = al[1] - (0.5 * e1 - 3.0 * a);
    const double r3 = al[0] - (3.0 * a * a - 2.0 - 1.5 * a * e1 + 3.0 / 8.0 * e1 * e1 - 0.5 * e2);
    const double r4 = closing_relation_m2(Elementary{s.e1, s.e2, s.e3, s.e4}, a);
    return {r1, r2, r3, r4};
}

std::array<double, 4> endpoint_residuals(const TwoCutSupport& s, const PotentialParams& params) {
    if (params.m == 2) return endpoint_residuals_m2(s, params.a, params.A);
    return endpoint_residuals_general(s, params);
}

TwoCutSolution solve_endpoints(const PotentialParams& params, const std::optional<TwoCutSupport>& initial_guess,
                               const SolverOptions& options) {
    params.validate();
    if (!(params.A > 0.0)) {
        throw Infeasible(
            "no two-cut solution for A <= 0: the leading coefficient alpha_m has the sign of A, so alpha_m = 1 "
            "is unreachable");
    }
    double best = std::numeric_limits<double>::infinity();

    auto accept = [&](const Vec4& x, double norm, int iters, int steps) -> std::optional<TwoCutSolution> {
        TwoCutSolution sol = make_solution(params, x, norm, iters, steps);
        if (!density_sign_consistent(sol)) return std::nullopt;
        return sol;
    };

    if (initial_guess) {
        const auto& g = *initial_guess;
        const NewtonOutcome o = newton(Vec4(g.x1, g.x2, g.x3, g.x4), params, options);
        best = std::min(best, o.norm_inf);
        if (o.converged) {
            if (auto sol = accept(o.x, o.norm_inf, o.iterations, 0)) return *sol;
        }
    }

    const double A = params.A;
    const double A0 = std::min(A, options.seed_A);
    int steps = 0;
    if (A > A0) {
        steps = static_cast<int>(std::ceil(std::log(A / A0) / std::log(1.5)));
        steps = std::clamp(steps, 1, options.max_continuation_steps);
    }
    bool invalid_density = false;
    for (const Vec4& seed : seeds_for(params.a, A0)) {
        PotentialParams stage = params;
        stage.A = A0;
        NewtonOutcome o = newton(seed, stage, options);
        if (steps == 0) best = std::min(best, o.norm_inf);
        if (!o.converged) continue;
        int total_iters = o.iterations;
        bool ok = true;
        for (int k = 1; k <= steps; ++k) {
            stage.A = A0 * std::pow(A / A0, static_cast<double>(k) / steps);
            if (k == steps) stage.A = A;
            o = newton(o.x, stage, options);
            total_iters += o.iterations;
            if (!o.converged) {
                if (k == steps) best = std::min(best, o.norm_inf);
                ok = false;
                break;
            }
            check_collapse(o.x, stage.A);
        }
        if (!ok) continue;
        best = std::min(best, o.norm_inf);
        if (auto sol = accept(o.x, o.norm_inf, total_iters, steps)) return *sol;
        invalid_density = true;
    }
    if (steps > 0) {
        for (const Vec4& seed : seeds_for(params.a, A0)) {
            const NewtonOutcome o = newton(seed, params, options);
            best = std::min(best, o.norm_inf);
            if (!o.converged) continue;
            if (auto sol = accept(o.x, o.norm_inf, o.iterations, 0)) return *sol;
            invalid_density = true;
        }
    }
    // Continuation in a from an anchor where the A-path is reliable; the right cut
    // becomes very narrow at large a and cold seeds stall there.
    constexpr double anchor_a = 2.5;
    if (params.a > anchor_a) {
        try {
            PotentialParams anchor = params;
            anchor.a = anchor_a;
            TwoCutSolution cur = solve_endpoints(anchor, std::nullopt, options);
            double step = 0.25;
            int total_iters = cur.newton_iterations;
            int moves = 0;
            while (cur.params.a < params.a && step > 1e-6 && moves < 4000) {
                PotentialParams next = params;
                next.a = std::min(params.a, cur.params.a + step);
                const auto& s = cur.support;
                const NewtonOutcome o = newton(Vec4(s.x1, s.x2, s.x3, s.x4), next, options);
                ++moves;
                if (o.converged) {
                    cur = make_solution(next, o.x, o.norm_inf, o.iterations, 0);
                    total_iters += o.iterations;
                    step = std::min(1.0, step * 1.5);
                } else {
                    if (next.a == params.a) best = std::min(best, o.norm_inf);
                    step *= 0.5;
                }
            }
            if (cur.params.a == params.a) {
                const auto& s = cur.support;
                if (auto sol = accept(Vec4(s.x1, s.x2, s.x3, s.x4), cur.residual_norm, total_iters, moves)) {
                    return *sol;
                }
                invalid_density = true;
            }
        } catch (const NoConvergence&) {
            // the anchor itself failed; its residual belongs to other parameters
        }
    }
    std::ostringstream os;
    os << "two-cut solve failed at a = " << params.a << ", A = " << params.A << ", m = " << params.m;
    if (invalid_density) os << " (converged root has a numerator sign change on a cut)";
    throw NoConvergence(os.str(), best);
}

double numerator_poly(const std::vector<double>& alpha, double p) {
    double v = 0.0;
    for (auto it = alpha.rbegin(); it != alpha.rend(); ++it) v = v * p + *it;
    return v;
}

bool density_sign_consistent(const TwoCutSolution& sol) {
    const auto& s = sol.support;
    const std::array<std::array<double, 2>, 2> cuts{{{s.x1, s.x2}, {s.x3, s.x4}}};
    constexpr int samples = 256;
    for (const auto& c : cuts) {
        int sign = 0;
        for (int k = 1; k < samples; ++k) {
            const double t = 0.5 * (1.0 - std::cos(std::numbers::pi * k / samples));
            const double v = numerator_poly(sol.alpha, c[0] + t * (c[1] - c[0]));
            const int sg = (v > 0.0) - (v < 0.0);
            if (sg == 0) continue;
            if (sign == 0) sign = sg;
            else if (sg != sign) return false;
        }
    }
    return true;
}

std::complex<double> resolvent(const TwoCutSolution& sol, std::complex<double> p) {
    const auto& s = sol.support;
    const double a = sol.params.a;
    if (p.imag() == 0.0 && p.real() == a) return {resolvent_at_pole(sol), 0.0};
    if (std::abs(p.imag()) < 1e-12) {
        const double x = p.real();
        if ((x >= s.x1 - 1e-12 && x <= s.x2 + 1e-12) || (x >= s.x3 - 1e-12 && x <= s.x4 + 1e-12)) {
            throw OnCutError("resolvent evaluated on the support");
        }
    }
    const int m = sol.params.m;
    const std::complex<double> pa = p - a;
    const std::complex<double> vprime = p - 2.0 * m * sol.params.A / std::pow(pa, m + 1);
    std::complex<double> P = 0.0;
    for (auto it = sol.alpha.rbegin(); it != sol.alpha.rend(); ++it) P = P * p + *it;
    const std::complex<double> M = P / std::pow(pa, m + 1);
    std::complex<double> root = 1.0;
    for (double xi : s.endpoints()) root *= std::sqrt(p - xi);
    return 0.5 * (vprime - M * root);
}

double resolvent_at_pole(const TwoCutSolution& sol) {
    const int m = sol.params.m;
    const SeriesJet r = inverse_sqrt_F_jet(sol.support, sol.params.a, static_cast<std::size_t>(m) + 1);
    return 0.5 * sol.params.a - m * sol.params.A * r[static_cast<std::size_t>(m) + 1] / r[0];
}

double resolvent_at_pole_m2(const TwoCutSupport& s, double a, double A) {
    check_support(s, a);
    const FValues f = eval_F(s, a);
    const double F = f.F;
    return 0.5 * a + A * f.d3F / (6.0 * F) - 3.0 * A * f.dF * f.d2F / (4.0 * F * F) +
           5.0 / 8.0 * A * f.dF * f.dF * f.dF / (F * F * F);
}

std::complex<double> semicircle_resolvent(std::complex<double> p) {
    return 0.5 * (p - std::sqrt(p - 2.0) * std::sqrt(p + 2.0));
}

}  // namespace spm
