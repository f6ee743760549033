#include "spm/density.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "spm/errors.hpp"

namespace spm {

using std::numbers::pi;

DensityFn::DensityFn(std::vector<Cut> cuts, Smooth smooth) : cuts_(std::move(cuts)), smooth_(std::move(smooth)) {}

double DensityFn::operator()(double x) const {
    for (std::size_t k = 0; k < cuts_.size(); ++k) {
        const Cut& c = cuts_[k];
        if (x > c.lo && x < c.hi) return smooth_(x, k) * std::sqrt((x - c.lo) * (c.hi - x));
    }
    return 0.0;
}

ChebyshevRule chebyshev_second_kind(int n) {
    ChebyshevRule r;
    r.t.resize(n);
    r.w.resize(n);
    r.theta.resize(n);
    for (int k = 1; k <= n; ++k) {
        const double th = k * pi / (n + 1);
        const double s = std::sin(th);
        r.theta[k - 1] = th;
        r.t[k - 1] = std::cos(th);
        r.w[k - 1] = pi / (n + 1) * s * s;
    }
    return r;
}

double DensityFn::cut_integral(std::size_t cut, const std::function<double(double)>& f, int nodes) const {
    const Cut& c = cuts_.at(cut);
    const ChebyshevRule rule = chebyshev_second_kind(nodes);
    const double hw = c.half_width();
    double s = 0.0;
    for (int k = 0; k < nodes; ++k) {
        const double x = c.mid() + hw * rule.t[k];
        s += rule.w[k] * smooth_(x, cut) * f(x);
    }
    return hw * hw * s;
}

double DensityFn::integrate(const std::function<double(double)>& f, int nodes) const {
    double s = 0.0;
    for (std::size_t k = 0; k < cuts_.size(); ++k) s += cut_integral(k, f, nodes);
    return s;
}

double DensityFn::mass(std::size_t cut, int nodes) const {
    return cut_integral(cut, [](double) { return 1.0; }, nodes);
}

DensityFn two_cut_density(const TwoCutSolution& sol) {
    const auto& s = sol.support;
    const double a = sol.params.a;
    const int m = sol.params.m;
    const std::vector<double> alpha = sol.alpha;
    const std::array<double, 4> x = s.endpoints();
    auto h = [alpha, x, a, m](double lam, std::size_t cut) {
        const double o1 = cut == 0 ? x[2] : x[0];
        const double o2 = cut == 0 ? x[3] : x[1];
        const double M = numerator_poly(alpha, lam) / std::pow(lam - a, m + 1);
        return std::abs(M) / (2.0 * pi) * std::sqrt(std::abs((lam - o1) * (lam - o2)));
    };
    return DensityFn({Cut{s.x1, s.x2}, Cut{s.x3, s.x4}}, h);
}

DensityFn semicircle_density() {
    return DensityFn({Cut{-2.0, 2.0}}, [](double, std::size_t) { return 1.0 / (2.0 * pi); });
}

double density_eval(const TwoCutSolution& sol, double x) { return two_cut_density(sol)(x); }

MinimumDensity minimum_density(const DensityFn& rho) {
    constexpr int samples = 512;
    MinimumDensity best{std::numeric_limits<double>::infinity(), 0.0};
    std::size_t best_cut = 0;
    int best_k = 0;
    auto point = [&](std::size_t cut, int k) {
        const Cut& c = rho.cuts()[cut];
        return c.mid() - c.half_width() * std::cos(pi * k / samples);
    };
    for (std::size_t cut = 0; cut < rho.cuts().size(); ++cut) {
        for (int k = 1; k < samples; ++k) {
            const double x = point(cut, k);
            const double v = rho(x);
            if (v < best.value) {
                best = {v, x};
                best_cut = cut;
                best_k = k;
            }
        }
    }
    if (!std::isfinite(best.value)) return best;
    const double lo = point(best_cut, best_k - 1);
    const double hi = point(best_cut, best_k + 1);
    const auto r = boost::math::tools::brent_find_minima([&](double x) { return rho(x); }, lo, hi, 52);
    if (r.second < best.value && r.first > lo && r.first < hi) best = {r.second, r.first};
    return best;
}

double susceptibility(const DensityFn& rho, double a, int nodes) {
    return rho.integrate([a](double x) { return 1.0 / ((a - x) * (a - x)); }, nodes);
}

double susceptibility_of_solution(const TwoCutSolution& sol, int nodes) {
    return susceptibility(two_cut_density(sol), sol.params.a, nodes);
}

ConstraintReport constraint_report(const DensityFn& rho, double a, int nodes) {
    ConstraintReport r;
    r.norm = rho.integrate([](double) { return 1.0; }, nodes);
    r.trace = rho.integrate([](double x) { return x; }, nodes);
    r.susceptibility = susceptibility(rho, a, nodes);
    const MinimumDensity md = minimum_density(rho);
    r.min_density = md.value;
    r.min_location = md.location;
    return r;
}

ConstraintReport constraint_report(const TwoCutSolution& sol, int nodes) {
    return constraint_report(two_cut_density(sol), sol.params.a, nodes);
}

Chi0 chi0(double a) {
    if (a > 2.0) {
        const double s = std::sqrt(a * a - 4.0);
        return {2.0 / (s * (a + s)), false};
    }
    if (a == 2.0) return {std::numeric_limits<double>::infinity(), true};
    return {0.0, false};
}

double sk_a_of_beta(double beta) {
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    return beta + 1.0 / beta;
}

double log_energy(const DensityFn& rho, int nodes) {
    const ChebyshevRule rule = chebyshev_second_kind(nodes);
    const std::size_t nc = rho.cuts().size();
    std::vector<std::vector<double>> x(nc), wg(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const Cut& cut = rho.cuts()[c];
        const double hw = cut.half_width();
        x[c].resize(nodes);
        wg[c].resize(nodes);
        for (int k = 0; k < nodes; ++k) {
            x[c][k] = cut.mid() + hw * rule.t[k];
            wg[c][k] = rule.w[k] * hw * hw * rho.smooth(x[c][k], c);
        }
    }
    double total = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
        // ln|cos u - cos v| = -ln 2 - sum_k (2/k) cos(ku) cos(kv)
        double mass = 0.0;
        for (double v : wg[c]) mass += v;
        double s = (std::log(rho.cuts()[c].half_width()) - std::numbers::ln2) * mass * mass;
        for (int k = 1; k <= nodes; ++k) {
            double g = 0.0;
            for (int i = 0; i < nodes; ++i) g += wg[c][i] * std::cos(k * rule.theta[i]);
            s -= 2.0 / k * g * g;
        }
        total += s;
        for (std::size_t d = 0; d < nc; ++d) {
            if (d == c) continue;
            double cross = 0.0;
            for (int i = 0; i < nodes; ++i) {
                double row = 0.0;
                for (int j = 0; j < nodes; ++j) row += wg[d][j] * std::log(std::abs(x[c][i] - x[d][j]));
                cross += wg[c][i] * row;
            }
            total += cross;
        }
    }
    return total;
}

double action(const DensityFn& rho, double a, double A, double chi_target, int nodes) {
    const double second = rho.integrate([](double x) { return x * x; }, nodes);
    double s = 0.25 * second - 0.5 * log_energy(rho, nodes);
    if (A != 0.0) s += A * (susceptibility(rho, a, nodes) - chi_target);
    return s;
}

double action(const TwoCutSolution& sol, double chi_target, int nodes) {
    return action(two_cut_density(sol), sol.params.a, sol.params.A, chi_target, nodes);
}

// 1/4 from the second moment, 1/8 from the logarithmic term.
double semicircle_action() { return 0.375; }

namespace {

struct ChiEval {
    double chi;
    TwoCutSolution sol;
};

ChiEval chi_at(double a, double A, const RateOptions& o) {
    TwoCutSolution sol = solve_endpoints(PotentialParams{a, A, o.m});
    return {susceptibility_of_solution(sol, o.nodes), sol};
}

}  // namespace

double invert_susceptibility(double a, double chi, const RateOptions& o) {
    const Chi0 c0 = chi0(a);
    if (!(a > 2.0)) throw OutOfRange("susceptibility inversion needs a > 2 (finite chi0)");
    if (!(chi > c0.value)) {
        std::ostringstream os;
        os << "chi = " << chi << " is not above chi0 = " << c0.value << "; it would need A <= 0";
        throw OutOfRange(os.str());
    }
    // Walk A upward in factors of two; remember samples for the bounded-maximum fallback.
    std::vector<std::pair<double, double>> samples;
    double A_lo = o.A_min;
    double chi_lo = chi_at(a, A_lo, o).chi;
    samples.emplace_back(A_lo, chi_lo);
    if (chi_lo >= chi) {
        // Between A = 0 (where chi -> chi0) and the smallest sampled A.
        auto g = [&](double A) { return A > 0.0 ? chi_at(a, A, o).chi - chi : c0.value - chi; };
        boost::math::tools::eps_tolerance<double> tol(50);
        std::uintmax_t iters = 200;
        const auto root = boost::math::tools::toms748_solve(g, 0.0, A_lo, c0.value - chi, chi_lo - chi, tol, iters);
        return 0.5 * (root.first + root.second);
    }
    double A_hi = A_lo;
    double chi_hi = chi_lo;
    bool bracketed = false;
    while (A_hi < o.A_max) {
        A_lo = A_hi;
        chi_lo = chi_hi;
        A_hi *= 2.0;
        chi_hi = chi_at(a, A_hi, o).chi;
        samples.emplace_back(A_hi, chi_hi);
        if (chi_hi > chi) {
            bracketed = true;
            break;
        }
    }
    if (!bracketed) {
        // chi(A) is bounded; look for the peak between the samples around the largest value.
        auto it = std::max_element(samples.begin(), samples.end(),
                                   [](const auto& p, const auto& q) { return p.second < q.second; });
        const std::size_t i = static_cast<std::size_t>(it - samples.begin());
        const double lo = std::log(samples[i == 0 ? 0 : i - 1].first);
        const double hi = std::log(samples[std::min(i + 1, samples.size() - 1)].first);
        const auto peak = boost::math::tools::brent_find_minima(
            [&](double u) { return -chi_at(a, std::exp(u), o).chi; }, lo, hi, 40);
        const double chi_max = -peak.second;
        if (!(chi_max > chi)) {
            std::ostringstream os;
            os << "chi = " << chi << " exceeds the largest susceptibility reachable with A > 0 at a = " << a
               << " (about " << chi_max << ")";
            throw OutOfRange(os.str());
        }
        A_lo = std::exp(lo);
        chi_lo = chi_at(a, A_lo, o).chi;
        A_hi = std::exp(peak.first);
        chi_hi = chi_max;
    }
    auto f = [&](double logA) { return chi_at(a, std::exp(logA), o).chi - chi; };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(f, std::log(A_lo), std::log(A_hi), chi_lo - chi,
                                                        chi_hi - chi, tol, iters);
    return std::exp(0.5 * (root.first + root.second));
}

RatePoint rate_point(double a, double chi, const RateOptions& o) {
    RatePoint p;
    p.chi = chi;
    const Chi0 c0 = chi0(a);
    if (a > 2.0 && std::abs(chi - c0.value) <= 1e-14 * c0.value) {
        p.A = 0.0;
        p.psi = 0.0;
        return p;
    }
    p.A = invert_susceptibility(a, chi, o);
    p.solution = solve_endpoints(PotentialParams{a, p.A, o.m});
    p.psi = action(p.solution, chi, o.nodes) - semicircle_action();
    return p;
}

double rate_function(double a, double chi, int m) {
    RateOptions o;
    o.m = m;
    return rate_point(a, chi, o).psi;
}

}  // namespace spm
