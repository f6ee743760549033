#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "spm/two_cut.hpp"

namespace spm {

struct Cut {
    double lo = 0.0, hi = 0.0;
    double mid() const { return 0.5 * (lo + hi); }
    double half_width() const { return 0.5 * (hi - lo); }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

inline constexpr int kDefaultNodes = 256;

// A density of the form rho(x) = h_k(x) sqrt((x - lo_k)(hi_k - x)) on each cut k.
// h_k is smooth up to the endpoints, so Chebyshev-Gauss nodes of the second kind
// integrate rho f exactly for polynomial h f.
class DensityFn {
public:
    using Smooth = std::function<double(double x, std::size_t cut)>;

    DensityFn(std::vector<Cut> cuts, Smooth smooth);

    const std::vector<Cut>& cuts() const { return cuts_; }
    double smooth(double x, std::size_t cut) const { return smooth_(x, cut); }

    // Zero outside the support.
    double operator()(double x) const;

    double integrate(const std::function<double(double)>& f, int nodes = kDefaultNodes) const;
    double cut_integral(std::size_t cut, const std::function<double(double)>& f, int nodes = kDefaultNodes) const;
    double mass(std::size_t cut, int nodes = kDefaultNodes) const;

private:
    std::vector<Cut> cuts_;
    Smooth smooth_;
};

DensityFn two_cut_density(const TwoCutSolution& sol);
DensityFn semicircle_density();

double density_eval(const TwoCutSolution& sol, double x);

// Nodes t_k = cos(theta_k), theta_k = k pi/(n+1), weights pi/(n+1) sin^2(theta_k).
struct ChebyshevRule {
    std::vector<double> t, w, theta;
};
ChebyshevRule chebyshev_second_kind(int n);

struct ConstraintReport {
    double norm = 0.0;
    double trace = 0.0;
    double susceptibility = 0.0;
    double min_density = 0.0;
    double min_location = 0.0;
};

ConstraintReport constraint_report(const DensityFn& rho, double a, int nodes = kDefaultNodes);
ConstraintReport constraint_report(const TwoCutSolution& sol, int nodes = kDefaultNodes);

// Smallest value of rho over the interior of the support, by sampling followed by a
// Brent refinement in the best bracket.
struct MinimumDensity {
    double value = 0.0;
    double location = 0.0;
};
MinimumDensity minimum_density(const DensityFn& rho);

double susceptibility(const DensityFn& rho, double a, int nodes = kDefaultNodes);
double susceptibility_of_solution(const TwoCutSolution& sol, int nodes = kDefaultNodes);

struct Chi0 {
    double value = 0.0;
    bool divergent = false;
};
Chi0 chi0(double a);

double sk_a_of_beta(double beta);

// Double integral of rho(x) rho(y) ln|x - y|.
double log_energy(const DensityFn& rho, int nodes = kDefaultNodes);

// S = (1/4) int x^2 rho - (1/2) log_energy + A (chi - chi_target)
double action(const DensityFn& rho, double a, double A, double chi_target, int nodes = kDefaultNodes);
double action(const TwoCutSolution& sol, double chi_target, int nodes = kDefaultNodes);
double semicircle_action();

struct RateOptions {
    int m = 2;
    int nodes = kDefaultNodes;
    double A_min = 1e-8;
    double A_max = 1e6;
};

struct RatePoint {
    double chi = 0.0;
    double A = 0.0;  // multiplier reached by the inversion; 0 at chi0
    double psi = 0.0;
    TwoCutSolution solution;  // empty support when A == 0
};

// Solves chi(A; a) = chi on the branch that starts at chi0 for A -> 0+.
double invert_susceptibility(double a, double chi, const RateOptions& options = {});
RatePoint rate_point(double a, double chi, const RateOptions& options = {});
double rate_function(double a, double chi, int m = 2);

}  // namespace spm
