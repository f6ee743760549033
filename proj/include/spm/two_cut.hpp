#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include "spm/core.hpp"

namespace spm {

struct TwoCutSolution {
    PotentialParams params;
    TwoCutSupport support;
    std::vector<double> alpha;  // alpha_0 .. alpha_m
    double residual_norm = 0.0;
    int newton_iterations = 0;
    int continuation_steps = 0;
};

// Closed forms for the pole of order two.
std::array<double, 3> alpha_coeffs_m2(const TwoCutSupport& s, double a, double A);

// Numerator of M_m(p) = sum alpha_j p^j / (p - a)^{m+1} from the Taylor jet of F^{-1/2} at a.
std::vector<double> alpha_coeffs_general(const TwoCutSupport& s, const PotentialParams& params);

// c_0..c_3 of sqrt(F(p)) / (p - a)^{m+1} ~ sum c_k p^{1-m-k}
std::array<double, 4> expansion_coefficients(const TwoCutSupport& s, double a, int m);

// Dispatches to the explicit forms for m = 2 and to the general series otherwise.
std::array<double, 4> endpoint_residuals(const TwoCutSupport& s, const PotentialParams& params);
std::array<double, 4> endpoint_residuals_general(const TwoCutSupport& s, const PotentialParams& params);
std::array<double, 4> endpoint_residuals_m2(const TwoCutSupport& s, double a, double A);

// The A-free closing relation for m = 2, i.e. the order-1/p^2 condition after
// the three alpha equations have been used to eliminate alpha_0..alpha_2.
double closing_relation_m2(const Elementary& e, double a);

struct SolverOptions {
    double tolerance = 1e-10;
    int max_iterations = 200;
    double seed_A = 1e-4;
    int max_continuation_steps = 40;
};

TwoCutSolution solve_endpoints(const PotentialParams& params,
                               const std::optional<TwoCutSupport>& initial_guess = std::nullopt,
                               const SolverOptions& options = {});

double numerator_poly(const std::vector<double>& alpha, double p);

// True when the numerator of M_m keeps one sign on each cut.
bool density_sign_consistent(const TwoCutSolution& sol);

std::complex<double> resolvent(const TwoCutSolution& sol, std::complex<double> p);

// Finite value of the resolvent at p = a, from the jet of F^{-1/2}.
double resolvent_at_pole(const TwoCutSolution& sol);
double resolvent_at_pole_m2(const TwoCutSupport& s, double a, double A);

std::complex<double> semicircle_resolvent(std::complex<double> p);

}  // namespace spm
