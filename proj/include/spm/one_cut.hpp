#pragma once

#include <array>
#include <vector>

#include "spm/core.hpp"
#include "spm/density.hpp"

namespace spm {

// Single-interval ansatz for m = 2 on [y1, y2] with y2 < a.
struct OneCutSolution {
    PotentialParams params;
    OneCutSupport support;
    std::array<double, 4> gamma{};  // gamma_0 .. gamma_3
    double residual_norm = 0.0;
    double traceless_residual = 0.0;
    double min_density = 0.0;
    double min_location = 0.0;
};

std::array<double, 4> gamma_coeffs(const OneCutSupport& s, double a, double A);

// The two endpoint conditions, written as (left side) - (right side).
std::array<double, 2> one_cut_residuals(const OneCutSupport& s, double a, double A);

// gamma_0 minus its value forced by a vanishing trace.
double traceless_residual(const OneCutSupport& s, double a, double A);

// Numerator gamma_3 p^3 + ... + gamma_0 of L_2(p) (p - a)^3.
double one_cut_numerator(const std::array<double, 4>& gamma, double p);
double L2(const OneCutSolution& sol, double p);

DensityFn one_cut_density(const OneCutSolution& sol);
double one_cut_density_eval(const OneCutSolution& sol, double x);

// Fills gamma, residuals and the positivity diagnostics for given endpoints.
OneCutSolution make_one_cut(const OneCutSupport& s, double a, double A);

OneCutSolution solve_one_cut(double a, double A);

// Family of one-cut solutions parametrized by arclength from the semicircle (A = 0)
// toward A < 0.
struct BranchPoint {
    double A = 0.0, y1 = 0.0, y2 = 0.0;
    double traceless = 0.0;
    double edge = 0.0;  // numerator at y2
};

struct BranchOptions {
    double ds = 0.002;  // initial arclength step; grows on easy corrector solves
    double ds_max = 0.05;
    double ds_min = 1e-9;
    int max_steps = 4000;
    double corrector_tolerance = 1e-13;
};

std::vector<BranchPoint> trace_branch(double a, const BranchOptions& options = {});

struct CriticalPoint {
    bool exists = false;
    bool degenerate = false;  // a == 2: semicircle limit
    double A = 0.0;
    OneCutSolution solution;
};

CriticalPoint critical_line(double a);

struct EdgePoint {
    double A = 0.0;
    OneCutSolution solution;
    double edge_residual = 0.0;
};

EdgePoint edge_zero_line(double a);

}  // namespace spm
