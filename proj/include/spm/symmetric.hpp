#pragma once

#include "spm/density.hpp"

namespace spm {

// Closed-form two-cut solution at a = 0, m = 2, supported on +-[x3, x4].
struct SymmetricSolution {
    double A = 0.0;
    double s = 0.0;  // s = -e2
    double x3 = 0.0, x4 = 0.0;
    double e2 = 0.0, e4 = 0.0;
};

// Solves (s^2/4 - s)^{3/2} = 2 A s for s >= 4 by bisection.
SymmetricSolution solve_symmetric(double A);

double density_symmetric(const SymmetricSolution& sol, double x);

// The same density written through e2 and e4 only.
double density_symmetric_e(const SymmetricSolution& sol, double x);

DensityFn symmetric_density(const SymmetricSolution& sol);

TwoCutSupport symmetric_support(const SymmetricSolution& sol);

}  // namespace spm
