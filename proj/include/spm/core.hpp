#pragma once

#include <array>

namespace spm {

// V_m(x) = x^2/2 + 2A/(x-a)^m
struct PotentialParams {
    double a = 0.0;
    double A = 0.0;
    int m = 2;

    void validate() const;
};

// Exact equality, plus a guard against overflow right next to the pole.
bool at_pole(double a, double x);

double eval_potential(const PotentialParams& params, double x);
double eval_potential_derivative(const PotentialParams& params, double x);

struct Elementary {
    double e1 = 0.0, e2 = 0.0, e3 = 0.0, e4 = 0.0;
};

Elementary elementary_symmetric(double x1, double x2, double x3, double x4);

struct TwoCutSupport {
    double x1 = 0.0, x2 = 0.0, x3 = 0.0, x4 = 0.0;
    double e1 = 0.0, e2 = 0.0, e3 = 0.0, e4 = 0.0;

    static TwoCutSupport from_endpoints(double x1, double x2, double x3, double x4);
    static TwoCutSupport from_endpoints(const std::array<double, 4>& x);

    std::array<double, 4> endpoints() const { return {x1, x2, x3, x4}; }
    // x1 < x2 < a < x3 < x4
    bool ordered_around(double a) const;
};

struct OneCutSupport {
    double y1 = 0.0, y2 = 0.0;
    double f1 = 0.0, f2 = 0.0;

    static OneCutSupport from_endpoints(double y1, double y2);
    // Requires f1^2 > 4 f2.
    static OneCutSupport from_symmetric(double f1, double f2);
};

struct FValues {
    double F = 0.0, dF = 0.0, d2F = 0.0, d3F = 0.0;
};

// Taylor coefficients of F(p + h) = prod (p + h - x_i), ascending in h.
std::array<double, 5> taylor_F(const TwoCutSupport& s, double p);

// F(p) = p^4 - e1 p^3 + e2 p^2 - e3 p + e4 and its first three derivatives.
FValues eval_F(const TwoCutSupport& s, double p);

// G(p) = (p - y1)(p - y2) and derivatives (the third vanishes).
FValues eval_G(const OneCutSupport& s, double p);

}  // namespace spm
