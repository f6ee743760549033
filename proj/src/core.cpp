#include "spm/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spm/errors.hpp"

namespace spm {

void PotentialParams::validate() const {
    if (m < 1) throw ConfigError("pole order m must be >= 1, got " + std::to_string(m));
    if (!std::isfinite(a) || a < 0.0) throw ConfigError("pole location a must be finite and >= 0");
    if (!std::isfinite(A)) throw ConfigError("pole strength A must be finite");
}

bool at_pole(double a, double x) { return x == a || std::abs(x - a) < 1e-300; }

double eval_potential(const PotentialParams& params, double x) {
    if (at_pole(params.a, x)) throw PoleError("potential evaluated at the pole x = a");
    return 0.5 * x * x + 2.0 * params.A / std::pow(x - params.a, params.m);
}

double eval_potential_derivative(const PotentialParams& params, double x) {
    if (at_pole(params.a, x)) throw PoleError("potential derivative evaluated at the pole x = a");
    return x - 2.0 * params.m * params.A / std::pow(x - params.a, params.m + 1);
}

Elementary elementary_symmetric(double x1, double x2, double x3, double x4) {
    Elementary e;
    e.e1 = x1 + x2 + x3 + x4;
    e.e2 = x1 * x2 + x1 * x3 + x1 * x4 + x2 * x3 + x2 * x4 + x3 * x4;
    e.e3 = x1 * x2 * x3 + x1 * x2 * x4 + x1 * x3 * x4 + x2 * x3 * x4;
    e.e4 = x1 * x2 * x3 * x4;
    return e;
}

TwoCutSupport TwoCutSupport::from_endpoints(double x1, double x2, double x3, double x4) {
    TwoCutSupport s;
    s.x1 = x1;
    s.x2 = x2;
    s.x3 = x3;
    s.x4 = x4;
    const Elementary e = elementary_symmetric(x1, x2, x3, x4);
    s.e1 = e.e1;
    s.e2 = e.e2;
    s.e3 = e.e3;
    s.e4 = e.e4;
    return s;
}

TwoCutSupport TwoCutSupport::from_endpoints(const std::array<double, 4>& x) {
    return from_endpoints(x[0], x[1], x[2], x[3]);
}

bool TwoCutSupport::ordered_around(double a) const { return x1 < x2 && x2 < a && a < x3 && x3 < x4; }

OneCutSupport OneCutSupport::from_endpoints(double y1, double y2) {
    return OneCutSupport{y1, y2, y1 + y2, y1 * y2};
}

OneCutSupport OneCutSupport::from_symmetric(double f1, double f2) {
    const double disc = f1 * f1 - 4.0 * f2;
    if (!(disc > 0.0)) throw InvalidSupport("complex or coincident one-cut endpoints");
    const double r = std::sqrt(disc);
    // Stable pair: the larger-magnitude root first, the other from the product.
    const double big = f1 >= 0.0 ? 0.5 * (f1 + r) : 0.5 * (f1 - r);
    const double small = big != 0.0 ? f2 / big : 0.0;
    OneCutSupport s;
    s.y1 = std::min(big, small);
    s.y2 = std::max(big, small);
    s.f1 = f1;
    s.f2 = f2;
    return s;
}

std::array<double, 5> taylor_F(const TwoCutSupport& s, double p) {
    std::array<double, 5> c{1.0, 0.0, 0.0, 0.0, 0.0};
    int deg = 0;
    for (double xi : s.endpoints()) {
        const double d = p - xi;
        for (int k = deg + 1; k >= 1; --k) c[k] = c[k] * d + c[k - 1];
        c[0] *= d;
        ++deg;
    }
    return c;
}

FValues eval_F(const TwoCutSupport& s, double p) {
    const auto c = taylor_F(s, p);
    return FValues{c[0], c[1], 2.0 * c[2], 6.0 * c[3]};
}

FValues eval_G(const OneCutSupport& s, double p) {
    return FValues{(p - s.y1) * (p - s.y2), 2.0 * p - s.f1, 2.0, 0.0};
}

}  // namespace spm
