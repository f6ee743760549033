#include "spm/jet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spm {

namespace {

void require_same_order(const SeriesJet& x, const SeriesJet& y) {
    if (x.order() != y.order()) throw std::invalid_argument("SeriesJet order mismatch");
}

}  // namespace

SeriesJet::SeriesJet(std::size_t order) : c_(order + 1, 0.0) {}

SeriesJet::SeriesJet(std::initializer_list<double> coeffs) : c_(coeffs) {
    if (c_.empty()) c_.push_back(0.0);
}

SeriesJet::SeriesJet(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
}

SeriesJet SeriesJet::constant(double value, std::size_t order) {
    SeriesJet j(order);
    j.c_[0] = value;
    return j;
}

SeriesJet SeriesJet::variable(double x0, std::size_t order) {
    SeriesJet j(order);
    j.c_[0] = x0;
    if (order >= 1) j.c_[1] = 1.0;
    return j;
}

SeriesJet& SeriesJet::operator+=(const SeriesJet& o) {
    require_same_order(*this, o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

SeriesJet& SeriesJet::operator-=(const SeriesJet& o) {
    require_same_order(*this, o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

SeriesJet& SeriesJet::operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
}

SeriesJet SeriesJet::reciprocal() const {
    if (c_[0] == 0.0) throw std::domain_error("SeriesJet reciprocal of a jet with zero constant term");
    SeriesJet r(order());
    r.c_[0] = 1.0 / c_[0];
    for (std::size_t k = 1; k < c_.size(); ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j <= k; ++j) s += c_[j] * r.c_[k - j];
        r.c_[k] = -s / c_[0];
    }
    return r;
}

SeriesJet SeriesJet::sqrt() const { return pow(0.5); }

SeriesJet SeriesJet::pow(double q) const {
    if (!(c_[0] > 0.0)) throw std::domain_error("SeriesJet power needs a positive constant term");
    // g = (1 + u)^q with u = c/c0 - 1 satisfies (1 + u) g' = q u' g.
    const std::size_t n = order();
    std::vector<double> u(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) u[k] = c_[k] / c_[0];
    SeriesJet g(n);
    g.c_[0] = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j <= k; ++j) {
            s += (q * static_cast<double>(j) - static_cast<double>(k - j)) * u[j] * g.c_[k - j];
        }
        g.c_[k] = s / static_cast<double>(k);
    }
    g *= std::pow(c_[0], q);
    return g;
}

SeriesJet operator+(SeriesJet x, const SeriesJet& y) { return x += y; }

SeriesJet operator-(SeriesJet x, const SeriesJet& y) { return x -= y; }

SeriesJet operator*(const SeriesJet& x, const SeriesJet& y) {
    require_same_order(x, y);
    SeriesJet r(x.order());
    for (std::size_t k = 0; k <= x.order(); ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j <= k; ++j) s += x[j] * y[k - j];
        r[k] = s;
    }
    return r;
}

SeriesJet operator*(SeriesJet x, double s) { return x *= s; }

SeriesJet operator*(double s, SeriesJet x) { return x *= s; }

}  // namespace spm
