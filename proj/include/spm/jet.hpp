#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace spm {

// Truncated Taylor series c_0 + c_1 h + ... + c_n h^n.
class SeriesJet {
public:
    explicit SeriesJet(std::size_t order);
    SeriesJet(std::initializer_list<double> coeffs);
    explicit SeriesJet(std::vector<double> coeffs);

    static SeriesJet constant(double value, std::size_t order);
    // x0 + h
    static SeriesJet variable(double x0, std::size_t order);

    std::size_t order() const { return c_.size() - 1; }
    double operator[](std::size_t k) const { return c_[k]; }
    double& operator[](std::size_t k) { return c_[k]; }
    const std::vector<double>& coefficients() const { return c_; }

    SeriesJet& operator+=(const SeriesJet& o);
    SeriesJet& operator-=(const SeriesJet& o);
    SeriesJet& operator*=(double s);

    SeriesJet reciprocal() const;
    SeriesJet sqrt() const;
    // Real power; requires a positive constant term.
    SeriesJet pow(double q) const;

private:
    std::vector<double> c_;
};

SeriesJet operator+(SeriesJet x, const SeriesJet& y);
SeriesJet operator-(SeriesJet x, const SeriesJet& y);
SeriesJet operator*(const SeriesJet& x, const SeriesJet& y);
SeriesJet operator*(SeriesJet x, double s);
SeriesJet operator*(double s, SeriesJet x);

}  // namespace spm
