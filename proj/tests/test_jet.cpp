#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "spm/jet.hpp"

using namespace spm;

TEST_CASE("arithmetic on truncated series") {
    const SeriesJet x{1.0, 2.0, 3.0};
    const SeriesJet y{4.0, -1.0, 0.5};
    const SeriesJet p = x * y;
    CHECK(p[0] == 4.0);
    CHECK(p[1] == 7.0);
    CHECK(p[2] == doctest::Approx(0.5 - 2.0 + 12.0));
    const SeriesJet s = x + y;
    CHECK(s[2] == 3.5);
    CHECK((x - y)[1] == 3.0);
    CHECK((2.0 * x)[2] == 6.0);
    CHECK_THROWS_AS(x * SeriesJet({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("reciprocal and powers match known expansions") {
    // 1/(1 - h) = sum h^k
    const SeriesJet r = SeriesJet{1.0, -1.0, 0.0, 0.0, 0.0, 0.0}.reciprocal();
    for (std::size_t k = 0; k <= 5; ++k) CHECK(r[k] == doctest::Approx(1.0).epsilon(1e-15));
    // (1 + h)^q binomial series
    const double q = -0.5;
    const SeriesJet b = SeriesJet{1.0, 1.0, 0.0, 0.0, 0.0}.pow(q);
    double c = 1.0;
    for (std::size_t k = 0; k <= 4; ++k) {
        CHECK(b[k] == doctest::Approx(c).epsilon(1e-14));
        c *= (q - static_cast<double>(k)) / static_cast<double>(k + 1);
    }
    const SeriesJet sq = SeriesJet{4.0, 1.0, 0.0, 0.0}.sqrt();
    CHECK((sq * sq)[0] == doctest::Approx(4.0));
    CHECK((sq * sq)[1] == doctest::Approx(1.0));
    CHECK((sq * sq)[2] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK((sq * sq)[3] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(SeriesJet({0.0, 1.0}).reciprocal(), std::domain_error);
    CHECK_THROWS_AS(SeriesJet({-1.0, 1.0}).sqrt(), std::domain_error);
}

TEST_CASE("jet of a composite function against derivatives by hand") {
    // f(x) = (x^2 + 1)^(-1/2) at x0 = 0.7
    const double x0 = 0.7;
    const SeriesJet x = SeriesJet::variable(x0, 3);
    const SeriesJet f = (x * x + SeriesJet::constant(1.0, 3)).pow(-0.5);
    const double u = x0 * x0 + 1.0;
    CHECK(f[0] == doctest::Approx(std::pow(u, -0.5)).epsilon(1e-15));
    CHECK(f[1] == doctest::Approx(-x0 * std::pow(u, -1.5)).epsilon(1e-14));
    // f'' = (2 x^2 - 1) u^(-5/2)
    CHECK(f[2] == doctest::Approx((2 * x0 * x0 - 1) * std::pow(u, -2.5) / 2).epsilon(1e-14));
    // f''' = 3x (3 - 2x^2) u^(-7/2)
    CHECK(f[3] == doctest::Approx(3 * x0 * (3 - 2 * x0 * x0) * std::pow(u, -3.5) / 6).epsilon(1e-13));
}
