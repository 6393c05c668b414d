#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cfas/specfun.hpp"

using namespace cfas::specfun;

namespace {

// Composite Simpson on [lo, hi] with n (even) panels.
template <class F>
double simpson(F f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return sum * h / 3.0;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("bessel_i matches the standard library over series and asymptotic ranges") {
  for (int n = 0; n <= kMaxBesselOrder; ++n) {
    for (double z : {1e-8, 0.1, 0.5, 1.0, 3.7, 10.0, 25.0, 29.99, 30.01, 45.0, 120.0, 600.0}) {
      const double expected = std::cyl_bessel_i(static_cast<double>(n), z);
      CHECK_MESSAGE(rel(bessel_i(n, z), expected) < 1e-13, "n=" << n << " z=" << z);
    }
  }
}

TEST_CASE("bessel_i edge values") {
  CHECK(bessel_i(0, 0.0) == 1.0);
  for (int n = 1; n <= kMaxBesselOrder; ++n) CHECK(bessel_i(n, 0.0) == 0.0);
  CHECK_THROWS_AS(bessel_i(9, 1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_i(0, -1.0), std::domain_error);
}

TEST_CASE("scaled bessel stays finite where the plain one overflows") {
  const double z = 800.0;
  CHECK(std::isinf(std::exp(z)));
  const double scaled = bessel_i_scaled(0, z);
  CHECK(std::isfinite(scaled));
  // Leading Hankel term 1/sqrt(2 pi z) with the 1/(8z) correction.
  CHECK(rel(scaled, (1.0 + 1.0 / (8.0 * z)) / std::sqrt(2.0 * std::numbers::pi * z)) < 1e-5);
  CHECK(rel(bessel_i_scaled(2, 12.0), std::exp(-12.0) * std::cyl_bessel_i(2.0, 12.0)) < 1e-13);
}

TEST_CASE("marcum_q1 equals the integrated Rice tail") {
  for (double a : {0.0, 0.5, 2.0, 4.0, 7.5}) {
    for (double b : {0.1, 1.0, 3.0, 6.0, 9.0}) {
      // Rice density r exp(-(r^2 + a^2)/2) I0(a r), written with the scaled Bessel to avoid overflow.
      auto pdf = [a](double r) {
        return r * std::exp(-0.5 * (r - a) * (r - a)) * std::exp(-a * r) * std::cyl_bessel_i(0.0, a * r);
      };
      const double tail = simpson(pdf, b, b + a + 40.0, 40000);
      CHECK_MESSAGE(rel(marcum_q1(a, b), tail) < 1e-9, "a=" << a << " b=" << b);
    }
  }
}

TEST_CASE("marcum_q1 boundary cases") {
  CHECK(marcum_q1(3.0, 0.0) == 1.0);
  CHECK(marcum_q1(0.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  // Deep tail keeps relative accuracy rather than cancelling to zero.
  const double deep = marcum_q1(2.0, 14.0);
  CHECK(deep > 0.0);
  CHECK(deep < 1e-30);
  CHECK_THROWS(marcum_q1(-1.0, 1.0));
}

TEST_CASE("erfi equals the integral of exp(t^2)") {
  for (double x : {-3.0, -0.7, 0.0, 1e-6, 0.4, 1.0, 2.5, 5.0, 11.5}) {
    const double expected = 2.0 / std::sqrt(std::numbers::pi) * simpson([](double t) { return std::exp(t * t); }, 0.0, x, 200000);
    CHECK_MESSAGE(std::abs(erfi(x) - expected) <= 1e-10 * std::max(1.0, std::abs(expected)), "x=" << x);
  }
  CHECK_THROWS_AS(erfi(12.5), std::overflow_error);
}

TEST_CASE("gauss_legendre integrates polynomials up to degree 2n-1 exactly") {
  for (int order : {2, 5, 16, 64, 256}) {
    const auto rule = gauss_legendre(order);
    REQUIRE(rule.nodes.size() == static_cast<std::size_t>(order));
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    for (std::size_t i = 1; i < rule.nodes.size(); ++i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
    const int degree = std::min(2 * order - 1, 40);
    for (int k = 0; k <= degree; ++k) {
      const double got = rule.integrate([k](double t) { return std::pow(t, k); }, 0.0, 1.0);
      CHECK(got == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("five point rule has the tabulated nodes") {
  const auto rule = gauss_legendre(5);
  const double outer = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
  const double inner = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
  CHECK(rule.nodes[0] == doctest::Approx(-outer).epsilon(1e-15));
  CHECK(rule.nodes[1] == doctest::Approx(-inner).epsilon(1e-15));
  CHECK(std::abs(rule.nodes[2]) < 1e-15);
  CHECK(rule.weights[2] == doctest::Approx(128.0 / 225.0).epsilon(1e-15));
  CHECK_THROWS(gauss_legendre(1));
  CHECK_THROWS(gauss_legendre(257));
}
