#include "cfas/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cfas/errors.hpp"

namespace cfas::specfun {

namespace {

constexpr double kSeriesLimit = 30.0;
constexpr double kEps = 1e-17;

void check_bessel_args(int order, double z) {
  if (order < 0 || order > kMaxBesselOrder)
    throw DomainError("bessel_i: unsupported order " + std::to_string(order));
  if (!(z >= 0.0)) throw DomainError("bessel_i: argument must be nonnegative");
}

// sum_k (z/2)^{2k+n} / (k! (k+n)!), all terms positive.
double bessel_i_series(int order, double z) {
  const double half = 0.5 * z;
  double term = 1.0;
  for (int i = 1; i <= order; ++i) term *= half / i;
  if (term == 0.0) return 0.0;
  const double q = half * half;
  double sum = term;
  for (int k = 1; k < 1000; ++k) {
    term *= q / (static_cast<double>(k) * (k + order));
    sum += term;
    if (term < kEps * sum) break;
  }
  return sum;
}

// e^{-z} I_n(z) ~ (2 pi z)^{-1/2} sum_k (-1)^k a_k(n) / z^k for large z.
double bessel_i_scaled_asymptotic(int order, double z) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * z);
    // Terms grow while (2k-1)^2 < mu; past that, growth means the series diverges.
    if (odd * odd > mu && std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < kEps * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

}  // namespace

double bessel_i(int order, double z) {
  check_bessel_args(order, z);
  if (z <= kSeriesLimit) return bessel_i_series(order, z);
  return bessel_i_scaled_asymptotic(order, z) * std::exp(z);
}

double bessel_i_scaled(int order, double z) {
  check_bessel_args(order, z);
  if (z <= kSeriesLimit) return bessel_i_series(order, z) * std::exp(-z);
  return bessel_i_scaled_asymptotic(order, z);
}

double marcum_q1(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("marcum_q1: arguments must be nonnegative");
  const double mu = 0.5 * a * a;
  const double nu = 0.5 * b * b;
  if (nu == 0.0) return 1.0;
  if (mu == 0.0) return std::exp(-nu);

  const double log_mu = std::log(mu);
  const double log_nu = std::log(nu);
  const int k_max = static_cast<int>(mu + 60.0 * std::sqrt(mu) + 2000.0);
  double cdf = 0.0;  // P(Poisson(nu) <= k)
  double q = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    const double lg = std::lgamma(k + 1.0);
    cdf += std::exp(-nu + k * log_nu - lg);
    if (cdf > 1.0) cdf = 1.0;
    const double weight = std::exp(-mu + k * log_mu - lg);
    q += weight * cdf;
    if (k + 1 > mu && weight * (k + 1) / (k + 1 - mu) < kEps) return std::min(q, 1.0);
  }
  throw ConvergenceError("marcum_q1: Poisson mixture did not converge");
}

double erfi(double x) {
  const double ax = std::abs(x);
  if (!(ax <= kMaxErfiArgument)) throw std::overflow_error("erfi: |x| exceeds 12");
  if (ax == 0.0) return 0.0;
  const double x2 = ax * ax;
  double power = ax;  // x^{2k+1} / k!
  double sum = ax;
  for (int k = 1; k < 2000; ++k) {
    power *= x2 / k;
    const double term = power / (2.0 * k + 1.0);
    sum += term;
    if (k > x2 && term < kEps * sum) break;
  }
  const double value = 2.0 / std::sqrt(std::numbers::pi) * sum;
  return x < 0.0 ? -value : value;
}

QuadratureRule gauss_legendre(int order) {
  if (order < 2 || order > 256)
    throw DomainError("gauss_legendre: order must be in [2, 256], got " + std::to_string(order));
  QuadratureRule rule;
  rule.order = order;
  rule.nodes.assign(order, 0.0);
  rule.weights.assign(order, 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-like initial guess for the i-th largest root, then Newton.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int n = 2; n <= order; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int n = 2; n <= order; ++n) {
      const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[order - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

}  // namespace cfas::specfun
