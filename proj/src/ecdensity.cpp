#include "cfas/ecdensity.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cfas/errors.hpp"
#include "cfas/specfun.hpp"

namespace cfas::ecdensity {

namespace {

constexpr int kMaxSeriesTerms = 10000;

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

double sign(int exponent) { return exponent % 2 == 0 ? 1.0 : -1.0; }

// Finite (l, m) double sum multiplying the i-th series weight.
double series_inner(int j, int i, double x) {
  double inner = 0.0;
  for (int l = 0; l <= (j - 1) / 2; ++l) {
    for (int m = 0; m <= j - 1 - 2 * l; ++m) {
      if (2 < j - m - 2 * l - 2 * i) continue;
      const int r = j - 1 - m - 2 * l;
      inner += binomial(1 + 2 * i, r) * sign(j - 1 + m + l) * factorial(j - 1) *
               std::pow(x, m + l) / (factorial(m) * factorial(l) * std::pow(2.0, l));
    }
  }
  return inner;
}

// y^{r-1} d^r/dy^r { y I_0(2y) } with every Bessel factor scaled by e^{-2y}.
double scaled_derivative_term(int r, double y) {
  const double z = 2.0 * y;
  auto iz = [z](int n) { return specfun::bessel_i_scaled(std::abs(n), z); };
  if (r == 0) return iz(0);
  double d = y * iz(r);
  for (int t = 0; t < r; ++t) d += r * binomial(r - 1, t) * iz(2 * t - r + 1) + y * binomial(r, t) * iz(2 * t - r);
  return std::pow(y, r - 1) * d;
}

}  // namespace

void EcArgs::validate() const {
  if (j < 0 || j > 3) throw DomainError("EC density index j must be in 0..3, got " + std::to_string(j));
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("noncentrality lambda must be >= 0");
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("threshold x must be > 0");
}

double ec_density_series(const EcArgs& args, double tolerance) {
  args.validate();
  if (!(tolerance > 0.0)) throw DomainError("series tolerance must be > 0");
  const int j = args.j;
  const double x = args.x;
  const double lambda = args.lambda;
  if (j == 0) return specfun::marcum_q1(std::sqrt(lambda), std::sqrt(x));

  const double prefactor = std::pow(x, 1.0 - 0.5 * j) / std::pow(2.0 * std::numbers::pi, 0.5 * j);
  const double log_envelope = -0.5 * (lambda + x);
  const double lx = lambda * x;
  const double peak = 0.5 * std::sqrt(lx);
  const double log_q = lx > 0.0 ? std::log(0.25 * lx) : 0.0;

  double sum = 0.0;
  int small_run = 0;
  for (int i = 0; i < kMaxSeriesTerms; ++i) {
    double weight;
    if (lx > 0.0)
      weight = std::exp(log_envelope + i * log_q - 2.0 * std::lgamma(i + 1.0));
    else
      weight = i == 0 ? std::exp(log_envelope) : 0.0;
    const double term = prefactor * weight * series_inner(j, i, x);
    sum += term;
    small_run = std::abs(term) <= tolerance * std::abs(sum) ? small_run + 1 : 0;
    if (small_run >= 3 && i > peak) return sum;
  }
  throw ConvergenceError("ec_density_series: no convergence within 10^4 terms");
}

double ec_density_closed(const EcArgs& args) {
  args.validate();
  if (args.j == 0) throw DomainError("ec_density_closed: j = 0 has no closed form here, use the series");
  const int j = args.j;
  const double x = args.x;
  const double lambda = args.lambda;
  const double y = 0.5 * std::sqrt(lambda * x);

  double sum = 0.0;
  for (int l = 0; l <= (j - 1) / 2; ++l) {
    for (int m = 0; m <= j - 1 - 2 * l; ++m) {
      const int r = j - 1 - m - 2 * l;
      sum += sign(j - 1 + m + l) * std::pow(x, m + l) /
             (factorial(m) * factorial(l) * std::pow(2.0, l) * factorial(r)) * scaled_derivative_term(r, y);
    }
  }
  // e^{-(lambda+x)/2} e^{sqrt(lambda x)} undoes the Bessel scaling.
  const double d = std::sqrt(lambda) - std::sqrt(x);
  const double envelope = std::exp(-0.5 * d * d);
  return envelope * factorial(j - 1) * std::pow(x, 1.0 - 0.5 * j) / std::pow(2.0 * std::numbers::pi, 0.5 * j) * sum;
}

double ec_density(const EcArgs& args) {
  if (args.j == 0) {
    args.validate();
    return specfun::marcum_q1(std::sqrt(args.lambda), std::sqrt(args.x));
  }
  return ec_density_closed(args);
}

CurvatureSet curvatures(const Geometry& geometry, const CorrelationModel& corr) {
  geometry.validate();
  corr.validate();
  const int n = geometry.dim();
  // Elementary symmetric polynomials e_0..e_n of the side lengths.
  std::vector<double> e(n + 1, 0.0);
  e[0] = 1.0;
  for (int k = 0; k < n; ++k)
    for (int j = k + 1; j >= 1; --j) e[j] += e[j - 1] * geometry.sides[k];

  CurvatureSet set;
  set.euclidean = e;
  set.values.resize(n + 1);
  for (int j = 0; j <= n; ++j) set.values[j] = std::pow(corr.lambda2, 0.5 * j) * e[j];
  return set;
}

double eec(double lambda, double x, const CurvatureSet& curv) {
  double total = 0.0;
  for (int j = 0; j <= curv.dim(); ++j) {
    if (curv.values[j] == 0.0 && j > 0) continue;
    total += curv.values[j] * ec_density({j, lambda, x});
  }
  return total;
}

}  // namespace cfas::ecdensity
