#pragma once

#include <vector>

namespace cfas::specfun {

/// Gauss-Legendre rule on [-1, 1]. Nodes are strictly increasing.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;

  /// Integrates f over [lo, hi] after the affine remap of the nodes.
  template <class F>
  double integrate(F&& f, double lo, double hi) const {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(mid + half * nodes[i]);
    return half * sum;
  }
};

inline constexpr int kMaxBesselOrder = 8;
inline constexpr double kMaxErfiArgument = 12.0;

/// Modified Bessel function of the first kind I_n(z), integer order 0..8, z >= 0.
///
/// Power series for z <= 30 and the Hankel asymptotic expansion beyond that.
/// Relative error is at the level of a few ulps over the whole range.
double bessel_i(int order, double z);

/// Exponentially scaled variant e^{-z} I_n(z). Never overflows; use it when
/// the Bessel factor is multiplied by a decaying exponential.
double bessel_i_scaled(int order, double z);

/// First-order Marcum Q function Q_1(a, b) = P(chi^2_2(a^2) >= b^2).
///
/// Evaluated as a Poisson(a^2/2) mixture of central chi^2_{2+2k} tails; each
/// tail is itself a Poisson(b^2/2) CDF. The mixture is cut where the Poisson
/// tail bound p_k (k+1)/(k+1-mu) drops below 1e-17.
double marcum_q1(double a, double b);

/// Imaginary error function erfi(x) = -i erf(ix), |x| <= 12.
double erfi(double x);

/// Gauss-Legendre nodes and weights of the given order (2..256).
QuadratureRule gauss_legendre(int order);

}  // namespace cfas::specfun
