#pragma once

#include <vector>

#include "cfas/model.hpp"

namespace cfas::ecdensity {

/// Arguments of the EC density of a noncentral chi^2_2(lambda) field.
struct EcArgs {
  int j = 0;            // dimension index 0..3
  double lambda = 0.0;  // noncentrality (2 kappa for the Ricean field)
  double x = 0.0;       // normalized threshold

  void validate() const;
};

/// Lipschitz-Killing curvatures of a box: L_j = lambda2^{j/2} L_j^E.
struct CurvatureSet {
  std::vector<double> values;
  std::vector<double> euclidean;

  int dim() const { return static_cast<int>(values.size()) - 1; }
};

/// EC density from the infinite i-series with the literal indicator.
///
/// j = 0 returns Q_1(sqrt(lambda), sqrt(x)). For j >= 1 the i-sum stops once
/// three consecutive terms are below tolerance * |running sum| and the terms
/// are past their peak. Throws ConvergenceError after 10^4 terms.
double ec_density_series(const EcArgs& args, double tolerance = 1e-16);

/// Finite closed form for j >= 1, assembled from the derivative identity
/// S_jlm = y^{r-1}/r! d^r/dy^r { y I_0(2y) }, 2y = sqrt(lambda x), r = j-1-m-2l.
/// Bessel factors are carried exponentially scaled, so large lambda*x is safe.
double ec_density_closed(const EcArgs& args);

/// rho_0 for j = 0, closed form for j >= 1.
double ec_density(const EcArgs& args);

/// Euclidean intrinsic volumes of the box (elementary symmetric polynomials
/// of the side lengths) and their lambda2-scaled counterparts.
CurvatureSet curvatures(const Geometry& geometry, const CorrelationModel& corr);

/// Expected Euler characteristic sum_j L_j rho_j(lambda, x). No clamping.
double eec(double lambda, double x, const CurvatureSet& curv);

}  // namespace cfas::ecdensity
