#pragma once

#include <numbers>
#include <vector>

namespace cfas {

/// Ricean link description. Angles in radians.
struct ChannelParams {
  double kappa = 0.0;       // Ricean K-factor
  double phi = 0.0;         // azimuth of the LoS ray, [0, pi/2]
  double theta = std::numbers::pi / 2;  // elevation of the LoS ray, [0, pi]
  double gain_ratio = 1.0;  // beta E_s / sigma^2, linear

  /// Throws DomainError when any field is outside its range.
  void validate() const;
};

/// Box-shaped antenna region: 0..3 side lengths in wavelengths.
struct Geometry {
  std::vector<double> sides;

  int dim() const { return static_cast<int>(sides.size()); }
  void validate() const;
};

enum class CorrelationFamily {
  Jakes,      // rho(tau) = J0(2 pi tau)
  Quadratic,  // rho(tau) = exp(-a tau^2)
};

/// Isotropic spatial correlation of the scattered component.
///
/// Only the small-lag curvature enters the analytic formulas:
/// rho(tau) ~ 1 - a tau^2, and the derivative variance is lambda2 = 2a.
struct CorrelationModel {
  CorrelationFamily family = CorrelationFamily::Jakes;
  double a = std::numbers::pi * std::numbers::pi;
  double lambda2 = 2.0 * std::numbers::pi * std::numbers::pi;

  static CorrelationModel jakes() { return {}; }
  static CorrelationModel quadratic(double a) { return {CorrelationFamily::Quadratic, a, 2.0 * a}; }

  /// Correlation at separation tau (wavelengths).
  double operator()(double tau) const;
  void validate() const;
};

}  // namespace cfas
