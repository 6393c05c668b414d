#include "cfas/model.hpp"

#include <cmath>
#include <string>

#include "cfas/errors.hpp"

namespace cfas {

void ChannelParams::validate() const {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be finite and >= 0");
  if (!(gain_ratio > 0.0) || !std::isfinite(gain_ratio)) throw DomainError("gain_ratio must be > 0");
  if (!(phi >= 0.0 && phi <= std::numbers::pi / 2)) throw DomainError("phi must lie in [0, pi/2]");
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) throw DomainError("theta must lie in [0, pi]");
}

void Geometry::validate() const {
  if (sides.size() > 3) throw DomainError("geometry supports at most 3 dimensions");
  for (double t : sides)
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("side lengths must be finite and >= 0");
}

double CorrelationModel::operator()(double tau) const {
  switch (family) {
    case CorrelationFamily::Jakes:
      return std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * tau);
    case CorrelationFamily::Quadratic:
      return std::exp(-a * tau * tau);
  }
  return 0.0;
}

void CorrelationModel::validate() const {
  if (!(lambda2 > 0.0) || !std::isfinite(lambda2)) throw DomainError("lambda2 must be > 0");
  if (std::abs(lambda2 - 2.0 * a) > 1e-12 * lambda2) throw DomainError("lambda2 must equal 2a");
}

}  // namespace cfas
