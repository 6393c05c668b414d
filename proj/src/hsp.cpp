#include "cfas/hsp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cfas/ecdensity.hpp"
#include "cfas/errors.hpp"
#include "cfas/specfun.hpp"

namespace cfas::hsp {

ThresholdSpec normalize_threshold(double u, const ChannelParams& params) {
  params.validate();
  if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("threshold u must be > 0");
  return {u, 2.0 * (params.kappa + 1.0) * u / params.gain_ratio};
}

ThresholdSpec denormalize_threshold(double x, const ChannelParams& params) {
  params.validate();
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("threshold x must be > 0");
  return {x * params.gain_ratio / (2.0 * (params.kappa + 1.0)), x};
}

double hsp_closed(int dim, const ChannelParams& params, const Geometry& geom, double x,
                  const CorrelationModel& corr) {
  params.validate();
  geom.validate();
  corr.validate();
  if (dim < 0 || dim > 3) throw DomainError("dimension must be in 0..3, got " + std::to_string(dim));
  if (geom.dim() != dim)
    throw DomainError("dimension mismatch: dim=" + std::to_string(dim) + " but " + std::to_string(geom.dim()) +
                      " side lengths given");
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("threshold x must be > 0");

  const double kappa = params.kappa;
  const double q0 = specfun::marcum_q1(std::sqrt(2.0 * kappa), std::sqrt(x));
  if (dim == 0) return q0;

  const double pi = std::numbers::pi;
  const double l2 = corr.lambda2;
  const double c = std::sqrt(l2 / (2.0 * pi));
  const double z = std::sqrt(2.0 * kappa * x);
  // e^{-(kappa + x/2)} I_n(z) = e^{-(sqrt(kappa) - sqrt(x/2))^2} * (e^{-z} I_n(z))
  const double d = std::sqrt(kappa) - std::sqrt(0.5 * x);
  const double envelope = std::exp(-d * d);
  const double i0 = specfun::bessel_i_scaled(0, z);
  const double sx = std::sqrt(x);

  const auto& t = geom.sides;
  if (dim == 1) return q0 + envelope * t[0] * std::sqrt(l2 * x / (2.0 * pi)) * i0;

  const double i1 = specfun::bessel_i_scaled(1, z);
  if (dim == 2) {
    const double perimeter = t[0] + t[1];
    const double area = t[0] * t[1];
    return q0 + envelope * c *
                    ((perimeter * sx + area * c * (x - 1.0)) * i0 -
                     area * std::sqrt(l2 * kappa * x / pi) * i1);
  }

  const double i2 = specfun::bessel_i_scaled(2, z);
  const double s1 = t[0] + t[1] + t[2];
  const double s2 = t[0] * t[1] + t[0] * t[2] + t[1] * t[2];
  const double s3 = t[0] * t[1] * t[2];
  const double i0_coeff = s1 * sx + c * (s2 * (x - 1.0) + s3 * std::sqrt(l2 * x / (2.0 * pi)) * (x + kappa - 3.0));
  const double i1_coeff = std::sqrt(kappa * l2 / pi) * (s3 * std::sqrt(2.0 * l2 / pi) * (1.0 - x) - s2 * sx);
  const double i2_coeff = s3 * l2 * kappa * sx / (2.0 * pi);
  return q0 + envelope * c * (i0_coeff * i0 + i1_coeff * i1 + i2_coeff * i2);
}

bool asymptotic_regime(int dim, double kappa, double x, double hsp_value) {
  if (!(hsp_value < 0.2)) return false;
  for (int j = 0; j <= dim; ++j)
    if (!(ecdensity::ec_density({j, 2.0 * kappa, x}) > 0.0)) return false;
  return true;
}

std::vector<HspPoint> hsp_sweep(int dim, const ChannelParams& params, const Geometry& geom,
                                const std::vector<double>& x_grid, const CorrelationModel& corr) {
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (!(x_grid[i] > 0.0)) throw DomainError("x grid values must be positive");
    if (i > 0 && !(x_grid[i] > x_grid[i - 1])) throw DomainError("x grid must be strictly increasing");
  }
  std::vector<HspPoint> rows;
  rows.reserve(x_grid.size());
  for (double x : x_grid) {
    const double value = hsp_closed(dim, params, geom, x, corr);
    rows.push_back({x, denormalize_threshold(x, params).u, value, asymptotic_regime(dim, params.kappa, x, value)});
  }
  return rows;
}

}  // namespace cfas::hsp
