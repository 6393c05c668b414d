#pragma once

#include <optional>
#include <vector>

#include "cfas/model.hpp"

namespace cfas::hsp {

/// Raw SNR threshold u and its normalized form x = 2 (kappa + 1) u / gain_ratio.
struct ThresholdSpec {
  double u = 0.0;
  double x = 0.0;
};

ThresholdSpec normalize_threshold(double u, const ChannelParams& params);
ThresholdSpec denormalize_threshold(double x, const ChannelParams& params);

/// Closed-form high-SNR probability of an n-dimensional box (n = 0..3).
///
/// 0D is the Ricean CCDF Q_1(sqrt(2 kappa), sqrt(x)); 1D-3D add the EEC
/// length, area and volume terms with I_0, I_1 and I_2 factors. The value is
/// an asymptotic approximation and is not clamped to [0, 1].
double hsp_closed(int dim, const ChannelParams& params, const Geometry& geom, double x,
                  const CorrelationModel& corr = CorrelationModel::jakes());

/// True when the EEC approximation is in its intended regime: HSP < 0.2 and
/// every EC density rho_0..rho_dim at (2 kappa, x) is positive.
bool asymptotic_regime(int dim, double kappa, double x, double hsp_value);

struct HspPoint {
  double x = 0.0;
  double u = 0.0;
  double hsp = 0.0;
  bool asymptotic = false;
};

/// One row per normalized threshold; x_grid must be positive and strictly increasing.
std::vector<HspPoint> hsp_sweep(int dim, const ChannelParams& params, const Geometry& geom,
                                const std::vector<double>& x_grid,
                                const CorrelationModel& corr = CorrelationModel::jakes());

}  // namespace cfas::hsp
