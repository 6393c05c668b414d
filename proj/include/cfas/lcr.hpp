#pragma once

#include <string>
#include <vector>

#include "cfas/model.hpp"

namespace cfas::lcr {

/// Which form of the LoS-motion factor to integrate.
///
/// Derived: e^{-c^2} + sqrt(pi) c erf(c) with real c = sqrt(2 kappa) sin(phi) sin(theta) sin(psi)
/// (scaled by the steering rate for non-Jakes lambda2). This is the Rice-formula result for
/// a rotating LoS phase and is always >= 1.
/// Erfi: the same expression evaluated at c -> i c, i.e. e^{c^2} - sqrt(pi) c erfi(c),
/// which turns negative once c exceeds about 0.92.
enum class LcrIntegrand { Derived, Erfi };

struct LcrResult {
  double rate = 0.0;            // upcrossings of x per wavelength
  double imag_residual = 0.0;   // |imaginary part| discarded from the complex evaluation
};

inline constexpr int kDefaultQuadOrder = 64;

/// Level crossing rate of the normalized SNR process X(t) at level x (1D).
///
/// Gauss-Legendre on psi in [0, pi/2]; throws ConvergenceError if doubling the
/// order moves the result by more than 1e-8 relative. The returned rate is the
/// one computed at quad_order.
LcrResult lcr_rate(const ChannelParams& params, double x, int quad_order = kDefaultQuadOrder,
                   LcrIntegrand integrand = LcrIntegrand::Derived,
                   const CorrelationModel& corr = CorrelationModel::jakes());

/// Q_1(sqrt(2 kappa), sqrt(x)) + T1 * LCR(x).
double hsp_lcr_1d(const ChannelParams& params, double t1, double x, int quad_order = kDefaultQuadOrder,
                  LcrIntegrand integrand = LcrIntegrand::Derived,
                  const CorrelationModel& corr = CorrelationModel::jakes());

struct DiscrepancyRow {
  double kappa = 0.0;
  double phi = 0.0;
  double x = 0.0;           // threshold at which hsp_lcr_1d == target
  double difference = 0.0;  // hsp_lcr_1d - hsp_closed(dim 1) at x
  bool ok = true;
  std::string message;      // failure reason when !ok
};

struct DiscrepancyOptions {
  double theta = 1.5707963267948966;
  int quad_order = kDefaultQuadOrder;
  LcrIntegrand integrand = LcrIntegrand::Derived;
  double x_lo = 1e-6;
  double x_hi = 200.0;
  double hsp_tol = 1e-12;
};

/// LCR-minus-EEC surface over (kappa, phi) at the threshold giving target_hsp.
/// Per-cell solver failures are reported in the row, not thrown.
std::vector<DiscrepancyRow> discrepancy_map(const std::vector<double>& kappa_grid, const std::vector<double>& phi_grid,
                                            double t1, double target_hsp, const DiscrepancyOptions& options = {},
                                            const CorrelationModel& corr = CorrelationModel::jakes());

}  // namespace cfas::lcr
