#pragma once

#include <string>
#include <vector>

#include "cfas/model.hpp"

namespace cfas::equiv {

/// How the Ricean normalized threshold x is tied to the Rayleigh one x0.
///
/// SameRawThreshold: x0 puts the Rayleigh square at target_hsp; both links see
///   the same raw threshold u, so x = (kappa + 1) x0; solve P_Rice(x, T) = target_hsp.
/// RiceanCalibrated: x puts the Ricean square of side t_ray at target_hsp;
///   x0 = x / (kappa + 1); solve P_Rice(x, T) = P_Ray(x0, t_ray).
enum class ThresholdMapping { SameRawThreshold, RiceanCalibrated };

std::string to_string(ThresholdMapping mapping);
ThresholdMapping mapping_from_string(const std::string& name);

struct EquivalenceResult {
  double t_ray = 0.0;
  double kappa = 0.0;
  double t_rice = 0.0;
  double area_ratio = 0.0;  // (t_rice / t_ray)^2
  double x0 = 0.0;
  double x = 0.0;
  int iterations = 0;
  bool non_physical = false;  // area_ratio < 1 with kappa > 0
};

/// Rayleigh normalized threshold x0 at which the square of side t_ray has
/// HSP = target_hsp (largest root, bracketed above -2 ln target).
double calibrate_threshold(double t_ray, double target_hsp,
                           const CorrelationModel& corr = CorrelationModel::jakes());

EquivalenceResult solve_equivalent_side(double t_ray, double kappa, double target_hsp,
                                        const CorrelationModel& corr = CorrelationModel::jakes(),
                                        ThresholdMapping mapping = ThresholdMapping::SameRawThreshold);

inline const std::vector<double> kTable3Sides{0.5, 1.0, 1.5, 2.0};
inline const std::vector<double> kTable3Kappas{1.0, 4.0, 7.0};

/// Area ratios for t_ray in {0.5, 1, 1.5, 2} (rows) by kappa in {1, 4, 7} (columns), HSP 0.01.
std::vector<std::vector<EquivalenceResult>> table3(const CorrelationModel& corr = CorrelationModel::jakes(),
                                                   ThresholdMapping mapping = ThresholdMapping::SameRawThreshold);

}  // namespace cfas::equiv
