#include "cfas/equiv.hpp"

#include <cmath>
#include <numbers>

#include "cfas/errors.hpp"
#include "cfas/hsp.hpp"
#include "cfas/rootfind.hpp"
#include "cfas/specfun.hpp"

namespace cfas::equiv {

namespace {

double square_hsp(double kappa, double x, double side, const CorrelationModel& corr) {
  return hsp::hsp_closed(2, {kappa, 0.0, std::numbers::pi / 2, 1.0}, Geometry{{side, side}}, x, corr);
}

void check_target(double target_hsp) {
  if (!(target_hsp > 1e-6 && target_hsp < 0.5)) throw DomainError("target HSP must lie in (1e-6, 0.5)");
}

// Largest x with square_hsp(kappa, x, side) == target. Starts from the point
// where the 0D term alone equals the target and walks the bracket outward.
RootResult upper_threshold_root(double kappa, double side, double target, const CorrelationModel& corr) {
  const double a = std::sqrt(2.0 * kappa);
  double lo;
  if (kappa == 0.0) {
    lo = -2.0 * std::log(target);
  } else {
    auto tail = [&](double x) { return specfun::marcum_q1(a, std::sqrt(x)) - target; };
    double hi = 2.0 * kappa + 10.0;
    while (tail(hi) > 0.0) hi *= 2.0;
    lo = find_root(tail, 1e-12, hi, 1e-16).x;
  }
  auto excess = [&](double x) { return square_hsp(kappa, x, side, corr) - target; };
  if (side == 0.0) return {lo, 0};
  for (int i = 0; i < 60 && excess(lo) < 0.0; ++i) lo *= 0.5;
  double hi = lo + 40.0;
  for (int i = 0; i < 200 && excess(hi) > 0.0; ++i) hi += 40.0;
  return find_root(excess, lo, hi, 1e-16 * target, 1e-15);
}

}  // namespace

std::string to_string(ThresholdMapping mapping) {
  return mapping == ThresholdMapping::SameRawThreshold ? "same-raw-threshold" : "ricean-calibrated";
}

ThresholdMapping mapping_from_string(const std::string& name) {
  if (name == "same-raw-threshold") return ThresholdMapping::SameRawThreshold;
  if (name == "ricean-calibrated") return ThresholdMapping::RiceanCalibrated;
  throw DomainError("unknown threshold mapping '" + name + "'");
}

double calibrate_threshold(double t_ray, double target_hsp, const CorrelationModel& corr) {
  check_target(target_hsp);
  if (!(t_ray >= 0.0) || !std::isfinite(t_ray)) throw DomainError("t_ray must be >= 0");
  corr.validate();
  return upper_threshold_root(0.0, t_ray, target_hsp, corr).x;
}

EquivalenceResult solve_equivalent_side(double t_ray, double kappa, double target_hsp, const CorrelationModel& corr,
                                        ThresholdMapping mapping) {
  check_target(target_hsp);
  if (!(t_ray > 0.0) || !std::isfinite(t_ray)) throw DomainError("t_ray must be > 0");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be >= 0");
  corr.validate();

  EquivalenceResult result;
  result.t_ray = t_ray;
  result.kappa = kappa;
  double goal = target_hsp;
  if (mapping == ThresholdMapping::SameRawThreshold) {
    const auto root = upper_threshold_root(0.0, t_ray, target_hsp, corr);
    result.x0 = root.x;
    result.x = (kappa + 1.0) * root.x;
    result.iterations += root.iterations;
  } else {
    const auto root = upper_threshold_root(kappa, t_ray, target_hsp, corr);
    result.x = root.x;
    result.x0 = root.x / (kappa + 1.0);
    result.iterations += root.iterations;
    goal = square_hsp(0.0, result.x0, t_ray, corr);
  }

  const double x = result.x;
  auto gap = [&](double side) { return square_hsp(kappa, x, side, corr) - goal; };
  double lo = t_ray;
  double hi = 100.0 * t_ray;
  if (gap(lo) > 0.0) {
    hi = lo;
    while (gap(lo) > 0.0) {
      lo *= 0.5;
      if (lo < 1e-12 * t_ray) throw ConvergenceError("no side length reaches the target: fixed-antenna term already exceeds it");
    }
  }
  while (gap(hi) < 0.0) {
    lo = hi;
    hi *= 10.0;
    if (hi > 1e12 * t_ray) throw ConvergenceError("side-length bracket exceeded 1e12 * t_ray");
  }
  const auto root = find_root(gap, lo, hi, 1e-15 * goal, 1e-15);
  result.t_rice = root.x;
  result.iterations += root.iterations;
  result.area_ratio = (result.t_rice / t_ray) * (result.t_rice / t_ray);
  result.non_physical = kappa > 0.0 && result.area_ratio < 1.0;
  return result;
}

std::vector<std::vector<EquivalenceResult>> table3(const CorrelationModel& corr, ThresholdMapping mapping) {
  std::vector<std::vector<EquivalenceResult>> table;
  for (double t_ray : kTable3Sides) {
    auto& row = table.emplace_back();
    for (double kappa : kTable3Kappas) row.push_back(solve_equivalent_side(t_ray, kappa, 0.01, corr, mapping));
  }
  return table;
}

}  // namespace cfas::equiv
