#include "cfas/lcr.hpp"

#include <cmath>
#include <algorithm>
#include <complex>
#include <limits>
#include <numbers>

#include "cfas/errors.hpp"
#include "cfas/hsp.hpp"
#include "cfas/rootfind.hpp"
#include "cfas/specfun.hpp"

namespace cfas::lcr {

namespace {

constexpr double kQuadRelTol = 1e-8;

struct Integrand {
  double amplitude;   // sqrt(2 kappa x)
  double offset;      // kappa + x/2
  double motion;      // c(psi) = motion * sin(psi)
  LcrIntegrand form;

  // Returns the integrand and adds |Im| of the complex evaluation to residual.
  double operator()(double psi, double& residual) const {
    const double a = amplitude * std::cos(psi);
    const double hyperbolic = 0.5 * (std::exp(a - offset) + std::exp(-a - offset));
    const double c = motion * std::sin(psi);
    if (form == LcrIntegrand::Derived) {
      const double g = std::exp(-c * c) + std::sqrt(std::numbers::pi) * c * std::erf(c);
      return hyperbolic * g;
    }
    // erf(i c) = i erfi(c)
    const std::complex<double> ic(0.0, c);
    const std::complex<double> erf_ic(0.0, specfun::erfi(c));
    const std::complex<double> g = std::exp(c * c) + std::sqrt(std::numbers::pi) * ic * erf_ic;
    residual += std::abs(g.imag()) * hyperbolic;
    return hyperbolic * g.real();
  }
};

LcrResult integrate(const Integrand& f, double prefactor, int order) {
  const auto rule = specfun::gauss_legendre(order);
  const double half = std::numbers::pi / 4;
  double sum = 0.0;
  double imag = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double r = 0.0;
    sum += rule.weights[i] * f(half + half * rule.nodes[i], r);
    imag += rule.weights[i] * r;
  }
  return {prefactor * half * sum, prefactor * half * imag};
}

}  // namespace

LcrResult lcr_rate(const ChannelParams& params, double x, int quad_order, LcrIntegrand integrand,
                   const CorrelationModel& corr) {
  params.validate();
  corr.validate();
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("threshold x must be > 0");
  const double pi = std::numbers::pi;
  const double kappa = params.kappa;
  // Steering rate of the LoS phase along the line, relative to the derivative scale.
  const double omega = 2.0 * pi * std::sin(params.phi) * std::sin(params.theta);
  const Integrand f{std::sqrt(2.0 * kappa * x), kappa + 0.5 * x,
                    omega * std::sqrt(2.0 * kappa) / std::sqrt(2.0 * corr.lambda2), integrand};
  const double prefactor = std::sqrt(x) * (2.0 / pi) * std::sqrt(corr.lambda2 / (2.0 * pi));

  const LcrResult result = integrate(f, prefactor, quad_order);
  const int check_order = std::min(2 * quad_order, 256);
  if (check_order > quad_order) {
    const LcrResult refined = integrate(f, prefactor, check_order);
    const double scale = std::max(std::abs(refined.rate), std::numeric_limits<double>::min());
    if (std::abs(result.rate - refined.rate) > kQuadRelTol * scale)
      throw ConvergenceError("lcr_rate: quadrature order " + std::to_string(quad_order) + " not converged");
  }
  return result;
}

double hsp_lcr_1d(const ChannelParams& params, double t1, double x, int quad_order, LcrIntegrand integrand,
                  const CorrelationModel& corr) {
  if (!(t1 >= 0.0) || !std::isfinite(t1)) throw DomainError("T1 must be >= 0");
  const double q0 = specfun::marcum_q1(std::sqrt(2.0 * params.kappa), std::sqrt(x));
  if (t1 == 0.0) {
    params.validate();
    return q0;
  }
  return q0 + t1 * lcr_rate(params, x, quad_order, integrand, corr).rate;
}

std::vector<DiscrepancyRow> discrepancy_map(const std::vector<double>& kappa_grid, const std::vector<double>& phi_grid,
                                            double t1, double target_hsp, const DiscrepancyOptions& options,
                                            const CorrelationModel& corr) {
  if (!(target_hsp > 0.0 && target_hsp < 0.5)) throw DomainError("target HSP must lie in (0, 0.5)");
  if (!(t1 >= 0.0)) throw DomainError("T1 must be >= 0");
  std::vector<DiscrepancyRow> rows;
  rows.reserve(kappa_grid.size() * phi_grid.size());
  for (double kappa : kappa_grid) {
    for (double phi : phi_grid) {
      DiscrepancyRow row;
      row.kappa = kappa;
      row.phi = phi;
      try {
        const ChannelParams params{kappa, phi, options.theta, 1.0};
        params.validate();
        auto excess = [&](double x) {
          return hsp_lcr_1d(params, t1, x, options.quad_order, options.integrand, corr) - target_hsp;
        };
        row.x = find_root(excess, options.x_lo, options.x_hi, options.hsp_tol).x;
        row.difference = hsp_lcr_1d(params, t1, row.x, options.quad_order, options.integrand, corr) -
                         hsp::hsp_closed(1, params, Geometry{{t1}}, row.x, corr);
      } catch (const std::exception& e) {
        row.ok = false;
        row.message = e.what();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace cfas::lcr
