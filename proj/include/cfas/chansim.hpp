#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "cfas/model.hpp"

namespace cfas::chansim {

inline constexpr std::size_t kDefaultPointCap = 40000;

/// Regular sampling grid over the antenna box. Points per axis are
/// floor(T_i / spacing) + 1, laid out row-major (last axis fastest).
struct GridSpec {
  int dim = 0;
  std::vector<double> sides;
  double spacing = 0.01;
  std::size_t point_cap = kDefaultPointCap;

  std::vector<std::size_t> points_per_axis() const;
  std::size_t point_count() const;
  /// Coordinates of every grid point, dim entries per point.
  std::vector<std::vector<double>> positions() const;
  /// Throws DomainError on bad shape and CapacityError above point_cap.
  void validate() const;
};

/// 2D and 3D LoS phase conventions. AsListed uses t1 sin(phi) sin(theta) + t2 cos(theta) in 2D
/// and t1 cos(phi) sin(theta) + t2 sin(phi) sin(theta) + t3 cos(theta) in 3D. Embedded uses the
/// first two 3D terms for the 2D box as well.
enum class SteeringConvention { AsListed, Embedded };

/// Phase (radians) of the unit-modulus LoS steering function at a point.
double steering_phase(const std::vector<double>& t, const ChannelParams& params,
                      SteeringConvention convention = SteeringConvention::AsListed);

Eigen::MatrixXd build_covariance(const GridSpec& grid, const CorrelationModel& corr);

struct CovarianceFactor {
  Eigen::MatrixXd lower;  // L with L L^T = Sigma + jitter I
  double jitter = 0.0;
};

/// Cholesky factor with diagonal jitter escalation 0, 1e-12, 1e-10, 1e-8.
CovarianceFactor factor_covariance(const Eigen::MatrixXd& sigma);

/// Complex channel at every grid point, unit channel gain (E|h|^2 = 1).
struct FieldRealization {
  std::vector<std::complex<double>> values;
};

/// Per-replicate random stream: identical for a given (seed, replicate) pair
/// regardless of how replicates are distributed over workers.
std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t replicate);

/// h(t) = sqrt(kappa/(kappa+1)) a(t) + sqrt(1/(2(kappa+1))) (L g1 + i L g2), g ~ N(0, I).
FieldRealization sample_field(const CovarianceFactor& factor, const ChannelParams& params, const GridSpec& grid,
                              std::mt19937_64& rng,
                              SteeringConvention convention = SteeringConvention::AsListed);

struct HspEstimate {
  double u = 0.0;
  double x = 0.0;
  double p_hat = 0.0;
  double stderr_ = 0.0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

struct SimOptions {
  std::size_t replicates = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  SteeringConvention convention = SteeringConvention::AsListed;
  std::size_t batch = 256;  // replicates per matrix product
};

/// Diagnostics of one simulation run.
struct SimDiagnostics {
  double jitter = 0.0;
  std::size_t points = 0;
};

/// Empirical P(max_t SNR(t) > u) for every u in u_grid from one set of replicates.
/// SNR(t) = gain_ratio |h(t)|^2.
std::vector<HspEstimate> estimate_hsp_curve(const ChannelParams& params, const GridSpec& grid,
                                            const CorrelationModel& corr, const std::vector<double>& u_grid,
                                            const SimOptions& options, SimDiagnostics* diagnostics = nullptr);

HspEstimate estimate_hsp(const ChannelParams& params, const GridSpec& grid, const CorrelationModel& corr, double u,
                         const SimOptions& options);

struct UpcrossingEstimate {
  double rate = 0.0;     // mean upcrossings per wavelength
  double stderr_ = 0.0;
  std::size_t replicates = 0;
};

/// Mean number of index pairs with X(t_i) < x <= X(t_{i+1}) per wavelength, where
/// X(t) = 2 (kappa + 1) |h(t)|^2 is the normalized noncentral chi^2_2 process.
UpcrossingEstimate count_upcrossings(const ChannelParams& params, const GridSpec& grid, const CorrelationModel& corr,
                                     double x, const SimOptions& options, SimDiagnostics* diagnostics = nullptr);

/// Draws replicates 0..options.replicates-1 in order on the calling thread and
/// hands each complex field to visit(replicate, values).
void for_each_realization(const CovarianceFactor& factor, const ChannelParams& params, const GridSpec& grid,
                          const SimOptions& options,
                          const std::function<void(std::size_t, const std::vector<std::complex<double>>&)>& visit);

}  // namespace cfas::chansim
