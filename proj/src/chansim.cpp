#include "cfas/chansim.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "cfas/errors.hpp"
#include "cfas/hsp.hpp"

namespace cfas::chansim {

std::vector<std::size_t> GridSpec::points_per_axis() const {
  std::vector<std::size_t> counts;
  for (double t : sides) counts.push_back(static_cast<std::size_t>(std::floor(t / spacing + 1e-9)) + 1);
  return counts;
}

std::size_t GridSpec::point_count() const {
  double total = 1.0;
  for (std::size_t n : points_per_axis()) total *= static_cast<double>(n);
  return total > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(total);
}

void GridSpec::validate() const {
  if (dim < 0 || dim > 3) throw DomainError("grid dimension must be in 0..3");
  if (static_cast<int>(sides.size()) != dim) throw DomainError("grid needs exactly dim side lengths");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw DomainError("grid spacing must be > 0");
  for (double t : sides)
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("grid side lengths must be >= 0");
  const std::size_t n = point_count();
  if (n > point_cap)
    throw CapacityError("grid has " + std::to_string(n) + " points, above the cap of " + std::to_string(point_cap) +
                        "; increase the spacing or shrink the region");
}

std::vector<std::vector<double>> GridSpec::positions() const {
  const auto counts = points_per_axis();
  const std::size_t total = point_count();
  std::vector<std::vector<double>> out(total, std::vector<double>(dim, 0.0));
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    for (int axis = dim - 1; axis >= 0; --axis) {
      out[p][axis] = static_cast<double>(rest % counts[axis]) * spacing;
      rest /= counts[axis];
    }
  }
  return out;
}

double steering_phase(const std::vector<double>& t, const ChannelParams& params, SteeringConvention convention) {
  const double two_pi = 2.0 * std::numbers::pi;
  const double sp = std::sin(params.phi), cp = std::cos(params.phi);
  const double st = std::sin(params.theta), ct = std::cos(params.theta);
  switch (t.size()) {
    case 0:
      return 0.0;
    case 1:
      return two_pi * t[0] * sp * st;
    case 2:
      if (convention == SteeringConvention::Embedded) return two_pi * (t[0] * cp * st + t[1] * sp * st);
      return two_pi * (t[0] * sp * st + t[1] * ct);
    default:
      return two_pi * (t[0] * cp * st + t[1] * sp * st + t[2] * ct);
  }
}

Eigen::MatrixXd build_covariance(const GridSpec& grid, const CorrelationModel& corr) {
  grid.validate();
  corr.validate();
  const auto pos = grid.positions();
  const auto n = static_cast<Eigen::Index>(pos.size());
  Eigen::MatrixXd sigma(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    sigma(p, p) = 1.0;
    for (Eigen::Index q = 0; q < p; ++q) {
      double d2 = 0.0;
      for (int k = 0; k < grid.dim; ++k) {
        const double diff = pos[p][k] - pos[q][k];
        d2 += diff * diff;
      }
      sigma(p, q) = sigma(q, p) = corr(std::sqrt(d2));
    }
  }
  return sigma;
}

CovarianceFactor factor_covariance(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) throw DomainError("covariance must be square and nonempty");
  for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
    if (std::abs(sigma(i, i) - 1.0) > 1e-12) throw DomainError("covariance must have unit diagonal");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-12) throw DomainError("covariance must be symmetric");
  }
  constexpr std::array<double, 4> kJitter{0.0, 1e-12, 1e-10, 1e-8};
  const auto n = sigma.rows();
  for (double eps : kJitter) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma + eps * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd lower = llt.matrixL();
    if (!lower.allFinite()) continue;
    return {std::move(lower), eps};
  }
  throw ConvergenceError("Cholesky factorization failed even with jitter 1e-8");
}

std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32), 0x43464153u};
  return std::mt19937_64(seq);
}

namespace {

// Draws fields for replicate blocks and calls visit(worker, replicate, values).
// Block b covers replicates [b * batch, (b + 1) * batch); worker w takes blocks
// w, w + workers, ... so each replicate's stream is independent of scheduling.
template <class Visit>
void run_replicates(const CovarianceFactor& factor, const ChannelParams& params, const GridSpec& grid,
                    const SimOptions& options, unsigned workers, Visit&& visit) {
  const auto n = factor.lower.rows();
  const auto pos = grid.positions();
  if (static_cast<Eigen::Index>(pos.size()) != n) throw DomainError("covariance factor does not match the grid");

  const double los = std::sqrt(params.kappa / (params.kappa + 1.0));
  const double scatter = std::sqrt(1.0 / (2.0 * (params.kappa + 1.0)));
  std::vector<std::complex<double>> steering(n);
  for (Eigen::Index p = 0; p < n; ++p) steering[p] = los * std::polar(1.0, steering_phase(pos[p], params, options.convention));

  const std::size_t batch = std::max<std::size_t>(1, options.batch);
  const std::size_t blocks = (options.replicates + batch - 1) / batch;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, blocks))));

  auto work = [&](unsigned worker) {
    Eigen::MatrixXd g(n, 2 * static_cast<Eigen::Index>(batch));
    Eigen::MatrixXd h(n, 2 * static_cast<Eigen::Index>(batch));
    std::vector<std::complex<double>> values(n);
    for (std::size_t b = worker; b < blocks; b += workers) {
      const std::size_t first = b * batch;
      const std::size_t count = std::min(batch, options.replicates - first);
      for (std::size_t c = 0; c < count; ++c) {
        auto rng = replicate_stream(options.seed, first + c);
        std::normal_distribution<double> normal;
        for (Eigen::Index p = 0; p < n; ++p) g(p, 2 * c) = normal(rng);
        for (Eigen::Index p = 0; p < n; ++p) g(p, 2 * c + 1) = normal(rng);
      }
      const auto cols = 2 * static_cast<Eigen::Index>(count);
      h.leftCols(cols).noalias() = factor.lower.triangularView<Eigen::Lower>() * g.leftCols(cols);
      for (std::size_t c = 0; c < count; ++c) {
        for (Eigen::Index p = 0; p < n; ++p)
          values[p] = steering[p] + scatter * std::complex<double>(h(p, 2 * c), h(p, 2 * c + 1));
        visit(worker, first + c, values);
      }
    }
  };

  if (workers == 1) {
    work(0);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  for (auto& t : pool) t.join();
}

CovarianceFactor prepare(const ChannelParams& params, const GridSpec& grid, const CorrelationModel& corr,
                         SimDiagnostics* diagnostics) {
  params.validate();
  grid.validate();
  auto factor = factor_covariance(build_covariance(grid, corr));
  if (diagnostics) {
    diagnostics->jitter = factor.jitter;
    diagnostics->points = static_cast<std::size_t>(factor.lower.rows());
  }
  return factor;
}

}  // namespace

FieldRealization sample_field(const CovarianceFactor& factor, const ChannelParams& params, const GridSpec& grid,
                              std::mt19937_64& rng, SteeringConvention convention) {
  params.validate();
  const auto pos = grid.positions();
  const auto n = factor.lower.rows();
  if (static_cast<Eigen::Index>(pos.size()) != n) throw DomainError("covariance factor does not match the grid");
  std::normal_distribution<double> normal;
  Eigen::VectorXd g_re(n), g_im(n);
  for (Eigen::Index p = 0; p < n; ++p) g_re[p] = normal(rng);
  for (Eigen::Index p = 0; p < n; ++p) g_im[p] = normal(rng);
  const Eigen::VectorXd h_re = factor.lower.triangularView<Eigen::Lower>() * g_re;
  const Eigen::VectorXd h_im = factor.lower.triangularView<Eigen::Lower>() * g_im;

  const double los = std::sqrt(params.kappa / (params.kappa + 1.0));
  const double scatter = std::sqrt(1.0 / (2.0 * (params.kappa + 1.0)));
  FieldRealization field;
  field.values.resize(n);
  for (Eigen::Index p = 0; p < n; ++p)
    field.values[p] = los * std::polar(1.0, steering_phase(pos[p], params, convention)) +
                      scatter * std::complex<double>(h_re[p], h_im[p]);
  return field;
}

void for_each_realization(const CovarianceFactor& factor, const ChannelParams& params, const GridSpec& grid,
                          const SimOptions& options,
                          const std::function<void(std::size_t, const std::vector<std::complex<double>>&)>& visit) {
  params.validate();
  run_replicates(factor, params, grid, options, 1,
                 [&](unsigned, std::size_t r, const std::vector<std::complex<double>>& v) { visit(r, v); });
}

std::vector<HspEstimate> estimate_hsp_curve(const ChannelParams& params, const GridSpec& grid,
                                            const CorrelationModel& corr, const std::vector<double>& u_grid,
                                            const SimOptions& options, SimDiagnostics* diagnostics) {
  if (options.replicates < 100) throw DomainError("at least 100 replicates are required");
  for (double u : u_grid)
    if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("thresholds u must be > 0");
  const auto factor = prepare(params, grid, corr, diagnostics);

  const unsigned workers = std::max(1u, options.workers);
  std::vector<std::vector<std::size_t>> counts(workers, std::vector<std::size_t>(u_grid.size(), 0));
  run_replicates(factor, params, grid, options, workers,
                 [&](unsigned w, std::size_t, const std::vector<std::complex<double>>& values) {
                   double peak = 0.0;
                   for (const auto& h : values) peak = std::max(peak, std::norm(h));
                   const double snr = params.gain_ratio * peak;
                   for (std::size_t k = 0; k < u_grid.size(); ++k)
                     if (snr > u_grid[k]) ++counts[w][k];
                 });

  std::vector<HspEstimate> out;
  const double n = static_cast<double>(options.replicates);
  for (std::size_t k = 0; k < u_grid.size(); ++k) {
    std::size_t hits = 0;
    for (const auto& c : counts) hits += c[k];
    HspEstimate e;
    e.u = u_grid[k];
    e.x = hsp::normalize_threshold(u_grid[k], params).x;
    e.p_hat = static_cast<double>(hits) / n;
    e.stderr_ = std::sqrt(e.p_hat * (1.0 - e.p_hat) / n);
    e.replicates = options.replicates;
    e.seed = options.seed;
    out.push_back(e);
  }
  return out;
}

HspEstimate estimate_hsp(const ChannelParams& params, const GridSpec& grid, const CorrelationModel& corr, double u,
                         const SimOptions& options) {
  return estimate_hsp_curve(params, grid, corr, {u}, options).front();
}

UpcrossingEstimate count_upcrossings(const ChannelParams& params, const GridSpec& grid, const CorrelationModel& corr,
                                     double x, const SimOptions& options, SimDiagnostics* diagnostics) {
  if (grid.dim != 1) throw DomainError("upcrossing counts need a 1D grid");
  if (options.replicates < 2) throw DomainError("at least 2 replicates are required");
  if (!(x > 0.0)) throw DomainError("threshold x must be > 0");
  if (!(grid.sides[0] > 0.0)) throw DomainError("upcrossing counts need T1 > 0");
  const auto factor = prepare(params, grid, corr, diagnostics);

  const unsigned workers = std::max(1u, options.workers);
  // Integer sums keep the reduction independent of the worker split.
  std::vector<std::uint64_t> total(workers, 0), total_sq(workers, 0);
  const double scale = 2.0 * (params.kappa + 1.0);
  run_replicates(factor, params, grid, options, workers,
                 [&](unsigned w, std::size_t, const std::vector<std::complex<double>>& values) {
                   std::uint64_t crossings = 0;
                   for (std::size_t i = 0; i + 1 < values.size(); ++i)
                     if (scale * std::norm(values[i]) < x && x <= scale * std::norm(values[i + 1])) ++crossings;
                   total[w] += crossings;
                   total_sq[w] += crossings * crossings;
                 });

  std::uint64_t sum = 0, sum_sq = 0;
  for (unsigned w = 0; w < workers; ++w) {
    sum += total[w];
    sum_sq += total_sq[w];
  }
  const double n = static_cast<double>(options.replicates);
  const double length = grid.sides[0];
  const double mean = static_cast<double>(sum) / n;
  const double var = (static_cast<double>(sum_sq) - n * mean * mean) / (n - 1.0);
  return {mean / length, std::sqrt(std::max(var, 0.0) / n) / length, options.replicates};
}

}  // namespace cfas::chansim
