#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cfas/chansim.hpp"
#include "cfas/errors.hpp"
#include "cfas/hsp.hpp"
#include "cfas/specfun.hpp"

using namespace cfas;
using namespace cfas::chansim;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("grid layout") {
  const GridSpec line{1, {0.25}};
  CHECK(line.points_per_axis() == std::vector<std::size_t>{26});
  const GridSpec square{2, {0.25, 0.1}};
  CHECK(square.point_count() == 26 * 11);
  const auto pos = square.positions();
  CHECK(pos[1][0] == 0.0);  // last axis fastest
  CHECK(pos[1][1] == doctest::Approx(0.01));
  CHECK(pos[11][0] == doctest::Approx(0.01));
  CHECK(GridSpec{0, {}}.point_count() == 1);
  CHECK(GridSpec{3, {0.25, 0.25, 0.25}}.point_count() == 26 * 26 * 26);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(GridSpec({3, {1.0, 1.0, 1.0}}).validate(), CapacityError);
  CHECK_THROWS_AS(GridSpec({2, {1.0}}).validate(), DomainError);
  CHECK_THROWS_AS(GridSpec({1, {1.0}, 0.0}).validate(), DomainError);
  CHECK_THROWS_AS(GridSpec({1, {-1.0}}).validate(), DomainError);
  CHECK_NOTHROW(GridSpec({2, {1.99, 1.99}}).validate());
}

TEST_CASE("steering phases") {
  const ChannelParams p{1.0, kPi / 6, kPi / 3};
  CHECK(steering_phase({0.5}, p) == doctest::Approx(2 * kPi * 0.5 * 0.5 * std::sin(kPi / 3)));
  CHECK(steering_phase({0.5, 0.2}, p) == doctest::Approx(2 * kPi * (0.25 * std::sin(kPi / 3) + 0.2 * 0.5)));
  CHECK(steering_phase({0.5, 0.2}, p, SteeringConvention::Embedded) ==
        doctest::Approx(2 * kPi * std::sin(kPi / 3) * (0.5 * std::cos(kPi / 6) + 0.2 * 0.5)));
  CHECK(steering_phase({}, p) == 0.0);
}

TEST_CASE("covariance and factor") {
  const GridSpec grid{1, {0.25}};
  const auto sigma = build_covariance(grid, CorrelationModel::jakes());
  CHECK(sigma(0, 0) == 1.0);
  CHECK(sigma(0, 7) == doctest::Approx(std::cyl_bessel_j(0.0, 2 * kPi * 0.07)).epsilon(1e-14));
  const auto factor = factor_covariance(sigma);
  CHECK(factor.jitter <= 1e-8);
  const Eigen::MatrixXd rebuilt = factor.lower * factor.lower.transpose();
  CHECK((rebuilt - sigma).cwiseAbs().maxCoeff() <= factor.jitter + 1e-12);

  Eigen::MatrixXd bad = sigma;
  bad(0, 0) = 2.0;
  CHECK_THROWS_AS(factor_covariance(bad), DomainError);
  bad = sigma;
  bad(0, 1) += 0.1;
  CHECK_THROWS_AS(factor_covariance(bad), DomainError);
}

TEST_CASE("field moments") {
  const ChannelParams params{2.0, kPi / 4};
  const GridSpec grid{1, {0.1}, 0.05};  // points at 0, 0.05, 0.1
  const auto factor = factor_covariance(build_covariance(grid, CorrelationModel::jakes()));
  SimOptions options;
  options.replicates = 40000;
  options.seed = 3;
  std::complex<double> mean0{}, mean2{};
  double power = 0.0;
  std::complex<double> cross{};
  const double los = std::sqrt(2.0 / 3.0);
  for_each_realization(factor, params, grid, options, [&](std::size_t, const std::vector<std::complex<double>>& h) {
    mean0 += h[0];
    mean2 += h[2];
    power += std::norm(h[0]);
    const auto n0 = h[0] - los;
    const auto n2 = h[2] - los * std::polar(1.0, steering_phase({0.1}, params));
    cross += n0 * std::conj(n2);
  });
  const double r = static_cast<double>(options.replicates);
  CHECK(std::abs(mean0 / r - los) < 0.01);
  CHECK(std::abs(mean2 / r - los * std::polar(1.0, steering_phase({0.1}, params))) < 0.01);
  CHECK(power / r == doctest::Approx(1.0).epsilon(0.02));
  // Scattered power is 1/3; its correlation follows J0.
  CHECK((cross / r).real() * 3.0 == doctest::Approx(std::cyl_bessel_j(0.0, 2 * kPi * 0.1)).epsilon(0.03));
}

TEST_CASE("single point estimate matches the Ricean tail") {
  const ChannelParams params{2.0, 0.0};
  SimOptions options;
  options.replicates = 50000;
  options.seed = 5;
  for (double x : {4.0, 9.0, 15.0}) {
    const double u = hsp::denormalize_threshold(x, params).u;
    const auto est = estimate_hsp(params, GridSpec{0, {}}, CorrelationModel::jakes(), u, options);
    const double truth = specfun::marcum_q1(2.0, std::sqrt(x));
    CHECK(est.x == doctest::Approx(x));
    CHECK(est.stderr_ == doctest::Approx(std::sqrt(est.p_hat * (1 - est.p_hat) / 50000.0)));
    CHECK(std::abs(est.p_hat - truth) < 4.0 * est.stderr_);
  }
}

TEST_CASE("estimates do not depend on worker count") {
  const ChannelParams params{0.2, kPi / 4};
  const GridSpec grid{2, {0.1, 0.1}};
  SimOptions options;
  options.replicates = 3000;
  options.seed = 42;
  options.batch = 128;
  const std::vector<double> us{2.0, 4.0, 6.0};
  const auto one = estimate_hsp_curve(params, grid, CorrelationModel::jakes(), us, options);
  options.workers = 3;
  const auto three = estimate_hsp_curve(params, grid, CorrelationModel::jakes(), us, options);
  for (std::size_t i = 0; i < us.size(); ++i) {
    CHECK(one[i].p_hat == three[i].p_hat);
    CHECK(one[i].stderr_ == three[i].stderr_);
  }
  options.seed = 43;
  const auto other = estimate_hsp_curve(params, grid, CorrelationModel::jakes(), us, options);
  CHECK(other[0].p_hat != one[0].p_hat);

  const GridSpec line{1, {1.0}};
  options.workers = 1;
  const auto a = count_upcrossings(params, line, CorrelationModel::jakes(), 4.0, options);
  options.workers = 4;
  const auto b = count_upcrossings(params, line, CorrelationModel::jakes(), 4.0, options);
  CHECK(a.rate == b.rate);
}

TEST_CASE("replicate streams are keyed by seed and index") {
  auto a = replicate_stream(7, 100);
  auto b = replicate_stream(7, 100);
  auto c = replicate_stream(7, 101);
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
}

TEST_CASE("simulation input errors") {
  SimOptions options;
  options.replicates = 50;
  CHECK_THROWS_AS(estimate_hsp({1.0, 0.0}, GridSpec{0, {}}, CorrelationModel::jakes(), 1.0, options), DomainError);
  options.replicates = 200;
  CHECK_THROWS_AS(estimate_hsp({1.0, 0.0}, GridSpec{0, {}}, CorrelationModel::jakes(), -1.0, options), DomainError);
  CHECK_THROWS_AS(estimate_hsp({1.0, 0.0}, GridSpec{3, {1.0, 1.0, 1.0}}, CorrelationModel::jakes(), 1.0, options),
                  CapacityError);
  CHECK_THROWS_AS(count_upcrossings({1.0, 0.0}, GridSpec{2, {0.1, 0.1}}, CorrelationModel::jakes(), 1.0, options),
                  DomainError);
}
