#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cfas/ecdensity.hpp"
#include "cfas/errors.hpp"
#include "cfas/hsp.hpp"

using namespace cfas;

namespace {

constexpr double kPi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Geometry box(int dim, double side) { return Geometry{std::vector<double>(dim, side)}; }

}  // namespace

TEST_CASE("closed HSP equals the curvature-weighted EC densities") {
  const auto corr = CorrelationModel::jakes();
  for (int dim = 0; dim <= 3; ++dim)
    for (const auto& sides : {std::vector<double>{0.25, 0.25, 0.25}, std::vector<double>{0.3, 1.1, 2.0}})
      for (double lambda : {0.0, 0.4, 2.0, 4.0, 8.0, 14.0})
        for (double x : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0}) {
          const Geometry geom{std::vector<double>(sides.begin(), sides.begin() + dim)};
          const ChannelParams params{lambda / 2.0, 0.0};
          const double closed = hsp::hsp_closed(dim, params, geom, x, corr);
          const double path = ecdensity::eec(lambda, x, ecdensity::curvatures(geom, corr));
          CHECK_MESSAGE(rel(closed, path) < 1e-10, "dim=" << dim << " lambda=" << lambda << " x=" << x);
        }
}

TEST_CASE("Rayleigh reductions") {
  const ChannelParams rayleigh{0.0, 0.0};
  const double t = 0.4;
  for (double x : {1.0, 4.0, 12.0, 30.0}) {
    const double e = std::exp(-0.5 * x);
    CHECK(hsp::hsp_closed(0, rayleigh, box(0, t), x) == doctest::Approx(e).epsilon(1e-15));
    CHECK(hsp::hsp_closed(1, rayleigh, box(1, t), x) == doctest::Approx(e * (1.0 + t * std::sqrt(kPi * x))).epsilon(1e-14));
    CHECK(hsp::hsp_closed(2, rayleigh, box(2, t), x) ==
          doctest::Approx(e * (1.0 + 2.0 * t * std::sqrt(kPi * x) + kPi * t * t * (x - 1.0))).epsilon(1e-14));
    CHECK(hsp::hsp_closed(3, rayleigh, box(3, t), x) ==
          doctest::Approx(e * (1.0 + 3.0 * t * std::sqrt(kPi * x) + 3.0 * kPi * t * t * (x - 1.0) +
                               std::pow(kPi, 1.5) * t * t * t * std::sqrt(x) * (x - 3.0)))
              .epsilon(1e-14));
  }
}

TEST_CASE("HSP does not depend on the LoS angles") {
  const Geometry geom{{0.25, 0.5}};
  const double a = hsp::hsp_closed(2, {2.0, 0.0}, geom, 12.0);
  CHECK(hsp::hsp_closed(2, {2.0, 1.2, 0.3}, geom, 12.0) == a);
}

TEST_CASE("threshold normalization round trip") {
  const ChannelParams params{3.0, 0.0, kPi / 2, 4.0};
  const auto spec = hsp::normalize_threshold(5.0, params);
  CHECK(spec.x == doctest::Approx(2.0 * 4.0 * 5.0 / 4.0));
  CHECK(hsp::denormalize_threshold(spec.x, params).u == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("sweep marks the asymptotic regime and validates the grid") {
  const ChannelParams params{0.2, kPi / 4};
  const auto rows = hsp::hsp_sweep(1, params, box(1, 0.25), {0.5, 5.0, 20.0});
  REQUIRE(rows.size() == 3);
  CHECK_FALSE(rows[0].asymptotic);
  CHECK(rows[2].asymptotic);
  CHECK(rows[2].u == doctest::Approx(20.0 / 2.4));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].hsp < rows[i - 1].hsp);
  CHECK_THROWS_AS(hsp::hsp_sweep(1, params, box(1, 0.25), {2.0, 1.0}), DomainError);
  CHECK_THROWS_AS(hsp::hsp_sweep(1, params, box(1, 0.25), {0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(hsp::hsp_closed(2, params, box(1, 0.25), 1.0), DomainError);
  CHECK_THROWS_AS(hsp::hsp_closed(1, {-1.0, 0.0}, box(1, 0.25), 1.0), DomainError);
}

TEST_CASE("larger regions raise the HSP") {
  const ChannelParams params{2.0, 0.0};
  CHECK(hsp::hsp_closed(3, params, box(3, 0.5), 30.0) > hsp::hsp_closed(3, params, box(3, 0.25), 30.0));
  CHECK(hsp::hsp_closed(1, params, box(1, 0.25), 30.0) > hsp::hsp_closed(0, params, box(0, 0.25), 30.0));
}
