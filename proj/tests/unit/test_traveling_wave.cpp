#include <doctest.h>

#include <cmath>

#include "ddlab/error.hpp"
#include "ddlab/traveling_wave.hpp"

using namespace ddlab;

namespace {

// For f = u^3 the profile equation admits u' = k (u - u_L)(u - u_m) with
// k = 1 / (sqrt(2) sqrt(delta)), which gives u_m = -u_L + sqrt(2) eps / (3 sqrt(delta)).
double cubic_connection_state(double u_left, double alpha) {
  return -u_left + std::sqrt(2.0) / (3.0 * std::sqrt(alpha));
}

}  // namespace

TEST_CASE("classical burgers profile reaches the Rankine-Hugoniot state") {
  const FluxModel b = make_flux("burgers", {.bound = 3.0});
  const double eps = 0.01;
  const auto r = traveling_wave_shoot(b, eps, 1e-6 * eps * eps, 0.5, 1.0, {-1.0, 1.0});
  REQUIRE(r.has_value());
  CHECK(std::abs(*r) < 1e-5);
  // no profile leaves u_L when the speed exceeds f'(u_L)
  CHECK_FALSE(traveling_wave_shoot(b, eps, 1e-6 * eps * eps, 1.5, 1.0, {-1.0, 1.0}).has_value());
  CHECK_THROWS_AS(traveling_wave_shoot(b, eps, 0.0, 0.5, 1.0, {-1.0, 1.0}), InvalidArgument);
}

TEST_CASE("cubic nonclassical connection matches the closed form") {
  const FluxModel c = make_flux("cubic", {.bound = 3.0});
  const double eps = 0.01;
  for (double alpha : {4.0, 8.0, 16.0}) {
    CAPTURE(alpha);
    const auto conn =
        find_nonclassical_connection(c, eps, alpha * eps * eps, 1.0, {0.75 + 1e-7, 1.875}, {-3.0, 1.0});
    REQUIRE(conn.has_value());
    const double um = cubic_connection_state(1.0, alpha);
    CHECK(conn->state == doctest::Approx(um).epsilon(2e-3));
    CHECK(conn->speed == doctest::Approx(1.0 + um + um * um).epsilon(2e-3));
    CHECK(conn->state < -0.5);
  }
}

TEST_CASE("small dispersion has no nonclassical connection") {
  const FluxModel c = make_flux("cubic", {.bound = 3.0});
  const double eps = 0.01;
  CHECK_FALSE(find_nonclassical_connection(c, eps, 0.5 * eps * eps, 1.0, {0.75 + 1e-7, 1.875}, {-3.0, 1.0})
                  .has_value());
}

TEST_CASE("shooting outcomes") {
  const FluxModel c = make_flux("cubic", {.bound = 3.0});
  const double eps = 0.01, delta = 8.0 * eps * eps;
  // too slow: the orbit overshoots past the far saddle and leaves the interval
  CHECK(shoot_profile(c, eps, delta, 0.8, 1.0, {-3.0, 1.0}).kind == ShootOutcome::Kind::diverged);
  // fast: spirals into the middle equilibrium
  const ShootOutcome fast = shoot_profile(c, eps, delta, 2.0, 1.0, {-3.0, 1.0});
  CHECK(fast.kind == ShootOutcome::Kind::converged);
  // g = (u - 1)(u^2 + u + 1 - s); the stable root for s = 2 is (sqrt 5 - 1) / 2
  CHECK(fast.state == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-5));
}

TEST_CASE("calibration accepts the first K with a clearly distinct fan") {
  const FluxModel c = make_flux("cubic", {.bound = 3.0});
  const CalibrationResult res = calibrate_nonclassical_K(c, CalibrationPlan{});
  REQUIRE(res.K.has_value());
  CHECK(*res.K == 8.0);
  for (const CalibrationStep& s : res.steps) {
    if (s.K >= *res.K) break;
    CHECK_FALSE(s.accepted);
  }
}
