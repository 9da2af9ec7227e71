#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <numeric>

#include "ddlab/error.hpp"
#include "ddlab/hyperbolic_ref.hpp"

using namespace ddlab;

namespace {

// Tangency of the chord from u_L = 1: (f(1) - f(u)) / (1 - u) = f'(u), i.e.
// 1 + u + u^2 = 3 u^2, bisected on [-1, 0].
double cubic_tangency_state() {
  auto h = [](double u) { return 1.0 + u + u * u - 3.0 * u * u; };
  double lo = -1.0, hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (h(lo) * h(m) <= 0.0 ? hi : lo) = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("burgers riemann problems") {
  const FluxModel b = make_flux("burgers", {.bound = 3.0});
  CHECK(riemann_convex({1.0, 0.0, b}, 0.49) == 1.0);
  CHECK(riemann_convex({1.0, 0.0, b}, 0.5) == 0.0);
  CHECK(riemann_convex({1.0, 0.0, b}, 0.51) == 0.0);
  for (double xi : {0.0, 0.1, 0.37, 0.999, 1.0})
    CHECK(riemann_convex({0.0, 1.0, b}, xi) == xi);
  CHECK(riemann_convex({0.0, 1.0, b}, -0.3) == 0.0);
  CHECK(riemann_convex({0.0, 1.0, b}, 1.3) == 1.0);

  const WaveFan shock = oleinik_fan({1.0, 0.0, b});
  REQUIRE(shock.waves().size() == 1);
  CHECK(shock.waves()[0].kind == Wave::Kind::shock);
  CHECK(shock.waves()[0].speed_left == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(shock.check().ok());

  const WaveFan raref = oleinik_fan({0.0, 1.0, b});
  for (double xi : {0.1, 0.5, 0.9}) CHECK(raref(xi) == doctest::Approx(xi).epsilon(1e-9));
}

TEST_CASE("riemann_convex rejects non-convex fluxes") {
  CHECK_THROWS_AS(riemann_convex({1.0, -1.0, make_flux("cubic", {.bound = 2.0})}, 0.0), InvalidArgument);
}

TEST_CASE("cubic (1, -1) fan: shock to the tangency state then rarefaction") {
  const double ustar = cubic_tangency_state();
  const double s = (1.0 - ustar * ustar * ustar) / (1.0 - ustar);
  CHECK(ustar == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(s == doctest::Approx(0.75).epsilon(1e-15));

  const WaveFan fan = oleinik_fan({1.0, -1.0, make_flux("cubic", {.bound = 3.0})});
  REQUIRE(fan.waves().size() == 2);
  CHECK(fan.waves()[0].kind == Wave::Kind::shock);
  CHECK(std::abs(fan.waves()[0].speed_left - s) < 1e-9);
  CHECK(std::abs(fan.waves()[0].u_right - ustar) < 1e-9);
  CHECK(fan.waves()[1].kind == Wave::Kind::rarefaction);
  CHECK(fan.waves()[1].speed_right == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(fan(2.0) == doctest::Approx(-std::sqrt(2.0 / 3.0)).epsilon(1e-9));
  CHECK(fan(-1.0) == 1.0);
  CHECK(fan(4.0) == -1.0);
  CHECK(fan.check().ok());

  const auto j = nlohmann::json::parse(fan.to_json());
  CHECK(j["waves"].size() == 2);
}

TEST_CASE("rarefaction-shock composite for u_L < u_R across the inflection") {
  const WaveFan fan = oleinik_fan({-1.0, 1.0, make_flux("cubic", {.bound = 3.0})});
  CHECK(fan.check().ok());
  CHECK(fan(-10.0) == -1.0);
  CHECK(fan(10.0) == 1.0);
}

TEST_CASE("godunov conserves mass and converges to the fan") {
  const FluxModel b = make_flux("burgers", {.bound = 3.0});
  const WaveFan fan = oleinik_fan({1.0, 0.0, b});
  double prev = 0.0;
  for (std::size_t n : {256u, 512u, 1024u}) {
    const Grid1D g = Grid1D::make(-4.0, 4.0, n);
    const Field1D u0 = riemann_step(g, 1.0, 0.0, 0.0);
    const Field1D u = godunov_solve(u0, b, 1.0, 0.45);
    const double m0 = std::accumulate(u0.values.begin(), u0.values.end(), 0.0);
    const double m1 = std::accumulate(u.values.begin(), u.values.end(), 0.0);
    CHECK(std::abs(m1 - m0) < 1e-10 * n);
    const auto ref = ReferenceSolution::self_similar(fan, 0.0, 1.0).on_grid(g);
    double e = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (g.x(j) >= -1.0 && g.x(j) < 2.0) e += std::abs(u.values[j] - ref[j]) * g.dx();
    if (prev > 0.0) CHECK(e < prev);
    prev = e;
  }
  CHECK_THROWS_AS(godunov_solve(riemann_step(Grid1D::make(0, 1, 64), 1, 0), b, 1.0, 0.8), InvalidArgument);
}

TEST_CASE("fine-grid reference averages onto coarse cells") {
  const Grid1D fine = Grid1D::make(0.0, 1.0, 64);
  Field1D f{fine, std::vector<double>(64), 0.0};
  for (std::size_t j = 0; j < 64; ++j) f.values[j] = static_cast<double>(j % 2);
  const auto ref = ReferenceSolution::fine_grid(f);
  const auto c = ref.on_grid(Grid1D::make(0.0, 1.0, 32));
  for (double v : c) CHECK(v == 0.5);
  CHECK_THROWS_AS(ref.on_grid(Grid1D::make(0.0, 1.0, 64)), InvalidArgument);
  CHECK_THROWS_AS(ReferenceSolution::self_similar(WaveFan{}, 0.0, 0.0), InvalidArgument);
}
