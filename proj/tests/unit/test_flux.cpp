#include <doctest.h>

#include <cmath>
#include <vector>

#include "ddlab/error.hpp"
#include "ddlab/flux.hpp"

using namespace ddlab;

TEST_CASE("built-in fluxes") {
  const FluxModel b = make_flux("burgers", {.bound = 2.0});
  CHECK(b.eval(3.0) == doctest::Approx(4.5));
  CHECK(b.deriv(-1.5) == -1.5);
  CHECK(b.deriv2(0.3) == 1.0);
  CHECK(b.lipschitz_bound() == 2.0);
  REQUIRE(b.critical_points().size() == 1);
  CHECK(b.critical_points()[0] == 0.0);

  const FluxModel op = make_flux("odd_power", {.p = 2, .bound = 1.5});
  CHECK(op.eval(1.2) == doctest::Approx(std::pow(1.2, 5) / 5.0));
  CHECK(op.lipschitz_bound() == doctest::Approx(std::pow(1.5, 4)));

  const FluxModel lin = make_flux("linear", {.a = -0.7, .bound = 1.0});
  CHECK(lin.eval(2.0) == doctest::Approx(-1.4));
  CHECK(lin.critical_points().empty());
  CHECK(lin.lipschitz_bound() == doctest::Approx(0.7));

  const FluxModel c = make_flux("cubic", {.bound = 3.0});
  CHECK(c.lipschitz_bound() == 27.0);
  CHECK(c.eval(-1.0) == -1.0);
}

TEST_CASE("saturated extension is C1 and linear outside the range") {
  const FluxModel c = make_flux("cubic", {.bound = 1.0, .saturated = true});
  CHECK(c.eval(1.0) == 1.0);
  CHECK(c.eval(2.0) == doctest::Approx(1.0 + 3.0));
  CHECK(c.deriv(5.0) == 3.0);
  CHECK(c.deriv(-5.0) == 3.0);
  CHECK(c.eval(-2.0) == doctest::Approx(-4.0));
  CHECK(c.deriv2(2.0) == 0.0);

  std::vector<double> u{-3.0, -0.5, 0.0, 0.9, 2.5}, f(5), df(5);
  c.eval(u, f, df);
  for (std::size_t k = 0; k < u.size(); ++k) {
    CHECK(f[k] == doctest::Approx(c.eval(u[k])).epsilon(1e-14));
    CHECK(df[k] == doctest::Approx(c.deriv(u[k])).epsilon(1e-14));
  }
}

TEST_CASE("flux construction errors") {
  CHECK_THROWS_AS(make_flux("burgers", {.bound = 0.0}), InvalidArgument);
  CHECK_THROWS_AS(make_flux("quartic", {.bound = 1.0}), InvalidArgument);
  CHECK_THROWS_AS(make_flux("odd_power", {.p = 0, .bound = 1.0}), InvalidArgument);
  CHECK_THROWS_AS(make_custom_flux({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}, 1.0, false), InvalidArgument);
  CHECK_THROWS_AS(make_custom_flux({0.0}, {0.0}, 1.0, false), InvalidArgument);
  CHECK_THROWS_AS(load_flux_table("/nonexistent/flux.csv", 1.0, false), InvalidArgument);
}

TEST_CASE("tabulated cubic reproduces u^3") {
  const FluxModel t = load_flux_table(DDLAB_TEST_DATA "/flux_cubic.csv", 3.0, false);
  CHECK(t.kind() == FluxKind::custom);
  for (double u : {-2.7, -1.0, -0.3, 0.0, 0.45, 1.9}) {
    CHECK(t.eval(u) == doctest::Approx(u * u * u).epsilon(1e-4).scale(1.0));
    CHECK(t.deriv(u) == doctest::Approx(3.0 * u * u).epsilon(1e-2).scale(1.0));
  }
  CHECK(t.lipschitz_bound() == doctest::Approx(27.0).epsilon(1e-2));
  // f' has a double root at 0; the spline resolves it to nearby points
  REQUIRE(!t.critical_points().empty());
  for (double v : t.critical_points()) CHECK(std::abs(v) < 0.05);
}

TEST_CASE("entropy flux satisfies F' = U' f' and F(0) = 0") {
  const FluxModel c = make_flux("cubic", {.bound = 2.0});
  for (const EntropyPair& p : {make_entropy_pair(square_entropy(), c),
                               make_entropy_pair(exponential_entropy(), c), special_entropy(c)}) {
    CAPTURE(p.spec().name);
    CHECK(p.F(0.0) == 0.0);
    for (double u : {-1.7, -0.2, 0.6, 1.3}) {
      const double h = 1e-5;
      const double fd = (p.F(u + h) - p.F(u - h)) / (2.0 * h);
      CHECK(fd == doctest::Approx(p.dF(u)).epsilon(1e-7));
    }
  }
  // U = u^2 with f = u^3: F = 3/2 u^4
  const EntropyPair sq = make_entropy_pair(square_entropy(), c);
  CHECK(sq.F(1.5) == doctest::Approx(1.5 * std::pow(1.5, 4)).epsilon(1e-12));
}

TEST_CASE("special entropy") {
  // f = u^2/2: U = -2 int_0^u v^2/2 dv = -u^3/3
  const EntropyPair p = special_entropy(make_flux("burgers", {.bound = 2.0}));
  CHECK(p.U(1.2) == doctest::Approx(-std::pow(1.2, 3) / 3.0).epsilon(1e-12));
  CHECK(p.dU(-0.5) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(p.d2U(0.7) == doctest::Approx(-1.4).epsilon(1e-9));
}

TEST_CASE("entropy spec consistency check") {
  check_entropy_spec(square_entropy(), -2.0, 2.0);
  check_entropy_spec(exponential_entropy(), -2.0, 2.0);
  EntropySpec bad = square_entropy();
  bad.d2U = [](double) { return 3.0; };
  CHECK_THROWS_AS(check_entropy_spec(bad, -1.0, 1.0), InvalidArgument);
  EntropySpec concave = square_entropy();
  concave.U = [](double u) { return -u * u; };
  concave.dU = [](double u) { return -2.0 * u; };
  concave.d2U = [](double) { return -2.0; };
  CHECK_THROWS_AS(check_entropy_spec(concave, -1.0, 1.0), InvalidArgument);
}

TEST_CASE("tabulated integral") {
  const TabulatedIntegral G([](double u) { return std::cos(u); }, -3.0, 3.0, 4097);
  for (double u : {-2.9, -1.0, 0.0, 0.3, 2.2}) CHECK(G(u) == doctest::Approx(std::sin(u)).epsilon(1e-10).scale(1.0));
  CHECK_THROWS_AS(TabulatedIntegral([](double) { return 1.0; }, 1.0, 2.0, 17), InvalidArgument);
}
