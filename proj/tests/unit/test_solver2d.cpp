#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ddlab/error.hpp"
#include "ddlab/solver2d.hpp"

using namespace ddlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TimeController uniform(double t, std::size_t snaps) {
  TimeController tc;
  tc.t_final = t;
  tc.snapshot_times = TimeController::uniform_times(t, snaps);
  return tc;
}

}  // namespace

TEST_CASE("grid preconditions") {
  CHECK_NOTHROW(Grid2D::make({0, 1, 16}, {0, 2, 32}));
  CHECK_THROWS_AS(Grid2D::make({0, 1, 12}, {0, 1, 16}), InvalidArgument);
  CHECK_THROWS_AS(Grid2D::make({0, 1, 16}, {1, 1, 16}), InvalidArgument);
}

TEST_CASE("linear fluxes match the closed form") {
  const Grid2D g = Grid2D::make({0, kTwoPi, 64}, {0, kTwoPi, 32});
  const Regularization reg = Regularization::make(0.02, 1e-3);
  const FluxVector2D lin{make_flux("linear", {.a = 1.0, .bound = 3.0}),
                         make_flux("linear", {.a = -0.5, .bound = 3.0})};
  const Field2D u0 = sample2d(g, [](double x, double y) { return std::sin(2 * x + 3 * y) + 0.3 * std::cos(x); });
  const Trajectory2D tr = solve2d(u0, reg, lin, uniform(1.0, 8));
  const Field2D ex = exact_linear2d(u0, 1.0, -0.5, reg, 1.0);
  double e = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) e = std::max(e, std::abs(tr.final().values[k] - ex.values[k]));
  CHECK(e < 1e-8);
}

TEST_CASE("y-independent data reduce to the one-dimensional solver") {
  const Grid2D g = Grid2D::make({0, kTwoPi, 64}, {0, kTwoPi, 16});
  const Regularization reg = Regularization::make(0.05, 1e-4);
  const FluxVector2D fl{make_flux("burgers", {.bound = 3.0}), make_flux("linear", {.a = 1.0, .bound = 3.0})};
  TimeController tc;
  tc.t_final = 0.5;
  tc.dt_fixed = 1.0 / 200;
  const Field2D u0 = sample2d(g, [](double x, double) { return std::sin(x); });
  const Trajectory2D t2 = solve2d(u0, reg, fl, tc);
  const Grid1D g1 = Grid1D::make(0, kTwoPi, 64);
  const Trajectory t1 = solve(sample_initial(g1, InitialProfile::sine(1.0, 1)), reg, fl.f1, tc);
  double e = 0.0;
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 16; ++j) e = std::max(e, std::abs(t2.final().at(i, j) - t1.final().values[i]));
  CHECK(e < 1e-12);
}

TEST_CASE("multi-d estimates and energy identity") {
  const Grid2D g = Grid2D::make({0, kTwoPi, 64}, {0, kTwoPi, 64});
  const double eps = 0.05;
  const Regularization reg = Regularization::make(eps, eps * eps * eps);
  const FluxVector2D fl{make_flux("burgers", {.bound = 3.0}), make_flux("linear", {.a = 1.0, .bound = 3.0})};
  const Field2D u0 = sample2d(g, [](double x, double y) { return std::sin(x) + 0.5 * std::cos(2 * y); });
  TimeController tc = uniform(0.5, 32);
  tc.dt_max = 0.005;
  const Trajectory2D tr = solve2d(u0, reg, fl, tc);
  const MultiDReport rep = check_theorem31(tr, reg, fl, u0);
  CHECK(rep.estimates.all_pass());
  CHECK(rep.identity_relative < 1e-5);
  for (const char* label : {"energy", "dissipation", "gradient[x]", "gradient[y]", "hessian[xx]", "hessian[xy]",
                            "hessian[yx]", "hessian[yy]", "gradient_chain[x]", "gradient_chain[y]"})
    CHECK_NOTHROW(rep.estimates.worst(label));

  const Norms2D n0 = norms2d(tr.initial()), n1 = norms2d(tr.final());
  CHECK(n1.l2_u < n0.l2_u);
  // ||sin x||^2 over the square is 2 pi^2
  const Norms2D ns = norms2d(sample2d(g, [](double x, double) { return std::sin(x); }));
  CHECK(ns.l2_u * ns.l2_u == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi));
  CHECK(ns.l2_grad[1] == doctest::Approx(0.0).scale(1.0));
}
