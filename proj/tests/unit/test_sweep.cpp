#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ddlab/error.hpp"
#include "ddlab/sweep.hpp"

using namespace ddlab;

namespace {

SweepPlan small_burgers_plan() {
  SweepPlan p;
  p.eps_list = {0.08, 0.04, 0.02};
  p.K = 1.0;
  p.p = 3.0;
  p.flux = make_flux("burgers", {.bound = 3.0});
  p.profile = InitialProfile::riemann(1.0, 0.0, 0.15);
  p.profile.center = 0.0;
  p.x_min = -2.0;
  p.x_max = 2.0;
  p.t_eval = 0.5;
  p.window = {-0.5, 1.0};
  p.grid_rule.factor = 8.0;
  p.snapshots = 8;
  return p;
}

}  // namespace

TEST_CASE("grid rule") {
  const GridRule r;
  // 16 * 8 / (pi 0.01) = 4074 -> 4096
  CHECK(r.n(8.0, 0.01, 0.0) == 4096);
  // dispersive scale sqrt(delta)/eps = 2 doubles the target
  CHECK(r.n(8.0, 0.01, 4.0 * 0.01 * 0.01) == 8192);
  CHECK(r.n(1.0, 1.0, 0.0) == 64);
  CHECK_THROWS_AS(r.n(8.0, 1e-7, 0.0), InvalidArgument);
  CHECK_THROWS_AS(r.n(8.0, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("delta relation") {
  SweepPlan p;
  p.K = 2.0;
  p.p = 2.0;
  CHECK(p.delta(0.1) == doctest::Approx(0.02));
}

TEST_CASE("classification rule") {
  const std::vector<double> classical{0.2, 0.1, 0.04};
  const std::vector<double> small_inc{0.05, 0.01};
  CHECK(classify(classical, small_inc, 0.02, 0.05).kind == LimitClass::Kind::classical);
  const std::vector<double> plateau{0.31, 0.31, 0.31};
  CHECK(classify(plateau, small_inc, 0.02, 0.05).kind == LimitClass::Kind::nonclassical);
  const std::vector<double> big_inc{0.3, 0.3};
  CHECK(classify(classical, big_inc, 0.02, 0.05).kind == LimitClass::Kind::nonconvergent);
  const std::vector<double> two{0.1, 0.05};
  CHECK_THROWS_AS(classify(two, small_inc, 0.02, 0.05), InvalidArgument);
  CHECK(to_string(LimitClass::Kind::nonclassical) == "nonclassical");
}

TEST_CASE("window distances") {
  const Grid1D g = Grid1D::make(0.0, 1.0, 64);
  Field1D a{g, std::vector<double>(64, 1.0), 0.0};
  const WaveFan zero_fan(0.0, 0.0, make_flux("burgers", {.bound = 1.0}), {});
  const auto ref = ReferenceSolution::self_similar(zero_fan, 0.5, 1.0);
  CHECK(lploc_distance(a, ref, 1.0, {0.25, 0.75}) == doctest::Approx(0.5));
  CHECK(lploc_distance(a, ref, 2.0, {0.25, 0.75}) == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(lploc_distance(a, ref, 3.0, {0.25, 0.75}), InvalidArgument);
  CHECK_THROWS_AS(lploc_distance(a, ref, 1.0, {0.5, 1.5}), InvalidArgument);

  Field1D b{Grid1D::make(0.0, 1.0, 256), std::vector<double>(256, 0.0), 0.0};
  CHECK(window_l1_between(a, b, {0.0, 0.5}) == doctest::Approx(0.5));
  Field1D c{Grid1D::make(0.0, 2.0, 256), std::vector<double>(256, 0.0), 0.0};
  CHECK_THROWS_AS(window_l1_between(a, c, {0.0, 0.5}), InvalidArgument);
}

TEST_CASE("default evaluation time") {
  const Grid1D g = Grid1D::make(0.0, 2.0 * std::numbers::pi, 1024);
  const Field1D u0 = sample_initial(g, InitialProfile::sine(1.0, 1));
  // burgers with sin x: max -(u0)_x = 1, shock forms at t = 1
  CHECK(default_t_eval(u0, make_flux("burgers", {.bound = 3.0})) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(default_t_eval(u0, make_flux("linear", {.bound = 3.0})) == 1.0);
}

TEST_CASE("plan validation names the violated precondition") {
  SweepPlan p = small_burgers_plan();
  p.eps_list = {0.01, 0.02};
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("decreasing"), InvalidArgument);
  p = small_burgers_plan();
  p.eps_list = {0.02, -0.01};
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("Regularization.eps > 0"), InvalidArgument);
  p = small_burgers_plan();
  p.window = {-3.0, 1.0};
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = small_burgers_plan();
  p.profile = InitialProfile::sine(1.0, 1);
  p.reference = ReferenceKind::fan;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = small_burgers_plan();
  p.reference_factor = 3;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("small classical sweep is deterministic across worker counts") {
  SweepPlan p = small_burgers_plan();
  p.theta = TestFunction{0.25, 0.25, 0.5, 0.2};
  const SweepResult a = run_sweep(p);
  p.workers = 3;
  const SweepResult b = run_sweep(p);
  REQUIRE(a.records.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK_FALSE(a.records[i].failed);
    CHECK(a.records[i].estimates_pass);
    CHECK(a.records[i].distance == b.records[i].distance);
    CHECK(a.records[i].solution->values == b.records[i].solution->values);
    CHECK(a.records[i].gamma->pairings == b.records[i].gamma->pairings);
  }
  CHECK(a.records[0].distance[0] > a.records[1].distance[0]);
  CHECK(a.records[1].distance[0] > a.records[2].distance[0]);
  CHECK_FALSE(a.records[0].cauchy_increment.has_value());
  CHECK(a.records[2].cauchy_increment.has_value());
  REQUIRE(a.classification.has_value());
  CHECK(a.distance_slopes[0].defined);
  CHECK(a.distance_slopes[0].slope > 0.5);

  const GammaBounds gb = check_gamma_bounds(a);
  CHECK(gb.report.records.size() == 5 * 3);
  CHECK(gb.report.worst("gamma2_sign").pass);
}

TEST_CASE("fine-grid reference for smooth data") {
  SweepPlan p = small_burgers_plan();
  p.profile = InitialProfile::sine(0.5, 1);
  p.window = {-2.0, 2.0};
  p.reference_factor = 4;
  const SweepResult r = run_sweep(p);
  for (const SweepRecord& rec : r.records) CHECK_FALSE(rec.failed);
  CHECK(r.records.back().distance[0] < r.records.front().distance[0]);
}
