#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ddlab/error.hpp"
#include "ddlab/estimates.hpp"

using namespace ddlab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Trajectory run(const Field1D& u0, const Regularization& reg, const FluxModel& f, double t,
               std::size_t snaps) {
  TimeController tc;
  tc.t_final = t;
  tc.snapshot_times = TimeController::uniform_times(t, snaps);
  return solve(u0, reg, f, tc);
}

}  // namespace

TEST_CASE("norms of a single mode") {
  const Grid1D g = Grid1D::make(0.0, kTwoPi, 64);
  const Field1D u = sample_initial(g, InitialProfile::sine(1.0, 2));
  const Norms n = norms(u);
  // ||sin 2x||^2 = pi, ||2 cos 2x||^2 = 4 pi, ||4 sin 2x||^2 = 16 pi
  CHECK(n.l2_u == doctest::Approx(std::sqrt(std::numbers::pi)));
  CHECK(n.l2_ux == doctest::Approx(2.0 * std::sqrt(std::numbers::pi)));
  CHECK(n.l2_uxx == doctest::Approx(4.0 * std::sqrt(std::numbers::pi)));
}

TEST_CASE("estimates hold for burgers with dispersion") {
  const Grid1D g = Grid1D::make(0.0, kTwoPi, 512);
  const FluxModel f = make_flux("burgers", {.bound = 3.0});
  const Regularization reg = Regularization::make(0.04, 0.04 * 0.04);
  const Field1D u0 = sample_initial(g, InitialProfile::sine(1.0, 1));
  const Trajectory tr = run(u0, reg, f, 1.0, 16);
  const EstimateReport rep = check_theorem21(tr, reg, f, u0);
  CHECK(rep.all_pass());
  const auto s = rep.summary();
  REQUIRE(s.size() == 4);
  CHECK(s[0].label == "energy");
  CHECK(s[1].label == "dissipation");
  CHECK(s[2].label == "dispersive_gradient");
  CHECK(s[3].label == "dispersive_hessian");
  CHECK(rep.worst("energy").slack >= 0.0);
  CHECK_THROWS(rep.worst("nope"));
}

TEST_CASE("delta = 0 reports the dispersive estimates trivially") {
  const Grid1D g = Grid1D::make(0.0, kTwoPi, 256);
  const FluxModel f = make_flux("burgers", {.bound = 3.0});
  const Regularization reg = Regularization::make(0.04, 0.0);
  const Field1D u0 = sample_initial(g, InitialProfile::sine(1.0, 1));
  const EstimateReport rep = check_theorem21(run(u0, reg, f, 0.5, 4), reg, f, u0);
  CHECK(rep.all_pass());
  CHECK(rep.worst("dispersive_gradient").lhs == 0.0);
}

TEST_CASE("balance identities close and improve with snapshot density") {
  const Grid1D g = Grid1D::make(0.0, kTwoPi, 512);
  const FluxModel f = make_flux("burgers", {.bound = 3.0});
  const Regularization reg = Regularization::make(0.04, 0.04 * 0.04);
  const Field1D u0 = sample_initial(g, InitialProfile::sine(1.0, 1));
  const EntropyPair pair = make_entropy_pair(exponential_entropy(), f);
  const BalanceResiduals a = balance_residuals(run(u0, reg, f, 0.5, 32), reg, f, pair);
  const BalanceResiduals b = balance_residuals(run(u0, reg, f, 0.5, 64), reg, f, pair);
  CHECK(a.entropy_relative() < 1e-4);
  CHECK(a.energy_relative() < 1e-4);
  CHECK(a.gradient_relative() < 1e-4);
  CHECK(b.entropy_relative() < a.entropy_relative() / 3.0);
  CHECK(b.gradient_relative() < a.gradient_relative() / 3.0);
  CHECK_THROWS_AS(balance_residuals(run(u0, reg, f, 0.5, 8), reg, f, pair), InvalidArgument);
}

TEST_CASE("gamma fields sum to the regularizing term") {
  const Grid1D g = Grid1D::make(0.0, kTwoPi, 256);
  const FluxModel f = make_flux("cubic", {.bound = 2.0});
  const Regularization reg = Regularization::make(0.05, 0.01);
  const Field1D u = sample_initial(g, InitialProfile::gaussian(0.8, 0.6));
  for (const EntropyPair& pair : {make_entropy_pair(square_entropy(), f),
                                  make_entropy_pair(exponential_entropy(), f)}) {
    const GammaFields gf = gamma_fields(u, reg, pair);
    const auto total = gamma_total(u, reg, pair);
    double scale = 0.0, err = 0.0;
    for (std::size_t k = 0; k < g.n; ++k) {
      scale = std::max(scale, std::abs(total[k]));
      err = std::max(err, std::abs(gf.g1[k] + gf.g2[k] + gf.g3[k] + gf.g4[k] - total[k]));
    }
    CHECK(err < 1e-10 * scale);
    for (double v : gf.g2) CHECK(v <= 0.0);
  }
}

TEST_CASE("test function") {
  const TestFunction th{0.0, 0.5, 1.0, 0.5};
  CHECK(th(0.0, 0.5) == doctest::Approx(1.0));
  CHECK(th(1.0, 0.5) == 0.0);
  CHECK(th(0.3, 1.2) == 0.0);
  CHECK(th.in_support(0.9, 0.1));
  const double h = 1e-6;
  CHECK(th.dx(0.4, 0.6) == doctest::Approx((th(0.4 + h, 0.6) - th(0.4 - h, 0.6)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("gamma pairings") {
  const Grid1D g = Grid1D::make(-2.0, 2.0, 512);
  const FluxModel f = make_flux("burgers", {.bound = 3.0});
  const Regularization reg = Regularization::make(0.04, 0.04 * 0.04 * 0.04);
  InitialProfile r = InitialProfile::riemann(1.0, 0.0, 0.1);
  r.center = 0.0;
  const Field1D u0 = sample_initial(g, r);
  const Trajectory tr = run(u0, reg, f, 1.0, 64);
  const EntropyPair pair = make_entropy_pair(square_entropy(), f);
  const GammaReport rep = gamma_pairings(tr, reg, pair, {0.25, 0.5, 1.0, 0.45});
  CHECK(rep.pairings[1] < 0.0);
  CHECK(rep.l1_gamma2 > 0.0);
  CHECK(rep.gamma1_direct == doctest::Approx(rep.pairings[0]).epsilon(1e-3));
  CHECK_THROWS_AS(gamma_pairings(tr, reg, pair, {1.5, 0.5, 1.0, 0.45}), InvalidArgument);
  CHECK_THROWS_AS(gamma_pairings(tr, reg, pair, {0.0, 0.8, 1.0, 0.45}), InvalidArgument);
}

TEST_CASE("rate fit recovers a power law") {
  const std::vector<double> eps{0.04, 0.02, 0.01, 0.005};
  std::vector<double> v;
  for (double e : eps) v.push_back(3.0 * std::sqrt(e));
  const RateFit fit = gamma_rate_fit(eps, v);
  CHECK(fit.defined);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.residual < 1e-12);
  v[2] = 0.0;
  CHECK_FALSE(gamma_rate_fit(eps, v).defined);
  const std::vector<double> narrow{0.04, 0.03, 0.02};
  CHECK_THROWS_AS(gamma_rate_fit(narrow, std::vector<double>{1, 2, 3}), InvalidArgument);
}
