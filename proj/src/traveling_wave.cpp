#include "ddlab/traveling_wave.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include "ddlab/error.hpp"
#include "ddlab/hyperbolic_ref.hpp"

namespace ddlab {

namespace {

// Profile ODE in z = xi / eps:  u' = w,  alpha w' = g(u) - w,  alpha = delta / eps^2.
// Stiff for small alpha, hence the BDF integrator with an exact Jacobian.
struct Profile {
  const FluxModel* f;
  double s, ul, fl, alpha;

  double g(double u) const { return f->eval(u) - fl - s * (u - ul); }
  double dg(double u) const { return f->deriv(u) - s; }
};

int profile_rhs(double /*z*/, const double y[], double dy[], void* params) {
  const auto* p = static_cast<const Profile*>(params);
  dy[0] = y[1];
  dy[1] = (p->g(y[0]) - y[1]) / p->alpha;
  return GSL_SUCCESS;
}

int profile_jac(double /*z*/, const double y[], double* J, double dfdz[], void* params) {
  const auto* p = static_cast<const Profile*>(params);
  J[0] = 0.0;
  J[1] = 1.0;
  J[2] = p->dg(y[0]) / p->alpha;
  J[3] = -1.0 / p->alpha;
  dfdz[0] = 0.0;
  dfdz[1] = 0.0;
  return GSL_SUCCESS;
}

struct DriverDeleter {
  void operator()(gsl_odeiv2_driver* d) const { gsl_odeiv2_driver_free(d); }
};

struct Root {
  double u;
  double slope;  // g'(u): > 0 saddle, < 0 attractor
};

std::vector<Root> roots_of(const Profile& p, double lo, double hi) {
  constexpr int kSamples = 4000;
  std::vector<Root> out;
  const double h = (hi - lo) / kSamples;
  double a = lo, ga = p.g(a);
  for (int i = 1; i <= kSamples; ++i) {
    const double b = lo + i * h;
    const double gb = p.g(b);
    if (ga == 0.0) {
      out.push_back({a, p.dg(a)});
    } else if ((ga < 0.0) != (gb < 0.0) && gb != 0.0) {
      double x0 = a, x1 = b, g0 = ga;
      for (int it = 0; it < 200 && x1 - x0 > 4 * std::numeric_limits<double>::epsilon() * (1 + std::abs(x0)); ++it) {
        const double m = 0.5 * (x0 + x1);
        const double gm = p.g(m);
        if ((gm < 0.0) == (g0 < 0.0)) {
          x0 = m;
          g0 = gm;
        } else {
          x1 = m;
        }
      }
      const double r = 0.5 * (x0 + x1);
      out.push_back({r, p.dg(r)});
    }
    a = b;
    ga = gb;
  }
  return out;
}

void validate(const FluxModel& flux, double eps, double delta, double u_left,
              std::pair<double, double> search) {
  if (!(eps > 0.0)) throw InvalidArgument("traveling wave: eps > 0 violated");
  if (!(delta > 0.0)) throw InvalidArgument("traveling wave: delta > 0 violated");
  if (!(search.first < search.second))
    throw InvalidArgument("traveling wave: empty search interval");
  if (u_left < search.first || u_left > search.second)
    throw InvalidArgument("traveling wave: u_left outside the search interval");
  if (!flux.contains(u_left)) throw InvalidArgument("traveling wave: u_left outside working range");
}

}  // namespace

ShootOutcome shoot_profile(const FluxModel& flux, double eps, double delta, double s,
                           double u_left, std::pair<double, double> search) {
  validate(flux, eps, delta, u_left, search);
  const Profile p{&flux, s, u_left, flux.eval(u_left), delta / (eps * eps)};
  const double gp = p.dg(u_left);
  if (!(gp > 0.0)) throw InvalidArgument("traveling wave: u_left is not a saddle at this speed");

  const auto [lo, hi] = search;
  const double width = hi - lo;
  const double margin = 1e-3 * width;

  std::vector<Root> roots;
  for (const Root& r : roots_of(p, lo - margin, hi + margin))
    if (std::abs(r.u - u_left) > 1e-9 * (1 + std::abs(u_left))) roots.push_back(r);

  ShootOutcome out;
  for (const Root& r : roots)
    if (r.slope > 0.0) out.saddle_approach.emplace_back(r.u, std::numeric_limits<double>::infinity());

  // Unstable eigenvector (1, lambda) of the saddle, entered toward the interior.
  const double lam = (-1.0 + std::sqrt(1.0 + 4.0 * p.alpha * gp)) / (2.0 * p.alpha);
  const double dir = (u_left - lo >= hi - u_left) ? -1.0 : 1.0;
  const double seed = 1e-6 * width;
  double y[2] = {u_left + dir * seed, dir * seed * lam};

  const double tol = 1e-6 * width;
  const double z_max = 1e4 / std::min(lam, 1.0) + 200.0 * std::max(p.alpha, 1.0);
  static std::once_flag quiet;
  std::call_once(quiet, [] { gsl_set_error_handler_off(); });
  gsl_odeiv2_system sys{profile_rhs, profile_jac, 2, const_cast<Profile*>(&p)};
  std::unique_ptr<gsl_odeiv2_driver, DriverDeleter> drv(
      gsl_odeiv2_driver_alloc_y_new(&sys, gsl_odeiv2_step_msbdf, 1e-3 / lam, 1e-12, 1e-10));
  if (!drv) throw std::runtime_error("traveling wave: integrator allocation failed");
  gsl_odeiv2_driver_set_nmax(drv.get(), 0);

  constexpr std::size_t kMaxSteps = 2'000'000;
  double z = 0.0;
  for (std::size_t k = 0; k < kMaxSteps && z < z_max; ++k) {
    if (gsl_odeiv2_evolve_apply(drv->e, drv->c, drv->s, &sys, &z, z_max, &drv->h, y) != GSL_SUCCESS)
      break;
    const double u = y[0], w = y[1];
    out.state = u;
    out.xi_end = eps * z;
    if (!std::isfinite(u) || !std::isfinite(w) || u < lo - margin || u > hi + margin) {
      out.kind = ShootOutcome::Kind::diverged;
      return out;
    }
    for (auto& [ur, d] : out.saddle_approach) d = std::min(d, std::abs(u - ur));
    for (const Root& r : roots) {
      if (r.slope < 0.0 && std::abs(u - r.u) < tol &&
          std::abs(w) < tol * std::max(1.0, std::abs(r.slope))) {
        out.kind = ShootOutcome::Kind::converged;
        out.state = r.u;
        return out;
      }
    }
  }
  out.kind = ShootOutcome::Kind::budget;
  return out;
}

std::optional<double> traveling_wave_shoot(const FluxModel& flux, double eps, double delta,
                                           double s, double u_left,
                                           std::pair<double, double> search) {
  validate(flux, eps, delta, u_left, search);
  if (!(flux.deriv(u_left) - s > 0.0)) return std::nullopt;
  const ShootOutcome o = shoot_profile(flux, eps, delta, s, u_left, search);
  if (o.kind != ShootOutcome::Kind::converged) return std::nullopt;
  return o.state;
}

std::optional<Connection> find_nonclassical_connection(const FluxModel& flux, double eps,
                                                       double delta, double u_left,
                                                       std::pair<double, double> speed_bracket,
                                                       std::pair<double, double> search) {
  validate(flux, eps, delta, u_left, search);
  double a = speed_bracket.first, b = speed_bracket.second;
  if (!(a < b)) throw InvalidArgument("find_nonclassical_connection: empty speed bracket");
  using K = ShootOutcome::Kind;
  const ShootOutcome oa = shoot_profile(flux, eps, delta, a, u_left, search);
  const ShootOutcome ob = shoot_profile(flux, eps, delta, b, u_left, search);
  if (oa.kind == K::budget || ob.kind == K::budget || oa.kind == ob.kind) return std::nullopt;
  const K ka = oa.kind;

  ShootOutcome last = oa;
  for (int it = 0; it < 80 && b - a > 1e-13 * (1 + std::abs(a)); ++it) {
    const double m = 0.5 * (a + b);
    ShootOutcome om = shoot_profile(flux, eps, delta, m, u_left, search);
    if (om.kind == K::budget) break;
    (om.kind == ka ? a : b) = m;
    last = std::move(om);
  }
  if (b - a > 1e-8 * (1 + std::abs(a)) || last.saddle_approach.empty()) return std::nullopt;

  const double s = 0.5 * (a + b);
  const Profile p{&flux, s, u_left, flux.eval(u_left), delta / (eps * eps)};
  auto best = std::min_element(last.saddle_approach.begin(), last.saddle_approach.end(),
                               [](const auto& x, const auto& y) { return x.second < y.second; });
  // Re-solve the saddle root at the final speed.
  double state = best->first;
  double closest = std::numeric_limits<double>::infinity();
  const double margin = 1e-3 * (search.second - search.first);
  for (const Root& r : roots_of(p, search.first - margin, search.second + margin)) {
    if (r.slope <= 0.0 || std::abs(r.u - u_left) < 1e-9 * (1 + std::abs(u_left))) continue;
    if (std::abs(r.u - best->first) < closest) {
      closest = std::abs(r.u - best->first);
      state = r.u;
    }
  }
  return Connection{s, state};
}

namespace {

double fan_window_distance(const std::function<double(double)>& a,
                           const std::function<double(double)>& b, const CalibrationPlan& plan) {
  constexpr int kCells = 20000;
  const auto [x0, x1] = plan.window;
  const double h = (x1 - x0) / kCells;
  double sum = 0.0;
  for (int i = 0; i < kCells; ++i) {
    const double xi = (x0 + (i + 0.5) * h - plan.x0) / plan.t;
    sum += std::abs(a(xi) - b(xi));
  }
  return sum * h;
}

}  // namespace

CalibrationResult calibrate_nonclassical_K(const FluxModel& flux, const CalibrationPlan& plan) {
  if (!(plan.t > 0.0)) throw InvalidArgument("calibrate_nonclassical_K: t > 0 violated");
  if (!(plan.window.first < plan.window.second))
    throw InvalidArgument("calibrate_nonclassical_K: empty window");

  const WaveFan classical = oleinik_fan({plan.u_left, plan.u_right, flux});
  if (classical.waves().empty()) throw InvalidArgument("calibrate_nonclassical_K: trivial problem");
  const Wave& first = classical.waves().front();
  // The classical intermediate state bounds the search for the nonclassical one.
  const double lo = std::min(plan.u_left, plan.u_right) - std::abs(plan.u_left - plan.u_right);
  const double hi = std::max(plan.u_left, plan.u_right);
  const std::pair<double, double> search =
      plan.u_left > plan.u_right ? std::pair{std::max(lo, -flux.bound()), plan.u_left}
                                 : std::pair{plan.u_left, std::min(hi + std::abs(plan.u_left - plan.u_right), flux.bound())};

  const double s_lo = first.speed_left;
  // Near f'(u_left) the saddle degenerates and shooting stalls; stop halfway.
  const double s_hi = 0.5 * (s_lo + flux.deriv(plan.u_left));
  const double pad = 1e-7 * (1 + std::abs(s_hi - s_lo));

  CalibrationResult res;
  for (double K : plan.K_candidates) {
    CalibrationStep step;
    step.K = K;
    if (K > 0.0 && s_hi - s_lo > 2 * pad) {
      const double eps = plan.eps;
      step.connection = find_nonclassical_connection(flux, eps, K * eps * eps, plan.u_left,
                                                     {s_lo + pad, s_hi - pad}, search);
    }
    const bool beyond = step.connection &&
                        (plan.u_left > plan.u_right ? step.connection->state < first.u_right
                                                    : step.connection->state > first.u_right);
    if (beyond) {
      const Connection c = *step.connection;
      const WaveFan rest = oleinik_fan({c.state, plan.u_right, flux});
      const double ul = plan.u_left;
      auto nonclassical = [&](double xi) { return xi < c.speed ? ul : rest(xi); };
      step.predicted_distance = fan_window_distance(
          nonclassical, [&](double xi) { return classical(xi); }, plan);
      step.accepted = step.predicted_distance >= plan.min_distance;
    }
    res.steps.push_back(step);
    if (step.accepted) {
      res.K = K;
      break;
    }
  }
  return res;
}

}  // namespace ddlab
