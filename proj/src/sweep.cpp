#include "ddlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <numbers>
#include <thread>

#include "ddlab/error.hpp"

namespace ddlab {

std::size_t GridRule::n(double length, double eps, double delta) const {
  if (!(eps > 0.0) || !(length > 0.0)) throw InvalidArgument("GridRule: eps > 0 and L > 0 required");
  const double disp = delta > 0.0 ? std::sqrt(delta) / eps : 0.0;
  const double target = factor * length / (std::numbers::pi * eps) * std::max(1.0, disp);
  if (!(target < static_cast<double>(n_max)))
    throw InvalidArgument("GridRule: required n exceeds n_max");
  const auto want = std::max<std::size_t>(n_min, static_cast<std::size_t>(std::ceil(target)));
  return std::bit_ceil(want);
}

double SweepPlan::delta(double eps) const { return K * std::pow(eps, p); }

void SweepPlan::validate() const {
  if (eps_list.empty()) throw InvalidArgument("SweepPlan.eps_list must not be empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw InvalidArgument("SweepPlan.eps_list: Regularization.eps > 0 violated");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw InvalidArgument("SweepPlan.eps_list must be strictly decreasing");
  }
  if (!(K >= 0.0)) throw InvalidArgument("SweepPlan.K >= 0 violated");
  if (!(p > 0.0)) throw InvalidArgument("SweepPlan.p > 0 violated");
  if (!(x_max > x_min)) throw InvalidArgument("SweepPlan: x_max > x_min violated");
  if (!(window.first < window.second) || window.first < x_min || window.second > x_max)
    throw InvalidArgument("SweepPlan.window must be a nonempty interval inside the domain");
  if (q_list.empty()) throw InvalidArgument("SweepPlan.q_list must not be empty");
  for (double q : q_list)
    if (!(q >= 1.0 && q <= 2.0)) throw InvalidArgument("SweepPlan.q_list: 1 <= q <= 2 violated");
  if (t_eval && !(*t_eval > 0.0)) throw InvalidArgument("SweepPlan.t_eval > 0 violated");
  if (reference == ReferenceKind::fan && profile.kind != InitialProfile::Kind::smoothed_riemann)
    throw InvalidArgument("SweepPlan: fan reference requires Riemann data");
  if (reference_factor < 2 || reference_factor % 2 != 0)
    throw InvalidArgument("SweepPlan.reference_factor must be even and >= 2");
  if (snapshots < 1) throw InvalidArgument("SweepPlan.snapshots >= 1 violated");
  if (workers < 1) throw InvalidArgument("SweepPlan.workers >= 1 violated");
  if (profile_sup(profile) > flux.bound())
    throw InvalidArgument("SweepPlan: flux working range does not cover the data");
}

std::string to_string(LimitClass::Kind k) {
  switch (k) {
    case LimitClass::Kind::classical: return "classical";
    case LimitClass::Kind::nonclassical: return "nonclassical";
    case LimitClass::Kind::nonconvergent: return "nonconvergent";
  }
  return "unknown";
}

namespace {

void check_window(const Grid1D& g, Window w) {
  if (!(w.first < w.second) || w.first < g.x_min || w.second > g.x_max)
    throw InvalidArgument("window outside domain");
}

bool in_window(double x, Window w) { return x >= w.first && x < w.second; }

}  // namespace

double lploc_distance(const Field1D& a, const ReferenceSolution& ref, double q, Window window) {
  if (!(q >= 1.0 && q <= 2.0)) throw InvalidArgument("lploc_distance: 1 <= q <= 2 violated");
  check_window(a.grid, window);
  const std::vector<double> r = ref.on_grid(a.grid);
  const double dx = a.grid.dx();
  double sum = 0.0;
  for (std::size_t j = 0; j < a.grid.n; ++j)
    if (in_window(a.grid.x(j), window)) sum += std::pow(std::abs(a.values[j] - r[j]), q);
  return std::pow(sum * dx, 1.0 / q);
}

double window_l1_between(const Field1D& a, const Field1D& b, Window window) {
  const Field1D& coarse = a.grid.n <= b.grid.n ? a : b;
  const Field1D& fine = a.grid.n <= b.grid.n ? b : a;
  if (coarse.grid.x_min != fine.grid.x_min || coarse.grid.x_max != fine.grid.x_max)
    throw InvalidArgument("window_l1_between: grids must share the domain");
  if (fine.grid.n % coarse.grid.n != 0)
    throw InvalidArgument("window_l1_between: grids must be nested");
  check_window(coarse.grid, window);
  const std::size_t r = fine.grid.n / coarse.grid.n;
  double sum = 0.0;
  for (std::size_t j = 0; j < coarse.grid.n; ++j)
    if (in_window(coarse.grid.x(j), window))
      sum += std::abs(coarse.values[j] - fine.values[j * r]);
  return sum * coarse.grid.dx();
}

double default_t_eval(const Field1D& u0, const FluxModel& flux) {
  const std::size_t n = u0.grid.n;
  const double dx = u0.grid.dx();
  double steep = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double up = flux.deriv(u0.values[(j + 1) % n]);
    const double um = flux.deriv(u0.values[(j + n - 1) % n]);
    steep = std::max(steep, -(up - um) / (2.0 * dx));
  }
  return steep > 0.0 ? 2.0 / steep : 1.0;
}

namespace {

struct Shared {
  double t_eval = 0.0;
  std::optional<ReferenceSolution> fan_ref;
  ReferenceKind kind = ReferenceKind::fan;
};

SweepRecord run_one(const SweepPlan& plan, const Shared& sh, double eps) {
  SweepRecord rec;
  rec.eps = eps;
  rec.delta = plan.delta(eps);
  try {
    const Regularization reg = Regularization::make(eps, rec.delta);
    rec.n = plan.grid_rule.n(plan.x_max - plan.x_min, eps, rec.delta);
    const Grid1D grid = Grid1D::make(plan.x_min, plan.x_max, rec.n);
    const Field1D u0 = sample_initial(grid, plan.profile, plan.flux.working_range());

    TimeController tc;
    tc.cfl = plan.cfl;
    tc.dt_max = plan.dt_max;
    tc.t_final = sh.t_eval;
    tc.snapshot_times = TimeController::uniform_times(sh.t_eval, plan.snapshots);
    const Trajectory traj = solve(u0, reg, plan.flux, tc);

    std::optional<ReferenceSolution> fine;
    if (sh.kind == ReferenceKind::fine_grid) {
      const Grid1D fg = Grid1D::make(plan.x_min, plan.x_max, rec.n * plan.reference_factor);
      fine = ReferenceSolution::fine_grid(
          godunov_solve(sample_initial(fg, plan.profile, plan.flux.working_range()), plan.flux,
                        sh.t_eval));
    }
    const ReferenceSolution& ref = fine ? *fine : *sh.fan_ref;
    for (double q : plan.q_list) rec.distance.push_back(lploc_distance(traj.final(), ref, q, plan.window));

    const EstimateReport rep = check_theorem21(traj, reg, plan.flux, u0);
    rec.estimates_pass = rep.all_pass();
    rec.estimates = rep.summary();

    if (plan.theta) {
      const EntropyPair pair = make_entropy_pair(square_entropy(), plan.flux);
      rec.gamma = gamma_pairings(traj, reg, pair, *plan.theta);
    }
    rec.solution = traj.final();
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.failure = e.what();
    rec.distance.clear();
    rec.gamma.reset();
    rec.solution.reset();
  }
  return rec;
}

}  // namespace

SweepResult run_sweep(const SweepPlan& plan) {
  plan.validate();
  SweepResult res;

  Shared sh;
  const std::size_t n0 = plan.grid_rule.n(plan.x_max - plan.x_min, plan.eps_list.front(),
                                          plan.delta(plan.eps_list.front()));
  const Field1D u0_coarse =
      sample_initial(Grid1D::make(plan.x_min, plan.x_max, n0), plan.profile);
  sh.t_eval = plan.t_eval.value_or(default_t_eval(u0_coarse, plan.flux));
  res.t_eval = sh.t_eval;
  {
    double l1 = 0.0;
    for (std::size_t j = 0; j < n0; ++j)
      if (in_window(u0_coarse.grid.x(j), plan.window)) l1 += std::abs(u0_coarse.values[j]);
    res.u0_window_l1 = l1 * u0_coarse.grid.dx();
    res.u0_l2sq = std::pow(l2_norm(u0_coarse), 2);
  }
  const bool riemann = plan.profile.kind == InitialProfile::Kind::smoothed_riemann;
  sh.kind = plan.reference.value_or(riemann ? ReferenceKind::fan : ReferenceKind::fine_grid);
  if (sh.kind == ReferenceKind::fan) {
    const double x0 = plan.profile.center.value_or(0.5 * (plan.x_min + plan.x_max));
    sh.fan_ref = ReferenceSolution::self_similar(
        oleinik_fan({plan.profile.u_left, plan.profile.u_right, plan.flux}), x0, sh.t_eval);
  }

  // Runs are independent; results land in plan order whatever the schedule.
  res.records.resize(plan.eps_list.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < plan.eps_list.size(); i = next++)
      res.records[i] = run_one(plan, sh, plan.eps_list[i]);
  };
  const std::size_t nthreads = std::min(plan.workers, plan.eps_list.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
  }

  const SweepRecord* prev = nullptr;
  for (SweepRecord& r : res.records) {
    if (r.failed) continue;
    if (prev) r.cauchy_increment = window_l1_between(*prev->solution, *r.solution, plan.window);
    prev = &r;
  }

  std::vector<double> eps_ok;
  for (const SweepRecord& r : res.records)
    if (!r.failed) eps_ok.push_back(r.eps);
  const bool fit = eps_ok.size() >= 3 && eps_ok.front() >= 4.0 * eps_ok.back();
  for (std::size_t qi = 0; qi < plan.q_list.size(); ++qi) {
    std::vector<double> d;
    for (const SweepRecord& r : res.records)
      if (!r.failed) d.push_back(r.distance[qi]);
    res.distance_slopes.push_back(fit ? gamma_rate_fit(eps_ok, d) : RateFit{});
  }
  if (plan.theta && fit) {
    for (std::size_t i = 0; i < 4; ++i) {
      std::vector<double> g;
      for (const SweepRecord& r : res.records)
        if (!r.failed) g.push_back(r.gamma->pairings[i]);
      res.gamma_slopes[i] = gamma_rate_fit(eps_ok, g);
    }
  }
  if (eps_ok.size() >= 3) res.classification = classify(res);
  return res;
}

LimitClass classify(std::span<const double> distances, std::span<const double> increments,
                    double tol_conv, double tol_dist) {
  if (distances.size() < 3) throw InvalidArgument("classify: at least 3 records required");
  if (increments.empty()) throw InvalidArgument("classify: Cauchy increments required");
  LimitClass lc;
  lc.final_distance = distances.back();
  lc.increments.assign(increments.begin(), increments.end());
  lc.tol_conv = tol_conv;
  lc.tol_dist = tol_dist;
  if (increments.back() > tol_conv)
    lc.kind = LimitClass::Kind::nonconvergent;
  else if (distances.back() < tol_dist)
    lc.kind = LimitClass::Kind::classical;
  else
    lc.kind = LimitClass::Kind::nonclassical;
  return lc;
}

LimitClass classify(const SweepResult& result, std::optional<double> tol_conv,
                    std::optional<double> tol_dist) {
  std::vector<double> d, c;
  const SweepRecord* last = nullptr;
  for (const SweepRecord& r : result.records) {
    if (r.failed) continue;
    d.push_back(r.distance.at(0));
    if (r.cauchy_increment) c.push_back(*r.cauchy_increment);
    last = &r;
  }
  LimitClass lc = classify(d, c, tol_conv.value_or(0.02 * result.u0_window_l1),
                           tol_dist.value_or(0.05 * result.u0_window_l1));
  if (last && last->gamma) {
    double s = 0.0;
    for (double v : last->gamma->pairings) s += v;
    lc.entropy_violation = std::max(0.0, s);
  }
  return lc;
}

GammaBounds check_gamma_bounds(const SweepResult& result, double safety) {
  std::vector<const SweepRecord*> recs;
  for (const SweepRecord& r : result.records)
    if (!r.failed && r.gamma) recs.push_back(&r);
  if (recs.size() < 2) throw InvalidArgument("check_gamma_bounds: need pairings for at least 2 eps");

  auto rates = [](const SweepRecord& r) {
    return std::array<double, 3>{std::sqrt(r.eps), std::sqrt(r.delta / r.eps), std::sqrt(r.delta) / r.eps};
  };
  auto values = [](const SweepRecord& r) {
    return std::array<double, 3>{std::abs(r.gamma->pairings[0]), std::abs(r.gamma->pairings[2]),
                                 r.gamma->l1_gamma4};
  };
  GammaBounds out;
  const auto r0 = rates(*recs.front());
  const auto v0 = values(*recs.front());
  for (int i = 0; i < 3; ++i) out.C[i] = r0[i] > 0.0 ? v0[i] / r0[i] : 0.0;

  auto add = [&](const char* label, double t, double lhs, double rhs) {
    InequalityRecord ir;
    ir.label = label;
    ir.time = t;
    ir.lhs = lhs;
    ir.rhs = rhs;
    ir.slack = rhs - lhs;
    ir.tol = kIneqRelTol * std::abs(rhs);
    ir.pass = ir.slack >= -ir.tol;
    out.report.records.push_back(ir);
  };
  static constexpr const char* kLabels[3] = {"gamma1_rate", "gamma3_rate", "gamma4_rate"};
  for (const SweepRecord* r : recs) {
    const auto rt = rates(*r);
    const auto v = values(*r);
    // The time column carries eps for these records.
    for (int i = 0; i < 3; ++i) add(kLabels[i], r->eps, v[i], safety * out.C[i] * rt[i]);
    add("gamma2_mass", r->eps, r->gamma->l1_gamma2, 0.5 * result.u0_l2sq);
    add("gamma2_sign", r->eps, r->gamma->pairings[1], 0.0);
  }
  return out;
}

}  // namespace ddlab
