#include "ddlab/run.hpp"

#include <fftw3.h>
#include <gsl/gsl_version.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <utility>

#include "ddlab/error.hpp"
#include "ddlab/estimates.hpp"
#include "ddlab/hyperbolic_ref.hpp"
#include "ddlab/io.hpp"
#include "ddlab/kernels.hpp"
#include "ddlab/solver2d.hpp"
#include "ddlab/spectral1d.hpp"
#include "ddlab/sweep.hpp"

namespace ddlab {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// JSON has no NaN; missing values become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;

  void csv(std::string name, const CsvTable& t) { files.emplace_back(std::move(name), t.to_text()); }
  void text(std::string name, const json& j) { files.emplace_back(std::move(name), j.dump(2) + "\n"); }
  void raw(std::string name, std::string bytes) { files.emplace_back(std::move(name), std::move(bytes)); }
};

struct ModeResult {
  ExitStatus status = ExitStatus::ok;
  std::string message;
};

CsvTable estimates_table(const EstimateReport& rep) {
  CsvTable t{{"label", "time", "lhs", "rhs", "slack", "tol", "pass"}, {}};
  for (const InequalityRecord& r : rep.records)
    t.add_row({r.label, r.time, r.lhs, r.rhs, r.slack, r.tol, r.pass ? 1.0 : 0.0});
  return t;
}

json worst_json(const EstimateReport& rep) {
  json out = json::object();
  for (const InequalityRecord& r : rep.summary())
    out[r.label] = {{"time", r.time}, {"lhs", num(r.lhs)}, {"rhs", num(r.rhs)},
                    {"slack", num(r.slack)}, {"tol", num(r.tol)}, {"pass", r.pass}};
  return out;
}

TimeController controller(const RunConfig& c) {
  TimeController tc;
  tc.cfl = c.cfl;
  tc.dt_max = c.dt_max;
  tc.t_final = c.t_final;
  tc.snapshot_times = TimeController::uniform_times(c.t_final, c.snapshots);
  tc.dt_fixed = c.dt;
  tc.validate();
  return tc;
}

struct Setup1D {
  FluxModel flux;
  Regularization reg;
  Field1D u0;
};

Setup1D setup1d(const RunConfig& c) {
  FluxModel flux = c.make_flux_x();
  const Regularization reg = Regularization::make(*c.eps, c.delta_for(*c.eps));
  const std::size_t n =
      c.n.value_or(GridRule{c.grid_factor}.n(c.x_max - c.x_min, reg.eps, reg.delta));
  Field1D u0 = sample_initial(Grid1D::make(c.x_min, c.x_max, n), c.initial, flux.working_range());
  return {std::move(flux), reg, std::move(u0)};
}

struct Setup2D {
  FluxVector2D fluxes;
  Regularization reg;
  Field2D u0;
};

// u0(x, y) = profile(x) + amplitude_y sin(2 pi modes_y (y - y_min) / L_y).
Setup2D setup2d(const RunConfig& c) {
  FluxVector2D fluxes{c.make_flux_x(), c.make_flux_y()};
  const Regularization reg = Regularization::make(*c.eps, c.delta_for(*c.eps));
  const std::size_t nx = c.n.value_or(128);
  const Grid2D grid = Grid2D::make({c.x_min, c.x_max, nx}, {c.y_min, c.y_max, c.ny.value_or(nx)});
  const Field1D px = sample_initial(Grid1D::make(c.x_min, c.x_max, nx), c.initial);
  const double ly = c.y_max - c.y_min;
  Field2D u0{grid, std::vector<double>(grid.size()), 0.0};
  for (std::size_t i = 0; i < grid.x.n; ++i)
    for (std::size_t j = 0; j < grid.y.n; ++j)
      u0.values[i * grid.y.n + j] =
          px.values[i] + c.amplitude_y * std::sin(2.0 * std::numbers::pi * c.modes_y *
                                                  (grid.y.x(j) - c.y_min) / ly);
  for (const FluxModel* f : {&fluxes.f1, &fluxes.f2})
    for (double v : u0.values)
      if (!f->contains(v)) throw InvalidArgument("initial data leave the flux working range");
  return {std::move(fluxes), reg, std::move(u0)};
}

json reg_json(const Regularization& reg) { return {{"eps", reg.eps}, {"delta", reg.delta}}; }

ModeResult simulate1d(const RunConfig& c, Outputs& out) {
  const Setup1D s = setup1d(c);
  const Trajectory traj = solve(s.u0, s.reg, s.flux, controller(c));
  out.csv("solution.csv", field_csv(traj.final()));
  out.csv("snapshots.csv", snapshots_csv(traj));
  json j;
  j["n"] = s.u0.grid.n;
  j["regularization"] = reg_json(s.reg);
  j["t_final"] = traj.final().time;
  j["steps"] = traj.dt_history.size();
  j["l2_initial"] = l2_norm(traj.initial());
  j["l2_final"] = l2_norm(traj.final());
  j["mean_drift"] = discrete_mean(traj.final()) - discrete_mean(traj.initial());
  j["total_variation_final"] = total_variation(traj.final());
  out.text("summary.json", j);
  return {ExitStatus::ok, "simulate: n = " + std::to_string(s.u0.grid.n) + ", " +
                              std::to_string(traj.dt_history.size()) + " steps"};
}

ModeResult simulate2d(const RunConfig& c, Outputs& out) {
  const Setup2D s = setup2d(c);
  const Trajectory2D traj = solve2d(s.u0, s.reg, s.fluxes, controller(c));
  out.csv("solution2d.csv", field2d_csv(traj.final()));
  out.raw("solution2d.bin", field2d_binary(traj.final()));
  const Norms2D n0 = norms2d(traj.initial()), n1 = norms2d(traj.final());
  json j;
  j["nx"] = s.u0.grid.x.n;
  j["ny"] = s.u0.grid.y.n;
  j["regularization"] = reg_json(s.reg);
  j["t_final"] = traj.final().time;
  j["steps"] = traj.dt_history.size();
  j["l2_initial"] = n0.l2_u;
  j["l2_final"] = n1.l2_u;
  out.text("summary.json", j);
  return {ExitStatus::ok, "simulate: " + std::to_string(traj.dt_history.size()) + " steps"};
}

ModeResult verify1d(const RunConfig& c, Outputs& out) {
  const Setup1D s = setup1d(c);
  const Trajectory traj = solve(s.u0, s.reg, s.flux, controller(c));
  const EstimateReport rep = check_theorem21(traj, s.reg, s.flux, s.u0);
  out.csv("estimates.csv", estimates_table(rep));
  json j;
  j["n"] = s.u0.grid.n;
  j["regularization"] = reg_json(s.reg);
  j["all_pass"] = rep.all_pass();
  j["worst"] = worst_json(rep);
  // The integrated identities need enough snapshots for the time quadrature.
  if (traj.snapshots.size() >= 33) {
    const BalanceResiduals b = balance_residuals(traj, s.reg, s.flux, c.make_entropy(s.flux));
    j["balance"] = {{"entropy", c.entropy},
                    {"entropy_relative", num(b.entropy_relative())},
                    {"energy_relative", num(b.energy_relative())},
                    {"gradient_relative", num(b.gradient_relative())},
                    {"rate_residual", num(b.rate_residual)}};
  }
  out.text("estimates_summary.json", j);
  if (!rep.all_pass()) {
    for (const InequalityRecord& r : rep.summary())
      if (!r.pass)
        return {ExitStatus::check_failed, "estimate " + r.label + " violated: slack " +
                                              format_double(r.slack) + " < -" + format_double(r.tol)};
  }
  return {ExitStatus::ok, "verify-estimates: all estimates pass"};
}

ModeResult verify2d(const RunConfig& c, Outputs& out) {
  const Setup2D s = setup2d(c);
  const Trajectory2D traj = solve2d(s.u0, s.reg, s.fluxes, controller(c));
  const MultiDReport rep = check_theorem31(traj, s.reg, s.fluxes, s.u0);
  out.csv("estimates.csv", estimates_table(rep.estimates));
  json j;
  j["nx"] = s.u0.grid.x.n;
  j["ny"] = s.u0.grid.y.n;
  j["regularization"] = reg_json(s.reg);
  j["all_pass"] = rep.estimates.all_pass();
  j["worst"] = worst_json(rep.estimates);
  j["identity_relative"] = num(rep.identity_relative);
  out.text("estimates_summary.json", j);
  if (!rep.estimates.all_pass()) return {ExitStatus::check_failed, "verify-estimates: an estimate is violated"};
  return {ExitStatus::ok, "verify-estimates: all estimates pass"};
}

json fit_json(const RateFit& f) {
  return {{"defined", f.defined}, {"slope", num(f.slope)}, {"intercept", num(f.intercept)},
          {"residual", num(f.residual)}};
}

SweepResult do_sweep(const RunConfig& c, const RunContext& ctx) {
  SweepPlan plan = c.sweep_plan();
  if (ctx.workers) plan.workers = *ctx.workers;
  return run_sweep(plan);
}

std::string failures(const SweepResult& res) {
  std::string msg;
  for (const SweepRecord& r : res.records)
    if (r.failed) msg += (msg.empty() ? "" : "; ") + ("eps " + format_double(r.eps) + ": " + r.failure);
  return msg;
}

ModeResult sweep_mode(const RunConfig& c, const RunContext& ctx, Outputs& out) {
  const SweepResult res = do_sweep(c, ctx);
  CsvTable t{{"eps", "delta", "n", "q", "distance", "cauchy_increment", "failed", "estimates_pass",
              "min_slack", "gamma1", "gamma2", "gamma3", "gamma4", "l1_gamma2", "l1_gamma4"},
             {}};
  for (const SweepRecord& r : res.records) {
    double min_slack = kNaN;
    for (const InequalityRecord& ir : r.estimates)
      min_slack = std::isnan(min_slack) ? ir.slack : std::min(min_slack, ir.slack);
    std::array<double, 6> g;
    g.fill(kNaN);
    if (r.gamma) {
      for (int i = 0; i < 4; ++i) g[i] = r.gamma->pairings[i];
      g[4] = r.gamma->l1_gamma2;
      g[5] = r.gamma->l1_gamma4;
    }
    for (std::size_t iq = 0; iq < c.q_list.size(); ++iq) {
      const double d = r.failed ? kNaN : r.distance[iq];
      t.add_row({r.eps, r.delta, static_cast<double>(r.n), c.q_list[iq], d,
                 r.cauchy_increment.value_or(kNaN), r.failed ? 1.0 : 0.0,
                 r.estimates_pass ? 1.0 : 0.0, min_slack, g[0], g[1], g[2], g[3], g[4], g[5]});
    }
  }
  out.csv("sweep.csv", t);

  json j;
  j["t_eval"] = res.t_eval;
  j["u0_window_l1"] = res.u0_window_l1;
  j["u0_l2sq"] = res.u0_l2sq;
  j["distance_slopes"] = json::array();
  for (std::size_t iq = 0; iq < res.distance_slopes.size(); ++iq)
    j["distance_slopes"].push_back({{"q", c.q_list[iq]}, {"fit", fit_json(res.distance_slopes[iq])}});
  if (c.theta) {
    j["gamma_slopes"] = json::array();
    for (const RateFit& f : res.gamma_slopes) j["gamma_slopes"].push_back(fit_json(f));
  }
  if (res.classification) {
    const LimitClass& lc = *res.classification;
    json inc = json::array();
    for (double v : lc.increments) inc.push_back(num(v));
    j["classification"] = {{"kind", to_string(lc.kind)}, {"final_distance", num(lc.final_distance)},
                           {"increments", inc}, {"tol_conv", lc.tol_conv}, {"tol_dist", lc.tol_dist}};
  } else {
    j["classification"] = nullptr;
  }
  j["failures"] = failures(res);
  out.text("sweep_summary.json", j);

  if (!j["failures"].get<std::string>().empty())
    return {ExitStatus::aborted, "sweep: " + j["failures"].get<std::string>()};
  for (const SweepRecord& r : res.records)
    if (!r.estimates_pass)
      return {ExitStatus::check_failed, "sweep: estimates violated at eps " + format_double(r.eps)};
  return {ExitStatus::ok, "sweep: " + (res.classification ? to_string(res.classification->kind)
                                                          : std::string("unclassified"))};
}

ModeResult gamma_mode(const RunConfig& c, const RunContext& ctx, Outputs& out) {
  const SweepResult res = do_sweep(c, ctx);
  CsvTable t{{"eps", "delta", "n", "gamma1", "gamma2", "gamma3", "gamma4", "gamma1_direct",
              "l1_gamma2", "l1_gamma4"},
             {}};
  for (const SweepRecord& r : res.records) {
    if (r.failed || !r.gamma) continue;
    const GammaReport& g = *r.gamma;
    t.add_row({r.eps, r.delta, static_cast<double>(r.n), g.pairings[0], g.pairings[1], g.pairings[2],
               g.pairings[3], g.gamma1_direct, g.l1_gamma2, g.l1_gamma4});
  }
  out.csv("gamma.csv", t);
  const std::string fail = failures(res);
  if (!fail.empty()) return {ExitStatus::aborted, "gamma: " + fail};

  const GammaBounds b = check_gamma_bounds(res, c.safety);
  CsvTable bt{{"label", "eps", "lhs", "rhs", "slack", "tol", "pass"}, {}};
  for (const InequalityRecord& r : b.report.records)
    bt.add_row({r.label, r.time, r.lhs, r.rhs, r.slack, r.tol, r.pass ? 1.0 : 0.0});
  out.csv("gamma_bounds.csv", bt);

  json j;
  j["t_eval"] = res.t_eval;
  j["safety"] = c.safety;
  j["constants"] = {{"gamma1", b.C[0]}, {"gamma3", b.C[1]}, {"gamma4", b.C[2]}};
  j["slopes"] = json::array();
  for (const RateFit& f : res.gamma_slopes) j["slopes"].push_back(fit_json(f));
  j["all_pass"] = b.report.all_pass();
  j["worst"] = worst_json(b.report);
  out.text("gamma_summary.json", j);
  if (!b.report.all_pass()) return {ExitStatus::check_failed, "gamma: a rate bound is violated"};
  return {ExitStatus::ok, "gamma: all bounds hold"};
}

ModeResult riemann_mode(const RunConfig& c, Outputs& out) {
  const FluxModel flux = c.make_flux_x();
  const WaveFan fan = oleinik_fan({c.u_left, c.u_right, flux});
  const WaveFan::Check chk = fan.check();

  double smin = 0.0, smax = 0.0;
  if (!fan.waves().empty()) {
    smin = fan.waves().front().speed_left;
    smax = fan.waves().back().speed_right;
  }
  const double pad = std::max(0.5, 0.25 * (smax - smin));
  constexpr std::size_t kSamples = 2001;
  CsvTable ft{{"xi", "u"}, {}};
  for (std::size_t k = 0; k < kSamples; ++k) {
    const double xi = smin - pad + (smax - smin + 2.0 * pad) * static_cast<double>(k) / (kSamples - 1);
    ft.add_row({xi, fan(xi)});
  }
  out.csv("fan.csv", ft);

  json j = json::parse(fan.to_json());
  j["check"] = {{"rh_residual", chk.rh_residual}, {"chord_violation", chk.chord_violation},
                {"speeds_ordered", chk.speeds_ordered}, {"ok", chk.ok()}};

  if (c.n) {
    // Godunov on the periodic step; compared inside the window, away from the
    // mirrored jump at the boundary.
    const Grid1D grid = Grid1D::make(c.x_min, c.x_max, *c.n);
    const double x0 = c.initial.center.value_or(0.5 * (c.x_min + c.x_max));
    const Field1D u0 = riemann_step(grid, c.u_left, c.u_right, x0);
    const Field1D u = godunov_solve(u0, flux, c.t_final, std::min(c.cfl, 0.45));
    const std::vector<double> ref =
        ReferenceSolution::self_similar(fan, x0, c.t_final).on_grid(grid);
    const Window w = c.window_set ? c.window : Window{c.x_min, c.x_max};
    CsvTable gt{{"x", "u", "u_fan"}, {}};
    double l1 = 0.0;
    for (std::size_t k = 0; k < grid.n; ++k) {
      gt.add_row({grid.x(k), u.values[k], ref[k]});
      if (grid.x(k) >= w.first && grid.x(k) < w.second) l1 += std::abs(u.values[k] - ref[k]);
    }
    out.csv("godunov.csv", gt);
    j["godunov"] = {{"n", grid.n}, {"t", c.t_final}, {"window", {w.first, w.second}},
                    {"l1_error", l1 * grid.dx()}};
  }
  out.text("fan.json", j);
  if (!chk.ok()) return {ExitStatus::check_failed, "riemann: fan fails its admissibility check"};
  return {ExitStatus::ok, "riemann: " + std::to_string(fan.waves().size()) + " wave(s)"};
}

json versions() {
  return {{"ddlab", kVersion},
          {"fftw", std::string(fftw_version)},
          {"gsl", std::string(gsl_version)},
          {"compiler", std::string(__VERSION__)},
          {"kernels", std::string(kernels::name(kernels::active().backend))}};
}

}  // namespace

RunOutcome run(RunConfig config, const RunContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  if (ctx.workers) {
    if (*ctx.workers < 1) throw InvalidArgument("workers >= 1 violated");
    config.workers = *ctx.workers;
  }

  Outputs out;
  ModeResult mr;
  try {
    switch (config.mode) {
      case Mode::simulate:
        mr = config.dim == 1 ? simulate1d(config, out) : simulate2d(config, out);
        break;
      case Mode::verify_estimates:
        mr = config.dim == 1 ? verify1d(config, out) : verify2d(config, out);
        break;
      case Mode::sweep: mr = sweep_mode(config, ctx, out); break;
      case Mode::gamma: mr = gamma_mode(config, ctx, out); break;
      case Mode::riemann: mr = riemann_mode(config, out); break;
    }
  } catch (const SolverAbort& e) {
    return {ExitStatus::aborted, "solver abort at t = " + format_double(e.time()) + ": " + e.what(), {}};
  }

  RunOutcome res{mr.status, mr.message, {}};
  json manifest;
  manifest["mode"] = std::string(to_string(config.mode));
  manifest["config_sha256"] = sha256_hex(ctx.config_text);
  manifest["inputs"] = json::array();
  for (const auto& p : config.input_files) {
    const std::string bytes = read_file(p);
    manifest["inputs"].push_back(
        {{"name", p.filename().string()}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
  }
  manifest["outputs"] = json::array();
  for (const auto& [name, bytes] : out.files) {
    write_file(ctx.out_dir / name, bytes);
    manifest["outputs"].push_back({{"name", name}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    res.outputs.push_back(name);
  }
  manifest["exit_status"] = static_cast<int>(mr.status);
  manifest["versions"] = versions();
  write_file(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
  res.outputs.push_back("manifest.json");

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_file(ctx.out_dir / "timing.txt", "wall_seconds " + format_double(secs) + "\n");
  res.outputs.push_back("timing.txt");
  return res;
}

}  // namespace ddlab
