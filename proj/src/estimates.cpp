#include "ddlab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ddlab/error.hpp"

namespace ddlab {

namespace {

double sum_dx(std::span<const double> v, double dx) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * dx;
}

double sumsq_dx(std::span<const double> v, double dx) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s * dx;
}

// Composite Simpson over possibly nonuniform nodes; an odd trailing interval
// integrates the parabola through the last three nodes.
double simpson(std::span<const double> t, std::span<const double> g) {
  const std::size_t m = t.size();
  if (m < 2) return 0.0;
  if (m == 2) return 0.5 * (t[1] - t[0]) * (g[0] + g[1]);
  double s = 0.0;
  std::size_t i = 0;
  for (; i + 2 < m; i += 2) {
    const double h0 = t[i + 1] - t[i];
    const double h1 = t[i + 2] - t[i + 1];
    const double H = h0 + h1;
    s += H / 6.0 *
         ((2.0 - h1 / h0) * g[i] + H * H / (h0 * h1) * g[i + 1] + (2.0 - h0 / h1) * g[i + 2]);
  }
  if (i + 1 < m) {
    const double h0 = t[i] - t[i - 1];
    const double h1 = t[i + 1] - t[i];
    s += h1 / 6.0 *
         ((3.0 - h1 / (h0 + h1)) * g[i + 1] + (3.0 + h1 / h0) * g[i] -
          h1 * h1 / (h0 * (h0 + h1)) * g[i - 1]);
  }
  return s;
}

}  // namespace

Norms norms(const Field1D& field) {
  SpectralOps1D ops(field.grid);
  const auto d = ops.derivatives(field.values, 2);
  const double dx = field.grid.dx();
  return {std::sqrt(sumsq_dx(d[0], dx)), std::sqrt(sumsq_dx(d[1], dx)),
          std::sqrt(sumsq_dx(d[2], dx))};
}

// ---------------------------------------------------------------------------

bool EstimateReport::all_pass() const {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.pass; });
}

const InequalityRecord& EstimateReport::worst(const std::string& label) const {
  const InequalityRecord* w = nullptr;
  for (const auto& r : records) {
    if (r.label != label) continue;
    if (w == nullptr || r.slack + r.tol < w->slack + w->tol) w = &r;
  }
  if (w == nullptr) throw InvalidArgument("EstimateReport: no record labelled " + label);
  return *w;
}

std::vector<InequalityRecord> EstimateReport::summary() const {
  std::vector<std::string> labels;
  for (const auto& r : records) {
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
  }
  std::vector<InequalityRecord> out;
  for (const auto& l : labels) out.push_back(worst(l));
  return out;
}

EstimateReport check_theorem21(const Trajectory& traj, const Regularization& reg,
                               const FluxModel& flux, const Field1D& u0) {
  if (traj.snapshots.empty() || traj.accum.size() != traj.snapshots.size()) {
    throw InvalidArgument("check_theorem21: trajectory has no accumulators");
  }
  const Norms n0 = norms(u0);
  const double M = flux.lipschitz_bound();
  const double eps = reg.eps;
  const double delta = std::max(reg.delta, 0.0);
  const double rhs_cd = std::sqrt(2.0 * M) * n0.l2_u + std::sqrt(delta) * n0.l2_ux;

  EstimateReport rep;
  auto add = [&](const char* label, double t, double lhs, double rhs, double budget) {
    InequalityRecord r;
    r.label = label;
    r.time = t;
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = rhs - lhs;
    r.tol = kIneqRelTol * std::abs(rhs) + budget;
    r.pass = r.slack >= -r.tol;
    rep.records.push_back(r);
  };

  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const Field1D& s = traj.snapshots[i];
    const Accumulators& a = traj.accum[i];
    const Norms nt = norms(s);
    add("energy", s.time, nt.l2_u, n0.l2_u, 0.0);

    const double b = std::sqrt(2.0 * eps * a.gradsq);
    add("dissipation", s.time, b, n0.l2_u, std::sqrt(2.0 * eps * (a.gradsq + a.gradsq_err)) - b);

    if (delta > 0.0) {
      add("dispersive_gradient", s.time, std::sqrt(delta) * nt.l2_ux, rhs_cd, 0.0);
      const double d = std::sqrt(eps * delta * a.hesssq);
      add("dispersive_hessian", s.time, d, rhs_cd, std::sqrt(eps * delta * (a.hesssq + a.hesssq_err)) - d);
    } else {
      add("dispersive_gradient", s.time, 0.0, rhs_cd, 0.0);
      add("dispersive_hessian", s.time, 0.0, rhs_cd, 0.0);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

BalanceResiduals balance_residuals(const Trajectory& traj, const Regularization& reg,
                                   const FluxModel& flux, const EntropyPair& pair) {
  const std::size_t ns = traj.snapshots.size();
  if (ns < 33) {
    throw InvalidArgument("balance_residuals: need at least 33 snapshots, got " +
                          std::to_string(ns));
  }
  const Grid1D& g = traj.snapshots.front().grid;
  const double dx = g.dx();
  SpectralOps1D ops(g);

  std::vector<double> t(ns), Uint(ns), Ediss(ns), Ecub(ns), L2(ns), G2(ns), H2(ns), Cgrad(ns);
  std::vector<double> w(g.n), dfv(g.n), fv(g.n);
  for (std::size_t i = 0; i < ns; ++i) {
    const Field1D& s = traj.snapshots[i];
    t[i] = s.time;
    const auto d = ops.derivatives(s.values, 2);
    const auto& u = d[0];
    const auto& ux = d[1];

    for (std::size_t j = 0; j < g.n; ++j) w[j] = pair.U(u[j]);
    Uint[i] = sum_dx(w, dx);
    for (std::size_t j = 0; j < g.n; ++j) w[j] = pair.d2U(u[j]) * ux[j] * ux[j];
    Ediss[i] = sum_dx(w, dx);
    L2[i] = sumsq_dx(u, dx);
    G2[i] = sumsq_dx(ux, dx);
    H2[i] = sumsq_dx(d[2], dx);

    // Cubic terms on the 2/3-truncated state, as seen by the flux evaluation.
    const auto uT = ops.dealias(u);
    const auto uTx = ops.derivative(uT, 1);
    for (std::size_t j = 0; j < g.n; ++j) w[j] = pair.d3U(uT[j]) * uTx[j] * uTx[j] * uTx[j];
    Ecub[i] = sum_dx(w, dx);
    flux.eval(uT, fv, dfv);
    const auto dfx = ops.derivative(dfv, 1);  // f''(u) u_x
    for (std::size_t j = 0; j < g.n; ++j) w[j] = dfx[j] * uTx[j] * uTx[j];
    Cgrad[i] = sum_dx(w, dx);
  }

  const double iE = simpson(t, Ediss);
  const double iC = simpson(t, Ecub);
  const double iG = simpson(t, G2);
  const double iH = simpson(t, H2);
  const double iCg = simpson(t, Cgrad);
  const std::size_t e = ns - 1;
  const double eps = reg.eps;
  const double delta = reg.delta;

  BalanceResiduals r;
  r.entropy_residual = Uint[e] + eps * iE - Uint[0] - 0.5 * delta * iC;
  r.entropy_norm = std::abs(Uint[e]) + std::abs(eps * iE) + std::abs(Uint[0]) +
                   std::abs(0.5 * delta * iC);
  r.energy_residual = L2[e] + 2.0 * eps * iG - L2[0];
  r.energy_norm = L2[e] + 2.0 * eps * iG + L2[0];
  r.gradient_residual = G2[e] + 2.0 * eps * iH - G2[0] + iCg;
  r.gradient_norm = G2[e] + 2.0 * eps * iH + G2[0] + std::abs(iCg);
  r.entropy_residual = std::abs(r.entropy_residual);
  r.energy_residual = std::abs(r.energy_residual);
  r.gradient_residual = std::abs(r.gradient_residual);
  const auto guard = [](double v) { return v > 0.0 ? v : 1.0; };
  r.entropy_norm = guard(r.entropy_norm);
  r.energy_norm = guard(r.energy_norm);
  r.gradient_norm = guard(r.gradient_norm);

  // Instantaneous rate: central difference of int U against the midpoint dissipation.
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i + 1 < ns; ++i) {
    const double h = t[i + 1] - t[i];
    if (!(h > 0.0)) continue;
    const double lhs = (Uint[i + 1] - Uint[i]) / h;
    const double rhs = -0.5 * ((eps * Ediss[i] - 0.5 * delta * Ecub[i]) +
                               (eps * Ediss[i + 1] - 0.5 * delta * Ecub[i + 1]));
    worst = std::max(worst, std::abs(lhs - rhs));
    scale = std::max(scale, std::abs(rhs));
  }
  r.rate_residual = scale > 0.0 ? worst / scale : worst;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct GammaWork {
  std::vector<double> u, ux, uxx, uxxx, a, b;
};

GammaWork gamma_work(SpectralOps1D& ops, std::span<const double> values, const EntropyPair& pair) {
  auto d = ops.derivatives(values, 3);
  GammaWork w{std::move(d[0]), std::move(d[1]), std::move(d[2]), std::move(d[3]), {}, {}};
  const std::size_t n = w.u.size();
  w.a.resize(n);
  w.b.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double up = pair.dU(w.u[j]);
    w.a[j] = up * w.ux[j];
    w.b[j] = up * w.uxx[j];
  }
  return w;
}

}  // namespace

GammaFields gamma_fields(const Field1D& state, const Regularization& reg,
                         const EntropyPair& pair) {
  SpectralOps1D ops(state.grid);
  const GammaWork w = gamma_work(ops, state.values, pair);
  const std::size_t n = w.u.size();
  GammaFields g;
  g.g1 = ops.derivative(w.a, 1);
  g.g3 = ops.derivative(w.b, 1);
  g.g2.resize(n);
  g.g4.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double upp = pair.d2U(w.u[j]);
    g.g1[j] *= reg.eps;
    g.g3[j] *= reg.delta;
    g.g2[j] = -reg.eps * upp * w.ux[j] * w.ux[j];
    g.g4[j] = -reg.delta * upp * w.ux[j] * w.uxx[j];
  }
  return g;
}

std::vector<double> gamma_total(const Field1D& state, const Regularization& reg,
                                const EntropyPair& pair) {
  SpectralOps1D ops(state.grid);
  const auto d = ops.derivatives(state.values, 3);
  std::vector<double> out(state.grid.n);
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = pair.dU(d[0][j]) * (reg.eps * d[2][j] + reg.delta * d[3][j]);
  }
  return out;
}

double TestFunction::bump(double r) {
  if (!(std::abs(r) < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double TestFunction::dbump(double r) {
  if (!(std::abs(r) < 1.0)) return 0.0;
  const double q = 1.0 - r * r;
  return bump(r) * (-2.0 * r / (q * q));
}

double TestFunction::operator()(double x, double t) const {
  return bump((x - xc) / wx) * bump((t - tc) / wt);
}

double TestFunction::dx(double x, double t) const {
  return dbump((x - xc) / wx) / wx * bump((t - tc) / wt);
}

bool TestFunction::in_support(double x, double t) const {
  return std::abs(x - xc) <= wx && std::abs(t - tc) <= wt;
}

GammaReport gamma_pairings(const Trajectory& traj, const Regularization& reg,
                           const EntropyPair& pair, const TestFunction& theta) {
  if (traj.snapshots.size() < 2) throw InvalidArgument("gamma_pairings: need >= 2 snapshots");
  if (!(theta.wx > 0.0 && theta.wt > 0.0)) {
    throw InvalidArgument("gamma_pairings: theta widths must be > 0");
  }
  const Grid1D& g = traj.snapshots.front().grid;
  const double t0 = traj.snapshots.front().time;
  const double t1 = traj.snapshots.back().time;
  if (theta.xc - theta.wx < g.x_min || theta.xc + theta.wx > g.x_max ||
      theta.tc - theta.wt < t0 || theta.tc + theta.wt > t1) {
    throw InvalidArgument("gamma_pairings: theta support exceeds the trajectory window");
  }
  const double dx = g.dx();
  const double eps = reg.eps, delta = reg.delta;
  SpectralOps1D ops(g);

  const std::size_t ns = traj.snapshots.size();
  std::vector<double> t(ns);
  std::vector<std::array<double, 7>> rows(ns);  // p1, p1direct, p2, p3, p4, l1g2, l1g4
  for (std::size_t i = 0; i < ns; ++i) {
    const Field1D& s = traj.snapshots[i];
    t[i] = s.time;
    rows[i].fill(0.0);
    if (std::abs(s.time - theta.tc) > theta.wt) continue;
    const GammaWork w = gamma_work(ops, s.values, pair);
    const auto da = ops.derivative(w.a, 1);
    auto& r = rows[i];
    for (std::size_t j = 0; j < g.n; ++j) {
      const double x = g.x(j);
      if (std::abs(x - theta.xc) > theta.wx) continue;
      const double th = theta(x, s.time);
      const double thx = theta.dx(x, s.time);
      const double upp = pair.d2U(w.u[j]);
      const double g2 = -eps * upp * w.ux[j] * w.ux[j];
      const double g4 = -delta * upp * w.ux[j] * w.uxx[j];
      r[0] += -eps * w.a[j] * thx;
      r[1] += eps * da[j] * th;
      r[2] += g2 * th;
      r[3] += -delta * w.b[j] * thx;
      r[4] += g4 * th;
      r[5] += std::abs(g2);
      r[6] += std::abs(g4);
    }
    for (double& v : r) v *= dx;
  }

  std::array<double, 7> acc{};
  for (std::size_t i = 1; i < ns; ++i) {
    const double h = t[i] - t[i - 1];
    for (std::size_t k = 0; k < 7; ++k) acc[k] += 0.5 * h * (rows[i][k] + rows[i - 1][k]);
  }
  GammaReport rep;
  rep.theta = theta;
  rep.eps = eps;
  rep.delta = delta;
  rep.pairings = {acc[0], acc[2], acc[3], acc[4]};
  rep.gamma1_direct = acc[1];
  rep.l1_gamma2 = acc[5];
  rep.l1_gamma4 = acc[6];
  return rep;
}

RateFit gamma_rate_fit(std::span<const double> eps, std::span<const double> values) {
  if (eps.size() != values.size()) throw InvalidArgument("gamma_rate_fit: size mismatch");
  if (eps.size() < 3) throw InvalidArgument("gamma_rate_fit: need at least 3 values");
  const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
  if (!(*lo > 0.0) || *hi / *lo < 4.0) {
    throw InvalidArgument("gamma_rate_fit: eps values must be positive and span a factor >= 4");
  }
  RateFit fit;
  for (double v : values) {
    if (!(std::abs(v) >= 1e-14)) return fit;
  }
  const std::size_t n = eps.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(eps[i]);
    const double y = std::log(std::abs(values[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  fit.slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / dn;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r =
        std::log(std::abs(values[i])) - (fit.intercept + fit.slope * std::log(eps[i]));
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / dn);
  fit.defined = true;
  return fit;
}

}  // namespace ddlab
