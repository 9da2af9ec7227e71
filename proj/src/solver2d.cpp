#include "ddlab/solver2d.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

#include "ddlab/error.hpp"
#include "ddlab/kernels.hpp"

namespace ddlab {

using cplx = std::complex<double>;

Grid2D Grid2D::make(Axis x, Axis y) {
  for (const Axis* a : {&x, &y}) {
    if (a->n < 16 || !std::has_single_bit(a->n))
      throw InvalidArgument("Grid2D: n must be a power of two >= 16");
    if (!(a->max > a->min)) throw InvalidArgument("Grid2D: max > min violated");
  }
  return {x, y};
}

SpectralOps2D::SpectralOps2D(const Grid2D& g) : grid_(g), fft_(g.x.n, g.y.n) {
  const std::size_t nx = g.x.n, ny = g.y.n, my = ny / 2 + 1;
  const std::size_t m = nx * my;
  for (auto* v : {&kx_even_, &ky_even_, &kx_odd_, &ky_odd_, &kx_dealiased_, &ky_dealiased_, &w_})
    v->assign(m, 0.0);
  retained_.assign(m, 0);
  const double cx = 2.0 * std::numbers::pi / g.x.length();
  const double cy = 2.0 * std::numbers::pi / g.y.length();
  const double scale = g.x.length() * g.y.length() / std::pow(static_cast<double>(nx * ny), 2);
  for (std::size_t i = 0; i < nx; ++i) {
    const long ki = i <= nx / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(nx);
    const bool nyq_x = i == nx / 2;
    for (std::size_t j = 0; j < my; ++j) {
      const std::size_t k = i * my + j;
      const bool nyq_y = j == ny / 2;
      kx_even_[k] = cx * static_cast<double>(ki);
      ky_even_[k] = cy * static_cast<double>(j);
      kx_odd_[k] = nyq_x ? 0.0 : kx_even_[k];
      ky_odd_[k] = nyq_y ? 0.0 : ky_even_[k];
      const bool keep = static_cast<std::size_t>(std::abs(ki)) <= nx / 3 && j <= ny / 3;
      retained_[k] = keep;
      kx_dealiased_[k] = keep ? kx_odd_[k] : 0.0;
      ky_dealiased_[k] = keep ? ky_odd_[k] : 0.0;
      w_[k] = ((j == 0 || nyq_y) ? 1.0 : 2.0) * scale;
    }
  }
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void check_state(std::span<const double> u, const FluxVector2D& fl, double t) {
  const double m = kernels::active().max_abs(u);
  if (!std::isfinite(m)) throw SolverAbort("non-finite values at t = " + fmt(t) + " (blow-up)", t);
  for (const FluxModel* f : {&fl.f1, &fl.f2}) {
    if (!f->saturated() && m > f->bound())
      throw SolverAbort("solution left the flux working range: max|u| = " + fmt(m) + " > B = " +
                            fmt(f->bound()) + " at t = " + fmt(t),
                        t);
  }
}

class Integrator2D {
 public:
  Integrator2D(const Grid2D& g, const Regularization& reg, const FluxVector2D& fl)
      : ops_(g), fl_(fl) {
    const std::size_t m = ops_.modes();
    for (auto* v : {&lambda_, &e_half_, &v_, &k_, &tmp_, &tmp2_, &acc_, &ev2_, &stage_}) v->resize(m);
    phys_.resize(g.size());
    f1_.resize(g.size());
    f2_.resize(g.size());
    const auto w = ops_.parseval_weights();
    for (auto& a : w_grad_) a.resize(m);
    for (auto& a : w_hess_) a.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double ex = ops_.kx_even()[k], ey = ops_.ky_even()[k];
      const double ox = ops_.kx_odd()[k], oy = ops_.ky_odd()[k];
      lambda_[k] = cplx(-reg.eps * (ex * ex + ey * ey), -reg.delta * (ox * ox * ox + oy * oy * oy));
      w_grad_[0][k] = w[k] * ox * ox;
      w_grad_[1][k] = w[k] * oy * oy;
      w_hess_[0][k] = w[k] * ex * ex * ex * ex;
      w_hess_[1][k] = w[k] * ox * ox * oy * oy;
      w_hess_[2][k] = w[k] * ey * ey * ey * ey;
    }
  }

  void set_state(std::span<const double> u) { ops_.forward(u, v_); }
  void state(std::span<double> u) { ops_.inverse(v_, u); }

  void advance(double dt) {
    if (dt != cached_dt_) {
      for (std::size_t k = 0; k < lambda_.size(); ++k) e_half_[k] = std::exp(0.5 * dt * lambda_[k]);
      cached_dt_ = dt;
    }
    const auto& K = kernels::active();
    std::span<const cplx> E2 = e_half_;

    nonlinear(v_, k_);
    K.axpy(dt / 6.0, k_, v_, acc_);
    K.axpy(0.5 * dt, k_, v_, stage_);
    K.cmul(E2, stage_, stage_);
    K.cmul(E2, v_, ev2_);

    nonlinear(stage_, k_);
    K.cmul(E2, acc_, acc_);
    K.axpy(dt / 3.0, k_, acc_, acc_);
    K.axpy(0.5 * dt, k_, ev2_, stage_);

    nonlinear(stage_, k_);
    K.axpy(dt / 3.0, k_, acc_, acc_);
    K.axpy(dt, k_, ev2_, stage_);
    K.cmul(E2, stage_, stage_);

    nonlinear(stage_, k_);
    K.cmul(E2, acc_, acc_);
    K.axpy(dt / 6.0, k_, acc_, v_);
  }

  double grad(int a) const { return kernels::active().weighted_sumsq(w_grad_[a], v_); }
  double hess(int p) const { return kernels::active().weighted_sumsq(w_hess_[p], v_); }

 private:
  // out = -i kx P FFT(f1(u_T)) - i ky P FFT(f2(u_T))
  void nonlinear(std::span<const cplx> v, std::span<cplx> out) {
    const std::size_t m = ops_.modes();
    for (std::size_t k = 0; k < m; ++k) tmp_[k] = ops_.retained(k) ? v[k] : cplx(0.0);
    ops_.inverse(tmp_, phys_);
    fl_.f1.eval(phys_, f1_);
    fl_.f2.eval(phys_, f2_);
    const auto& K = kernels::active();
    ops_.forward(f1_, tmp_);
    K.ideriv(-1.0, ops_.kx_dealiased(), tmp_, out);
    ops_.forward(f2_, tmp2_);
    K.ideriv(-1.0, ops_.ky_dealiased(), tmp2_, tmp2_);
    for (std::size_t k = 0; k < m; ++k) out[k] += tmp2_[k];
  }

  SpectralOps2D ops_;
  FluxVector2D fl_;
  std::vector<cplx> lambda_, e_half_, v_, k_, tmp_, tmp2_, acc_, ev2_, stage_;
  std::vector<double> phys_, f1_, f2_;
  std::array<std::vector<double>, 2> w_grad_;
  std::array<std::vector<double>, 3> w_hess_;
  double cached_dt_ = -1.0;
};

void check_field(const Field2D& f) {
  if (f.values.size() != f.grid.size()) throw InvalidArgument("Field2D: shape does not match grid");
}

}  // namespace

Field2D step2d(const Field2D& state, const Regularization& reg, const FluxVector2D& fluxes,
               double dt) {
  check_field(state);
  if (!(dt > 0.0)) throw InvalidArgument("step2d: dt must be > 0");
  Integrator2D integ(state.grid, reg, fluxes);
  integ.set_state(state.values);
  integ.advance(dt);
  Field2D out{state.grid, std::vector<double>(state.grid.size()), state.time + dt};
  integ.state(out.values);
  check_state(out.values, fluxes, out.time);
  return out;
}

double select_dt2d(const Field2D& state, const FluxVector2D& fluxes, const TimeController& c) {
  std::vector<double> f(state.values.size()), df(state.values.size());
  double s = 0.0;
  for (const FluxModel* fl : {&fluxes.f1, &fluxes.f2}) {
    fl->eval(state.values, f, df);
    s = std::max(s, kernels::active().max_abs(df));
  }
  if (!std::isfinite(s)) s = std::numeric_limits<double>::infinity();
  s = std::max(s, 1e-12);
  return std::min(c.dt_max, c.cfl * std::min(state.grid.x.dx(), state.grid.y.dx()) / s);
}

Trajectory2D solve2d(const Field2D& initial, const Regularization& reg, const FluxVector2D& fluxes,
                     const TimeController& controller) {
  controller.validate();
  check_field(initial);
  check_state(initial.values, fluxes, initial.time);

  std::vector<double> targets = controller.snapshot_times;
  targets.push_back(controller.t_final);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  if (!targets.empty() && targets.front() == 0.0) targets.erase(targets.begin());

  Integrator2D integ(initial.grid, reg, fluxes);
  integ.set_state(initial.values);

  Trajectory2D traj;
  Field2D cur{initial.grid, initial.values, 0.0};
  traj.snapshots.push_back(cur);
  traj.accum.push_back({});

  // Trapezoid in time with a second-difference error estimate, as in 1D.
  constexpr int kQ = 5;  // grad x, grad y, hess xx, xy, yy
  auto sample = [&] {
    return std::array<double, kQ>{integ.grad(0), integ.grad(1), integ.hess(0), integ.hess(1),
                                  integ.hess(2)};
  };
  std::array<double, kQ> val{}, err{}, prev = sample(), pprev{};
  double dt_p = 0.0;
  bool have_prev = false;

  double t = 0.0;
  std::size_t next = 0;
  while (next < targets.size()) {
    double dt = controller.dt_fixed ? *controller.dt_fixed : select_dt2d(cur, fluxes, controller);
    const double target = targets[next];
    bool hit = false;
    if (t + dt >= target * (1.0 - 1e-14) || target - (t + dt) < 1e-12 * dt) {
      dt = target - t;
      hit = true;
    }
    if (dt > 0.0) {
      integ.advance(dt);
      t = hit ? target : t + dt;
      integ.state(cur.values);
      cur.time = t;
      check_state(cur.values, fluxes, t);
      const auto now = sample();
      for (int q = 0; q < kQ; ++q) {
        val[q] += 0.5 * dt * (prev[q] + now[q]);
        if (have_prev) {
          const double d2 = ((now[q] - prev[q]) / dt - (prev[q] - pprev[q]) / dt_p) / (0.5 * (dt + dt_p));
          err[q] += dt * dt * dt / 12.0 * std::abs(d2);
        }
      }
      pprev = prev;
      prev = now;
      dt_p = dt;
      have_prev = true;
      traj.dt_history.push_back(dt);
    }
    if (hit) {
      cur.time = target;
      traj.snapshots.push_back(cur);
      Accumulators2D a;
      a.grad = {val[0], val[1]};
      a.grad_err = {err[0], err[1]};
      a.hess = {val[2], val[3], val[4]};
      a.hess_err = {err[2], err[3], err[4]};
      traj.accum.push_back(a);
      ++next;
    }
  }
  return traj;
}

Field2D exact_linear2d(const Field2D& u0, double a1, double a2, const Regularization& reg, double t) {
  check_field(u0);
  SpectralOps2D ops(u0.grid);
  std::vector<cplx> uh(ops.modes());
  ops.forward(u0.values, uh);
  for (std::size_t k = 0; k < uh.size(); ++k) {
    const double ex = ops.kx_even()[k], ey = ops.ky_even()[k];
    const double ox = ops.kx_odd()[k], oy = ops.ky_odd()[k];
    const cplx sym(-reg.eps * (ex * ex + ey * ey),
                   -(a1 * ox + a2 * oy) - reg.delta * (ox * ox * ox + oy * oy * oy));
    uh[k] *= std::exp(sym * t);
  }
  Field2D out{u0.grid, std::vector<double>(u0.grid.size()), u0.time + t};
  ops.inverse(uh, out.values);
  return out;
}

Norms2D norms2d(const Field2D& f) {
  check_field(f);
  SpectralOps2D ops(f.grid);
  std::vector<cplx> uh(ops.modes());
  ops.forward(f.values, uh);
  const auto w = ops.parseval_weights();
  double s0 = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < uh.size(); ++k) {
    const double a = std::norm(uh[k]) * w[k];
    s0 += a;
    sx += a * ops.kx_odd()[k] * ops.kx_odd()[k];
    sy += a * ops.ky_odd()[k] * ops.ky_odd()[k];
  }
  return {std::sqrt(s0), {std::sqrt(sx), std::sqrt(sy)}};
}

MultiDReport check_theorem31(const Trajectory2D& traj, const Regularization& reg,
                             const FluxVector2D& fluxes, const Field2D& u0) {
  if (traj.snapshots.empty() || traj.accum.size() != traj.snapshots.size())
    throw InvalidArgument("check_theorem31: trajectory has no accumulators");
  constexpr double d = 2.0;
  const double eps = reg.eps;
  const Norms2D n0 = norms2d(u0);
  const std::array<double, 2> M{fluxes.f1.lipschitz_bound(), fluxes.f2.lipschitz_bound()};
  std::array<double, 2> rhs_c{};
  for (int j = 0; j < 2; ++j) rhs_c[j] = std::sqrt(d) * M[j] * n0.l2_u + eps * n0.l2_grad[j];

  MultiDReport out;
  auto add = [&](std::string label, double t, double lhs, double rhs, double budget) {
    InequalityRecord r;
    r.label = std::move(label);
    r.time = t;
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = rhs - lhs;
    r.tol = kIneqRelTol * std::abs(rhs) + budget;
    r.pass = r.slack >= -r.tol;
    out.estimates.records.push_back(r);
  };
  static constexpr const char* kAxis[2] = {"x", "y"};
  // hess index of pair (j, k)
  static constexpr int kPair[2][2] = {{0, 1}, {1, 2}};

  const double e0 = n0.l2_u * n0.l2_u;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const Field2D& s = traj.snapshots[i];
    const Accumulators2D& a = traj.accum[i];
    const Norms2D nt = norms2d(s);
    add("energy", s.time, nt.l2_u, n0.l2_u, 0.0);

    const double g = a.grad[0] + a.grad[1];
    const double ge = a.grad_err[0] + a.grad_err[1];
    const double b = std::sqrt(2.0 * eps * g);
    add("dissipation", s.time, b, n0.l2_u, std::sqrt(2.0 * eps * (g + ge)) - b);

    for (int j = 0; j < 2; ++j) {
      add(std::string("gradient[") + kAxis[j] + "]", s.time, eps * nt.l2_grad[j], rhs_c[j], 0.0);
      for (int k = 0; k < 2; ++k) {
        const int p = kPair[j][k];
        const double h = std::pow(eps, 1.5) * std::sqrt(a.hess[p]);
        const double he = std::pow(eps, 1.5) * std::sqrt(a.hess[p] + a.hess_err[p]) - h;
        add(std::string("hessian[") + kAxis[j] + kAxis[k] + "]", s.time, h, rhs_c[j], he);
      }
    }
    for (int k = 0; k < 2; ++k) {
      double hs = 0.0, hse = 0.0;
      for (int j = 0; j < 2; ++j) {
        hs += a.hess[kPair[j][k]];
        hse += a.hess_err[kPair[j][k]];
      }
      const double lhs = eps * eps * nt.l2_grad[k] * nt.l2_grad[k] + eps * eps * eps * hs;
      const double rhs = eps * eps * n0.l2_grad[k] * n0.l2_grad[k] + d * M[k] * M[k] * e0;
      add(std::string("gradient_chain[") + kAxis[k] + "]", s.time, lhs, rhs, eps * eps * eps * hse);
    }

    const double et = nt.l2_u * nt.l2_u;
    const double resid = std::abs(et + 2.0 * eps * g - e0);
    const double norm = et + 2.0 * eps * g + e0;
    if (norm > 0.0) out.identity_relative = std::max(out.identity_relative, resid / norm);
  }
  return out;
}

}  // namespace ddlab
