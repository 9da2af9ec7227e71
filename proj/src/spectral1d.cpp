#include "ddlab/spectral1d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "ddlab/error.hpp"
#include "ddlab/kernels.hpp"

namespace ddlab {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

Grid1D Grid1D::make(double x_min, double x_max, std::size_t n) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw InvalidArgument("Grid1D: requires finite x_min < x_max");
  }
  if (n < 16 || !is_pow2(n)) {
    throw InvalidArgument("Grid1D: n must be a power of two >= 16, got " + std::to_string(n));
  }
  return Grid1D{x_min, x_max, n};
}

Regularization Regularization::make(double eps, double delta) {
  if (!std::isfinite(eps) || !(eps > 0.0)) {
    throw InvalidArgument("Regularization.eps > 0 violated (eps = " + fmt(eps) + ")");
  }
  if (!std::isfinite(delta)) throw InvalidArgument("Regularization.delta must be finite");
  return Regularization{eps, delta};
}

// ---------------------------------------------------------------------------
// Initial data

InitialProfile InitialProfile::sine(double amplitude, int modes) {
  InitialProfile p;
  p.kind = Kind::sine;
  p.amplitude = amplitude;
  p.modes = modes;
  return p;
}

InitialProfile InitialProfile::constant(double c) {
  InitialProfile p;
  p.kind = Kind::constant;
  p.value = c;
  return p;
}

InitialProfile InitialProfile::riemann(double u_left, double u_right, double width) {
  InitialProfile p;
  p.kind = Kind::smoothed_riemann;
  p.u_left = u_left;
  p.u_right = u_right;
  p.width = width;
  return p;
}

InitialProfile InitialProfile::gaussian(double amplitude, double sigma) {
  InitialProfile p;
  p.kind = Kind::gaussian;
  p.amplitude = amplitude;
  p.sigma = sigma;
  return p;
}

InitialProfile InitialProfile::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("initial profile: cannot open " + path.string());
  InitialProfile p;
  p.kind = Kind::table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x = 0.0, u = 0.0;
    if (!(ls >> x >> u)) {
      if (p.table.empty() && lineno == 1) continue;  // header
      throw InvalidArgument("initial profile " + path.string() + ": bad row at line " +
                            std::to_string(lineno));
    }
    if (!p.table.empty() && !(x > p.table.back().first)) {
      throw InvalidArgument("initial profile " + path.string() +
                            ": x column must be strictly increasing");
    }
    p.table.emplace_back(x, u);
  }
  if (p.table.size() < 2) {
    throw InvalidArgument("initial profile " + path.string() + ": need at least two rows");
  }
  return p;
}

double profile_sup(const InitialProfile& p) {
  switch (p.kind) {
    case InitialProfile::Kind::constant:
      return std::abs(p.value);
    case InitialProfile::Kind::sine:
    case InitialProfile::Kind::gaussian:
      return std::abs(p.amplitude);
    case InitialProfile::Kind::smoothed_riemann:
      return std::max(std::abs(p.u_left), std::abs(p.u_right));
    case InitialProfile::Kind::table: {
      double m = 0.0;
      for (const auto& [x, u] : p.table) m = std::max(m, std::abs(u));
      return m;
    }
  }
  return 0.0;
}

Field1D sample_initial(const Grid1D& grid, const InitialProfile& p,
                       std::optional<std::pair<double, double>> range) {
  const double L = grid.length();
  const double c = p.center.value_or(0.5 * (grid.x_min + grid.x_max));
  Field1D f{grid, std::vector<double>(grid.n), 0.0};
  switch (p.kind) {
    case InitialProfile::Kind::constant:
      std::fill(f.values.begin(), f.values.end(), p.value);
      break;
    case InitialProfile::Kind::sine: {
      if (p.modes < 0) throw InvalidArgument("sine profile: modes must be >= 0");
      const double k = 2.0 * std::numbers::pi * p.modes / L;
      for (std::size_t j = 0; j < grid.n; ++j) {
        f.values[j] = p.amplitude * std::sin(k * (grid.x(j) - grid.x_min));
      }
      break;
    }
    case InitialProfile::Kind::smoothed_riemann: {
      if (!(p.width > 0.0)) throw InvalidArgument("riemann profile: width must be > 0");
      if (p.width < 4.0 * grid.dx()) {
        throw InvalidArgument("riemann profile: ramp width " + fmt(p.width) +
                              " is below 4 dx = " + fmt(4.0 * grid.dx()));
      }
      // Ramp up to u_right at c, back down to u_left at c + L/2 (periodic images).
      const double back = c + 0.5 * L;
      for (std::size_t j = 0; j < grid.n; ++j) {
        const double x = grid.x(j);
        double h = 0.0;
        for (int m = -1; m <= 1; ++m) {
          h += 0.5 * (std::tanh((x - c - m * L) / p.width) -
                      std::tanh((x - back - m * L) / p.width));
        }
        f.values[j] = p.u_left + (p.u_right - p.u_left) * h;
      }
      break;
    }
    case InitialProfile::Kind::gaussian: {
      if (!(p.sigma > 0.0)) throw InvalidArgument("gaussian profile: sigma must be > 0");
      for (std::size_t j = 0; j < grid.n; ++j) {
        double s = 0.0;
        for (int m = -1; m <= 1; ++m) {
          const double r = (grid.x(j) - c - m * L) / p.sigma;
          s += std::exp(-0.5 * r * r);
        }
        f.values[j] = p.amplitude * s;
      }
      break;
    }
    case InitialProfile::Kind::table: {
      const auto& t = p.table;
      if (t.size() < 2) throw InvalidArgument("table profile: need at least two samples");
      for (std::size_t j = 0; j < grid.n; ++j) {
        const double x = grid.x(j);
        if (x <= t.front().first) {
          f.values[j] = t.front().second;
        } else if (x >= t.back().first) {
          f.values[j] = t.back().second;
        } else {
          const auto it = std::upper_bound(t.begin(), t.end(), x,
                                           [](double v, const auto& e) { return v < e.first; });
          const auto& [x1, u1] = *it;
          const auto& [x0, u0] = *(it - 1);
          f.values[j] = u0 + (u1 - u0) * (x - x0) / (x1 - x0);
        }
      }
      break;
    }
  }
  for (double v : f.values) {
    if (!std::isfinite(v)) throw InvalidArgument("initial profile produced non-finite values");
    if (range && (v < range->first || v > range->second)) {
      throw InvalidArgument("initial profile value " + fmt(v) +
                            " lies outside the flux working range [" + fmt(range->first) +
                            ", " + fmt(range->second) + "]");
    }
  }
  return f;
}

// ---------------------------------------------------------------------------

void TimeController::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidArgument("TimeController: 0 < cfl <= 1 violated");
  if (!(dt_max > 0.0)) throw InvalidArgument("TimeController: dt_max must be > 0");
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw InvalidArgument("TimeController: t_final must be finite and >= 0");
  }
  if (dt_fixed && !(*dt_fixed > 0.0)) throw InvalidArgument("TimeController: dt_fixed must be > 0");
  for (double t : snapshot_times) {
    if (!(t >= 0.0 && t <= t_final)) {
      throw InvalidArgument("TimeController: snapshot time " + fmt(t) + " outside [0, t_final]");
    }
  }
}

std::vector<double> TimeController::uniform_times(double t_final, std::size_t n) {
  std::vector<double> t(n + 1);
  for (std::size_t i = 0; i <= n; ++i) t[i] = t_final * static_cast<double>(i) / n;
  t[n] = t_final;
  return t;
}

// ---------------------------------------------------------------------------
// Spectral operators

SpectralOps1D::SpectralOps1D(const Grid1D& grid)
    : grid_(grid),
      fft_(grid.n),
      xi_(grid.n / 2 + 1),
      xi_dealiased_(grid.n / 2 + 1),
      xi_even_(grid.n / 2 + 1),
      w0_(grid.n / 2 + 1),
      work_(grid.n / 2 + 1),
      work2_(grid.n / 2 + 1) {
  const std::size_t n = grid.n;
  const std::size_t m = n / 2 + 1;
  const double k0 = 2.0 * std::numbers::pi / grid.length();
  const double scale = grid.length() / (static_cast<double>(n) * static_cast<double>(n));
  for (std::size_t k = 0; k < m; ++k) {
    const double xi = k0 * static_cast<double>(k);
    xi_even_[k] = xi;
    xi_[k] = (k == n / 2) ? 0.0 : xi;
    xi_dealiased_[k] = (k <= n / 3) ? xi : 0.0;
    w0_[k] = ((k == 0 || k == n / 2) ? 1.0 : 2.0) * scale;
  }
}

std::vector<std::vector<double>> SpectralOps1D::derivatives(std::span<const double> u,
                                                            int max_order) {
  std::vector<std::vector<double>> out(max_order + 1, std::vector<double>(grid_.n));
  std::copy(u.begin(), u.end(), out[0].begin());
  if (max_order < 1) return out;
  fft_.forward(u, work_);
  const std::size_t m = modes();
  for (int order = 1; order <= max_order; ++order) {
    // (i xi)^order
    for (std::size_t k = 0; k < m; ++k) {
      const double xi = (order % 2 == 1) ? xi_[k] : xi_even_[k];
      const double mag = std::pow(xi, order);
      cplx f;
      switch (order % 4) {
        case 0: f = cplx(mag, 0.0); break;
        case 1: f = cplx(0.0, mag); break;
        case 2: f = cplx(-mag, 0.0); break;
        default: f = cplx(0.0, -mag); break;
      }
      work2_[k] = f * work_[k];
    }
    fft_.inverse(work2_, out[order]);
  }
  return out;
}

std::vector<double> SpectralOps1D::derivative(std::span<const double> u, int order) {
  if (order == 0) return {u.begin(), u.end()};
  return std::move(derivatives(u, order)[order]);
}

std::vector<double> SpectralOps1D::dealias(std::span<const double> u) {
  fft_.forward(u, work_);
  for (std::size_t k = grid_.n / 3 + 1; k < modes(); ++k) work_[k] = 0.0;
  std::vector<double> out(grid_.n);
  fft_.inverse(work_, out);
  return out;
}

// ---------------------------------------------------------------------------
// Integrator

Integrator1D::Integrator1D(const Grid1D& grid, const Regularization& reg, FluxModel flux)
    : ops_(grid), reg_(reg), flux_(std::move(flux)) {
  const std::size_t m = ops_.modes();
  lambda_.resize(m);
  e_half_.resize(m);
  v_.resize(m);
  k_.resize(m);
  tmp_.resize(m);
  acc_.resize(m);
  ev2_.resize(m);
  stage_.resize(m);
  phys_.resize(grid.n);
  fvals_.resize(grid.n);
  w_grad_.resize(m);
  w_hess_.resize(m);
  const auto w = ops_.parseval_weights();
  for (std::size_t k = 0; k < m; ++k) {
    const double xo = ops_.xi_odd()[k];
    const double xe = ops_.xi_even(k);
    // Nyquist carries no dispersive phase.
    lambda_[k] = cplx(-reg_.eps * xe * xe, -reg_.delta * xo * xo * xo);
    w_grad_[k] = w[k] * xo * xo;
    w_hess_[k] = w[k] * xe * xe * xe * xe;
  }
}

void Integrator1D::set_state(std::span<const double> u) { ops_.forward(u, v_); }

void Integrator1D::state(std::span<double> u) { ops_.inverse(v_, u); }

void Integrator1D::update_factors(double dt) {
  if (dt == cached_dt_) return;
  for (std::size_t k = 0; k < lambda_.size(); ++k) e_half_[k] = std::exp(0.5 * dt * lambda_[k]);
  cached_dt_ = dt;
}

// out = -i xi P FFT(f(u_T)),  u_T = IFFT(P v)
void Integrator1D::nonlinear(std::span<const cplx> v, std::span<cplx> out) {
  const std::size_t cut = ops_.dealias_cutoff();
  std::copy(v.begin(), v.end(), tmp_.begin());
  std::fill(tmp_.begin() + static_cast<std::ptrdiff_t>(cut + 1), tmp_.end(), cplx(0.0));
  ops_.inverse(tmp_, phys_);
  flux_.eval(phys_, fvals_);
  ops_.forward(fvals_, tmp_);
  kernels::active().ideriv(-1.0, ops_.xi_dealiased(), tmp_, out);
}

void Integrator1D::advance(double dt) {
  update_factors(dt);
  const auto& K = kernels::active();
  std::span<const cplx> E2 = e_half_;
  // acc_ accumulates the update, ev2_ holds E2 v, k_ each stage slope.
  std::vector<cplx>& stage = stage_;
  std::vector<cplx>& ev2 = ev2_;

  nonlinear(v_, k_);                                   // k1
  K.axpy(dt / 6.0, k_, v_, acc_);                      // acc = v + dt/6 k1
  K.axpy(0.5 * dt, k_, v_, stage);                     // v + dt/2 k1
  K.cmul(E2, stage, stage);                            // a
  K.cmul(E2, v_, ev2);                                 // E2 v

  nonlinear(stage, k_);                                // k2
  K.cmul(E2, acc_, acc_);                              // acc = E2 (v + dt/6 k1)
  K.axpy(dt / 3.0, k_, acc_, acc_);
  K.axpy(0.5 * dt, k_, ev2, stage);                    // b

  nonlinear(stage, k_);                                // k3
  K.axpy(dt / 3.0, k_, acc_, acc_);
  K.axpy(dt, k_, ev2, stage);                          // E2 v + dt k3
  K.cmul(E2, stage, stage);                            // c

  nonlinear(stage, k_);                                // k4
  K.cmul(E2, acc_, acc_);
  K.axpy(dt / 6.0, k_, acc_, v_);
}

double Integrator1D::gradsq() const { return kernels::active().weighted_sumsq(w_grad_, v_); }
double Integrator1D::hesssq() const { return kernels::active().weighted_sumsq(w_hess_, v_); }

// ---------------------------------------------------------------------------

namespace {

void check_state(std::span<const double> u, const FluxModel& flux, double t) {
  const double m = kernels::active().max_abs(u);
  if (!std::isfinite(m)) {
    throw SolverAbort("non-finite values at t = " + fmt(t) + " (blow-up)", t);
  }
  if (!flux.saturated() && m > flux.bound()) {
    throw SolverAbort("solution left the flux working range: max|u| = " + fmt(m) +
                          " > B = " + fmt(flux.bound()) + " at t = " + fmt(t),
                      t);
  }
}

double cfl_dt(std::span<const double> u, const Grid1D& grid, const FluxModel& flux,
              const TimeController& c, std::vector<double>& f, std::vector<double>& df) {
  f.resize(u.size());
  df.resize(u.size());
  flux.eval(u, f, df);
  double s = kernels::active().max_abs(df);
  if (!std::isfinite(s)) s = std::numeric_limits<double>::infinity();
  s = std::max(s, 1e-12);
  return std::min(c.dt_max, c.cfl * grid.dx() / s);
}

}  // namespace

Field1D step(const Field1D& state, const Regularization& reg, const FluxModel& flux, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("step: dt must be > 0");
  Integrator1D integ(state.grid, reg, flux);
  integ.set_state(state.values);
  integ.advance(dt);
  Field1D out{state.grid, std::vector<double>(state.grid.n), state.time + dt};
  integ.state(out.values);
  check_state(out.values, flux, out.time);
  return out;
}

double select_dt(const Field1D& state, const Regularization&, const FluxModel& flux,
                 const TimeController& controller) {
  std::vector<double> f, df;
  return cfl_dt(state.values, state.grid, flux, controller, f, df);
}

Trajectory solve(const Field1D& initial, const Regularization& reg, const FluxModel& flux,
                 const TimeController& controller) {
  controller.validate();
  if (initial.values.size() != initial.grid.n) {
    throw InvalidArgument("solve: field length does not match grid");
  }
  check_state(initial.values, flux, initial.time);

  std::vector<double> targets = controller.snapshot_times;
  targets.push_back(controller.t_final);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  if (!targets.empty() && targets.front() == 0.0) targets.erase(targets.begin());

  Integrator1D integ(initial.grid, reg, flux);
  integ.set_state(initial.values);

  Trajectory traj;
  Field1D cur{initial.grid, initial.values, 0.0};
  traj.snapshots.push_back(cur);
  traj.accum.push_back({});

  Accumulators acc;
  double g_prev = integ.gradsq();
  double h_prev = integ.hesssq();
  // Previous step for the second-difference error estimate.
  double g_pp = 0.0, h_pp = 0.0, dt_p = 0.0;
  bool have_prev = false;

  std::vector<double> fbuf, dfbuf;
  double t = 0.0;
  std::size_t next = 0;
  while (next < targets.size()) {
    double dt = controller.dt_fixed ? *controller.dt_fixed
                                    : cfl_dt(cur.values, cur.grid, flux, controller, fbuf, dfbuf);
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
      check_state(cur.values, flux, t);

      const double g = integ.gradsq();
      const double h = integ.hesssq();
      acc.gradsq += 0.5 * dt * (g_prev + g);
      acc.hesssq += 0.5 * dt * (h_prev + h);
      if (have_prev) {
        // |f''| from the divided difference over the last three samples.
        const double span = 0.5 * (dt + dt_p);
        const double g2 = ((g - g_prev) / dt - (g_prev - g_pp) / dt_p) / span;
        const double h2 = ((h - h_prev) / dt - (h_prev - h_pp) / dt_p) / span;
        acc.gradsq_err += dt * dt * dt / 12.0 * std::abs(g2);
        acc.hesssq_err += dt * dt * dt / 12.0 * std::abs(h2);
      }
      g_pp = g_prev;
      h_pp = h_prev;
      dt_p = dt;
      have_prev = true;
      g_prev = g;
      h_prev = h;
      traj.dt_history.push_back(dt);
    }
    if (hit) {
      cur.time = target;
      traj.snapshots.push_back(cur);
      traj.accum.push_back(acc);
      ++next;
    }
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Linear oracle

namespace {

std::vector<cplx> linear_symbol(const SpectralOps1D& ops, double a, const Regularization& reg) {
  std::vector<cplx> s(ops.modes());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double xo = ops.xi_odd()[k];
    const double xe = ops.xi_even(k);
    s[k] = cplx(-reg.eps * xe * xe, -a * xo - reg.delta * xo * xo * xo);
  }
  return s;
}

}  // namespace

Field1D exact_linear(const Field1D& u0, double a, const Regularization& reg, double t) {
  SpectralOps1D ops(u0.grid);
  std::vector<cplx> uh(ops.modes());
  ops.forward(u0.values, uh);
  const auto s = linear_symbol(ops, a, reg);
  for (std::size_t k = 0; k < uh.size(); ++k) uh[k] *= std::exp(s[k] * t);
  Field1D out{u0.grid, std::vector<double>(u0.grid.n), u0.time + t};
  ops.inverse(uh, out.values);
  return out;
}

Trajectory exact_linear_trajectory(const Field1D& u0, double a, const Regularization& reg,
                                   std::span<const double> times) {
  SpectralOps1D ops(u0.grid);
  std::vector<cplx> uh0(ops.modes());
  ops.forward(u0.values, uh0);
  const auto s = linear_symbol(ops, a, reg);
  const auto w = ops.parseval_weights();
  Trajectory traj;
  std::vector<cplx> uh(uh0.size());
  for (double t : times) {
    for (std::size_t k = 0; k < uh.size(); ++k) uh[k] = uh0[k] * std::exp(s[k] * t);
    Field1D f{u0.grid, std::vector<double>(u0.grid.n), t};
    ops.inverse(uh, f.values);
    Accumulators acc;
    for (std::size_t k = 0; k < uh.size(); ++k) {
      // int_0^t |uh0|^2 e^{2 Re(s) tau} dtau
      const double r = 2.0 * s[k].real();
      const double damp = (r == 0.0) ? t : std::expm1(r * t) / r;
      const double a2 = w[k] * std::norm(uh0[k]) * damp;
      const double xo = ops.xi_odd()[k];
      const double xe = ops.xi_even(k);
      acc.gradsq += a2 * xo * xo;
      acc.hesssq += a2 * xe * xe * xe * xe;
    }
    traj.snapshots.push_back(std::move(f));
    traj.accum.push_back(acc);
  }
  return traj;
}

double discrete_mean(const Field1D& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s / static_cast<double>(f.values.size());
}

double l2_norm(const Field1D& f) {
  return std::sqrt(kernels::active().sumsq(f.values) * f.grid.dx());
}

double total_variation(const Field1D& f) {
  double tv = 0.0;
  const std::size_t n = f.values.size();
  for (std::size_t k = 0; k < n; ++k) tv += std::abs(f.values[(k + 1) % n] - f.values[k]);
  return tv;
}

}  // namespace ddlab
