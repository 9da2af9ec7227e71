#pragma once
// Periodic pseudo-spectral solver for u_t + f(u)_x = eps u_xx + delta u_xxx.
//
// The linear part is integrated exactly in Fourier space (integrating factor)
// inside a classical four-stage Runge-Kutta step; the flux derivative is
// evaluated pseudo-spectrally with the 2/3 rule.

#include <complex>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ddlab/fft.hpp"
#include "ddlab/flux.hpp"

namespace ddlab {

using cplx = std::complex<double>;

struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n = 16;

  /// Validates n >= 16, n a power of two, x_max > x_min.
  static Grid1D make(double x_min, double x_max, std::size_t n);

  double length() const { return x_max - x_min; }
  double dx() const { return length() / static_cast<double>(n); }
  double x(std::size_t k) const { return x_min + static_cast<double>(k) * dx(); }
};

struct Regularization {
  double eps = 0.0;
  double delta = 0.0;

  /// Validates eps > 0 and finiteness.
  static Regularization make(double eps, double delta);
};

struct Field1D {
  Grid1D grid;
  std::vector<double> values;
  double time = 0.0;
};

struct InitialProfile {
  enum class Kind { constant, sine, smoothed_riemann, gaussian, table };
  Kind kind = Kind::sine;
  double value = 0.0;      ///< constant
  double amplitude = 1.0;  ///< sine, gaussian
  int modes = 1;           ///< sine: number of periods across the domain
  double u_left = 1.0;     ///< smoothed_riemann
  double u_right = 0.0;
  double width = 0.1;                  ///< tanh ramp scale
  std::optional<double> center;        ///< ramp / bump center; default mid-domain
  double sigma = 0.2;                  ///< gaussian
  std::vector<std::pair<double, double>> table;  ///< (x, u) samples, linear interpolation

  static InitialProfile sine(double amplitude, int modes);
  static InitialProfile constant(double c);
  static InitialProfile riemann(double u_left, double u_right, double width);
  static InitialProfile gaussian(double amplitude, double sigma);
  static InitialProfile from_csv(const std::filesystem::path& path);
};

/// Nodal samples at t = 0. The smoothed Riemann ramp is made periodic by a
/// mirrored ramp at the domain boundary. When a working range is given, every
/// sample must lie inside it.
Field1D sample_initial(const Grid1D& grid, const InitialProfile& profile,
                       std::optional<std::pair<double, double>> working_range = {});

/// Largest |u| the profile can take (used for the default flux range).
double profile_sup(const InitialProfile& profile);

struct TimeController {
  double cfl = 0.4;
  double dt_max = 0.05;
  double t_final = 1.0;
  std::vector<double> snapshot_times;  ///< t = 0 and t_final are always recorded
  std::optional<double> dt_fixed;      ///< bypasses the CFL rule

  void validate() const;
  /// n + 1 uniform snapshot times on [0, t_final].
  static std::vector<double> uniform_times(double t_final, std::size_t n);
};

struct Accumulators {
  double gradsq = 0.0;      ///< int_0^t ||u_x||^2 dt
  double hesssq = 0.0;      ///< int_0^t ||u_xx||^2 dt
  double gradsq_err = 0.0;  ///< a posteriori trapezoid error estimate
  double hesssq_err = 0.0;
};

struct Trajectory {
  std::vector<Field1D> snapshots;      ///< time-ordered, starts at t = 0
  std::vector<Accumulators> accum;     ///< accumulator values at each snapshot
  std::vector<double> dt_history;

  const Field1D& initial() const { return snapshots.front(); }
  const Field1D& final() const { return snapshots.back(); }
};

/// Spectral workspace for one grid: transforms, wavenumbers and derivatives.
class SpectralOps1D {
 public:
  explicit SpectralOps1D(const Grid1D& grid);

  const Grid1D& grid() const { return grid_; }
  std::size_t modes() const { return xi_.size(); }
  /// Highest retained mode index under the 2/3 rule.
  std::size_t dealias_cutoff() const { return grid_.n / 3; }

  /// xi_k = 2 pi k / L; Nyquist entry zeroed (odd derivatives).
  std::span<const double> xi_odd() const { return xi_; }
  /// xi_k for modes k <= n/3, zero above.
  std::span<const double> xi_dealiased() const { return xi_dealiased_; }
  /// xi_k including the Nyquist entry (even derivatives).
  double xi_even(std::size_t k) const { return xi_even_[k]; }

  void forward(std::span<const double> u, std::span<cplx> uh) { fft_.forward(u, uh); }
  void inverse(std::span<const cplx> uh, std::span<double> u) { fft_.inverse(uh, u); }

  /// d^order u / dx^order.
  std::vector<double> derivative(std::span<const double> u, int order);
  /// Several derivatives (orders 0..max_order) from a single forward transform.
  std::vector<std::vector<double>> derivatives(std::span<const double> u, int max_order);
  /// Projection onto modes |k| <= n/3.
  std::vector<double> dealias(std::span<const double> u);

  /// Parseval weights such that sum_k w_k |uh_k|^2 = int |u|^2 dx.
  std::span<const double> parseval_weights() const { return w0_; }

 private:
  Grid1D grid_;
  RealFFT fft_;
  std::vector<double> xi_, xi_dealiased_, xi_even_, w0_;
  std::vector<cplx> work_, work2_;
};

/// One integrating-factor RK4 integrator bound to a grid, regularization and flux.
class Integrator1D {
 public:
  Integrator1D(const Grid1D& grid, const Regularization& reg, FluxModel flux);

  void set_state(std::span<const double> u);
  void state(std::span<double> u);
  std::span<const cplx> spectrum() const { return v_; }

  void advance(double dt);

  /// int u_x^2 dx and int u_xx^2 dx of the current state (Parseval).
  double gradsq() const;
  double hesssq() const;

  SpectralOps1D& ops() { return ops_; }
  const FluxModel& flux() const { return flux_; }

 private:
  void nonlinear(std::span<const cplx> v, std::span<cplx> out);
  void update_factors(double dt);

  SpectralOps1D ops_;
  Regularization reg_;
  FluxModel flux_;
  std::vector<cplx> lambda_;
  std::vector<cplx> e_half_;
  double cached_dt_ = -1.0;
  std::vector<cplx> v_, k_, tmp_, acc_, ev2_, stage_;
  std::vector<double> phys_, fvals_;
  std::vector<double> w_grad_, w_hess_;
};

/// One time step of the method of lines.
Field1D step(const Field1D& state, const Regularization& reg, const FluxModel& flux, double dt);

/// dt = min(dt_max, cfl dx / max(max |f'(u)|, 1e-12)).
double select_dt(const Field1D& state, const Regularization& reg, const FluxModel& flux,
                 const TimeController& controller);

/// Advance to t_final, recording the requested snapshots and time integrals.
/// Throws SolverAbort on non-finite values or when the state leaves the flux
/// working range.
Trajectory solve(const Field1D& initial, const Regularization& reg, const FluxModel& flux,
                 const TimeController& controller);

/// Closed-form solution for f(u) = a u: every mode multiplied by
/// exp((-i a xi - eps xi^2 - i delta xi^3) t).
Field1D exact_linear(const Field1D& u0, double a, const Regularization& reg, double t);

/// Exact-linear trajectory at the given times with closed-form time integrals.
Trajectory exact_linear_trajectory(const Field1D& u0, double a, const Regularization& reg,
                                   std::span<const double> times);

double discrete_mean(const Field1D& f);
double l2_norm(const Field1D& f);
double total_variation(const Field1D& f);

}  // namespace ddlab
