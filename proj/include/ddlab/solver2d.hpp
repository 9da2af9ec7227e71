#pragma once
// Two-dimensional periodic solver for
//   u_t + f1(u)_x + f2(u)_y = eps (u_xx + u_yy) + delta (u_xxx + u_yyy)
// and the corresponding energy / gradient estimates.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "ddlab/estimates.hpp"
#include "ddlab/fft.hpp"
#include "ddlab/flux.hpp"
#include "ddlab/spectral1d.hpp"

namespace ddlab {

struct Axis {
  double min = 0.0;
  double max = 1.0;
  std::size_t n = 16;

  double length() const { return max - min; }
  double dx() const { return length() / static_cast<double>(n); }
  double x(std::size_t k) const { return min + static_cast<double>(k) * dx(); }
};

/// Periodic in both axes. Values are row-major with x as the slow index.
struct Grid2D {
  Axis x, y;

  /// Validates n >= 16 powers of two and max > min per axis.
  static Grid2D make(Axis x, Axis y);
  std::size_t size() const { return x.n * y.n; }
  double cell_area() const { return x.dx() * y.dx(); }
};

struct Field2D {
  Grid2D grid;
  std::vector<double> values;  ///< values[i * ny + j] = u(x_i, y_j)
  double time = 0.0;

  double at(std::size_t i, std::size_t j) const { return values[i * grid.y.n + j]; }
};

struct FluxVector2D {
  FluxModel f1, f2;
};

/// Samples g(x, y) at the nodes.
template <class G>
Field2D sample2d(const Grid2D& grid, G&& g) {
  Field2D f{grid, std::vector<double>(grid.size()), 0.0};
  for (std::size_t i = 0; i < grid.x.n; ++i)
    for (std::size_t j = 0; j < grid.y.n; ++j) f.values[i * grid.y.n + j] = g(grid.x.x(i), grid.y.x(j));
  return f;
}

/// Wavenumbers and Parseval weights of the half spectrum (nx rows, ny/2 + 1 columns).
class SpectralOps2D {
 public:
  explicit SpectralOps2D(const Grid2D& grid);

  const Grid2D& grid() const { return grid_; }
  std::size_t modes() const { return kx_even_.size(); }

  /// Per-mode wavenumbers; the odd variants zero the Nyquist row/column.
  std::span<const double> kx_even() const { return kx_even_; }
  std::span<const double> ky_even() const { return ky_even_; }
  std::span<const double> kx_odd() const { return kx_odd_; }
  std::span<const double> ky_odd() const { return ky_odd_; }
  /// Odd wavenumbers restricted to the square 2/3 truncation, zero elsewhere.
  std::span<const double> kx_dealiased() const { return kx_dealiased_; }
  std::span<const double> ky_dealiased() const { return ky_dealiased_; }
  bool retained(std::size_t m) const { return retained_[m] != 0; }
  std::span<const double> parseval_weights() const { return w_; }

  void forward(std::span<const double> u, std::span<std::complex<double>> uh) { fft_.forward(u, uh); }
  void inverse(std::span<const std::complex<double>> uh, std::span<double> u) { fft_.inverse(uh, u); }

 private:
  Grid2D grid_;
  RealFFT fft_;
  std::vector<double> kx_even_, ky_even_, kx_odd_, ky_odd_, kx_dealiased_, ky_dealiased_, w_;
  std::vector<unsigned char> retained_;
};

/// Per-axis gradient and per-pair Hessian time integrals. Pair order: xx, xy, yy.
struct Accumulators2D {
  std::array<double, 2> grad{};
  std::array<double, 2> grad_err{};
  std::array<double, 3> hess{};
  std::array<double, 3> hess_err{};
};

struct Trajectory2D {
  std::vector<Field2D> snapshots;
  std::vector<Accumulators2D> accum;
  std::vector<double> dt_history;

  const Field2D& initial() const { return snapshots.front(); }
  const Field2D& final() const { return snapshots.back(); }
};

/// One integrating-factor RK4 step.
Field2D step2d(const Field2D& state, const Regularization& reg, const FluxVector2D& fluxes,
               double dt);

/// dt = min(dt_max, cfl min(dx, dy) / max_j max |f_j'(u)|).
double select_dt2d(const Field2D& state, const FluxVector2D& fluxes, const TimeController& c);

Trajectory2D solve2d(const Field2D& initial, const Regularization& reg, const FluxVector2D& fluxes,
                     const TimeController& controller);

/// Linear fluxes (a1 u, a2 u): each mode multiplied by
/// exp((-i (a1 xi1 + a2 xi2) - eps |xi|^2 - i delta (xi1^3 + xi2^3)) t).
Field2D exact_linear2d(const Field2D& u0, double a1, double a2, const Regularization& reg,
                       double t);

struct Norms2D {
  double l2_u = 0.0;
  std::array<double, 2> l2_grad{};  ///< ||u_x||, ||u_y||
};

Norms2D norms2d(const Field2D& f);

struct MultiDReport {
  EstimateReport estimates;       ///< energy, dissipation, gradient[j], hessian[jk], gradient_chain[k]
  double identity_relative = 0.0;  ///< max relative residual of the energy balance
};

/// Estimates of the d = 2 theory at every snapshot plus the energy balance
/// ||u(t)||^2 + 2 eps sum_j int_0^t ||u_{x_j}||^2 = ||u0||^2.
MultiDReport check_theorem31(const Trajectory2D& traj, const Regularization& reg,
                             const FluxVector2D& fluxes, const Field2D& u0);

}  // namespace ddlab
