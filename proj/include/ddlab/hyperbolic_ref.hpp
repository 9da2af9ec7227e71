#pragma once
// Entropy solutions of the limit problem u_t + f(u)_x = 0: exact Riemann fans
// and a first-order Godunov scheme.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ddlab/flux.hpp"
#include "ddlab/spectral1d.hpp"

namespace ddlab {

struct RiemannProblem {
  double u_left = 0.0;
  double u_right = 0.0;
  FluxModel flux;
};

struct Wave {
  enum class Kind { shock, rarefaction };
  Kind kind = Kind::shock;
  double u_left = 0.0;
  double u_right = 0.0;
  double speed_left = 0.0;   ///< equal to speed_right for a shock
  double speed_right = 0.0;
};

/// Self-similar Riemann solution u(x/t), waves ordered left to right.
class WaveFan {
 public:
  WaveFan() = default;
  WaveFan(double u_left, double u_right, FluxModel flux, std::vector<Wave> waves);

  double u_left() const { return u_left_; }
  double u_right() const { return u_right_; }
  const std::vector<Wave>& waves() const { return waves_; }
  const FluxModel& flux() const { return flux_; }

  /// u at xi = x/t; right-continuous across shocks.
  double operator()(double xi) const;

  struct Check {
    double rh_residual = 0.0;      ///< max |s - [f]/[u]| over shocks
    double chord_violation = 0.0;  ///< max violation of the Oleinik chord condition
    bool speeds_ordered = true;
    bool ok(double rh_tol = 1e-10, double chord_tol = 1e-9) const {
      return speeds_ordered && rh_residual <= rh_tol && chord_violation <= chord_tol;
    }
  };
  /// Rankine-Hugoniot, speed ordering, and the chord condition sampled at
  /// `samples` interior points per shock.
  Check check(std::size_t samples = 1024) const;

  std::string to_json() const;

 private:
  double u_left_ = 0.0, u_right_ = 0.0;
  FluxModel flux_;
  std::vector<Wave> waves_;
};

/// Exact solution for a flux with f'' > 0 on the state interval.
/// Throws InvalidArgument when f is not strictly convex there.
double riemann_convex(const RiemannProblem& prob, double xi);

inline constexpr std::size_t kDefaultEnvelopePoints = 16385;

/// Lower convex (u_L < u_R) or upper concave (u_L > u_R) envelope construction.
/// Chord endpoints at tangency points are refined by bisection.
WaveFan oleinik_fan(const RiemannProblem& prob, std::size_t state_points = kDefaultEnvelopePoints);

/// First-order Godunov scheme with the exact scalar numerical flux, periodic.
/// Node values are interpreted as cell averages. Requires 0 < cfl <= 0.5.
Field1D godunov_solve(const Field1D& u0, const FluxModel& flux, double t_final,
                      double cfl = 0.45);

/// Cell averages of a periodic Riemann step: u_left on [x0 - L/2, x0), u_right
/// on [x0, x0 + L/2), extended periodically.
Field1D riemann_step(const Grid1D& grid, double u_left, double u_right,
                     std::optional<double> x0 = {});

/// Reference entropy solution on a grid: a fan evaluated at nodes, or a
/// fine-grid Godunov field averaged conservatively onto coarse cells.
class ReferenceSolution {
 public:
  enum class Kind { fan, fine_grid };

  static ReferenceSolution self_similar(WaveFan fan, double x0, double t);
  /// The fine grid must refine the target grid by an even integer factor.
  static ReferenceSolution fine_grid(Field1D fine);

  Kind kind() const { return kind_; }
  /// Fan: nodal values. Fine grid: averages over the coarse cells.
  std::vector<double> on_grid(const Grid1D& grid) const;
  std::size_t resolution() const { return fine_ ? fine_->grid.n : 0; }
  const WaveFan* fan() const { return fan_ ? &*fan_ : nullptr; }
  double time() const { return t_; }

 private:
  Kind kind_ = Kind::fan;
  std::optional<WaveFan> fan_;
  std::optional<Field1D> fine_;
  double x0_ = 0.0, t_ = 0.0;
};

}  // namespace ddlab
