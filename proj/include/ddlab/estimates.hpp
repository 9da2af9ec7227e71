#pragma once
// A priori estimates, balance identities and the entropy-dissipation
// decomposition for the regularized scalar equation.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ddlab/flux.hpp"
#include "ddlab/spectral1d.hpp"

namespace ddlab {

struct Norms {
  double l2_u = 0.0;
  double l2_ux = 0.0;
  double l2_uxx = 0.0;
};

/// L2 norms of u, u_x, u_xx (spectral derivatives, periodic trapezoid rule).
Norms norms(const Field1D& field);

struct InequalityRecord {
  std::string label;
  double time = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  ///< rhs - lhs
  double tol = 0.0;    ///< admissible negative slack
  bool pass = true;    ///< slack >= -tol
};

struct EstimateReport {
  std::vector<InequalityRecord> records;

  bool all_pass() const;
  /// Record with the smallest slack + tol for a label (throws if absent).
  const InequalityRecord& worst(const std::string& label) const;
  /// One worst record per label, in first-seen label order.
  std::vector<InequalityRecord> summary() const;
};

/// Relative tolerance applied to every right-hand side.
inline constexpr double kIneqRelTol = 1e-6;

/// Evaluate the four energy / gradient estimates at every snapshot, labelled
/// energy, dissipation, dispersive_gradient and dispersive_hessian. The time
/// integrals use the L2-in-time reading sqrt(int_0^t ||.||^2 dt). Estimates
/// involving sqrt(delta) are reported as 0 <= rhs when delta <= 0.
EstimateReport check_theorem21(const Trajectory& traj, const Regularization& reg,
                               const FluxModel& flux, const Field1D& u0);

struct BalanceResiduals {
  double entropy_residual = 0.0;   ///< general entropy identity, chosen pair
  double energy_residual = 0.0;    ///< U = u^2
  double gradient_residual = 0.0;  ///< gradient identity
  double entropy_norm = 0.0;       ///< sum of |terms| of each identity
  double energy_norm = 0.0;
  double gradient_norm = 0.0;
  /// Max relative mismatch of the instantaneous entropy rate over snapshot intervals.
  double rate_residual = 0.0;

  double entropy_relative() const { return entropy_residual / entropy_norm; }
  double energy_relative() const { return energy_residual / energy_norm; }
  double gradient_relative() const { return gradient_residual / gradient_norm; }
};

/// Residuals of the integrated balance identities, with all time integrals
/// taken by the trapezoid rule over the stored snapshots (at least 33).
BalanceResiduals balance_residuals(const Trajectory& traj, const Regularization& reg,
                                   const FluxModel& flux, const EntropyPair& pair);

struct GammaFields {
  std::vector<double> g1, g2, g3, g4;
};

/// G1 = eps (U' u_x)_x, G2 = -eps U'' u_x^2, G3 = delta (U' u_xx)_x,
/// G4 = -delta U'' u_x u_xx.
GammaFields gamma_fields(const Field1D& state, const Regularization& reg, const EntropyPair& pair);

/// U'(u) (eps u_xx + delta u_xxx), the right-hand side the four fields sum to.
std::vector<double> gamma_total(const Field1D& state, const Regularization& reg,
                                const EntropyPair& pair);

/// theta(x, t) = b((x - xc)/wx) b((t - tc)/wt), b(r) = exp(1 - 1/(1 - r^2)) on |r| < 1.
struct TestFunction {
  double xc = 0.0, tc = 0.5;
  double wx = 1.0, wt = 0.5;

  static double bump(double r);
  static double dbump(double r);

  double operator()(double x, double t) const;
  double dx(double x, double t) const;
  bool in_support(double x, double t) const;
};

struct GammaReport {
  TestFunction theta;
  double eps = 0.0;
  double delta = 0.0;
  std::array<double, 4> pairings{};  ///< <G_i, theta>; G1 and G3 in integrated-by-parts form
  double gamma1_direct = 0.0;        ///< <G1, theta> from the divergence form
  double l1_gamma2 = 0.0;            ///< over the support box of theta
  double l1_gamma4 = 0.0;
};

/// Space-time pairings with theta. Throws InvalidArgument when the support
/// box of theta is not inside the computed domain and time span.
GammaReport gamma_pairings(const Trajectory& traj, const Regularization& reg,
                           const EntropyPair& pair, const TestFunction& theta);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< root-mean-square log residual
  bool defined = false;   ///< false when some |value| < 1e-14
};

/// Least-squares fit of log|value| against log eps. Needs >= 3 values
/// spanning a factor >= 4 in eps.
RateFit gamma_rate_fit(std::span<const double> eps, std::span<const double> values);

}  // namespace ddlab
