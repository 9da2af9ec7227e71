#pragma once
// Traveling-wave profiles u(x - s t) of the regularized equation, used as an
// independent oracle for the end state of nonclassical shocks.
//
// Integrating -s u' + f(u)' = eps u'' + delta u''' once from u_left gives
//   eps u' + delta u'' = g(u) = f(u) - f(u_left) - s (u - u_left),
// which is shot from the saddle at u_left along its unstable manifold.

#include <optional>
#include <utility>
#include <vector>

#include "ddlab/flux.hpp"

namespace ddlab {

struct ShootOutcome {
  enum class Kind { converged, diverged, budget };
  Kind kind = Kind::budget;
  double state = 0.0;      ///< equilibrium reached (converged) or last state
  double xi_end = 0.0;     ///< profile coordinate where integration stopped
  /// Saddle equilibria of g other than u_left, with the closest approach of the orbit.
  std::vector<std::pair<double, double>> saddle_approach;
};

/// Shoot the profile for a fixed speed. The orbit leaves u_left toward the
/// search interval and is declared diverged when it leaves that interval.
ShootOutcome shoot_profile(const FluxModel& flux, double eps, double delta, double s,
                           double u_left, std::pair<double, double> search);

/// Attained right state of the profile, or none when no equilibrium is reached.
std::optional<double> traveling_wave_shoot(const FluxModel& flux, double eps, double delta,
                                           double s, double u_left,
                                           std::pair<double, double> search);

struct Connection {
  double speed = 0.0;
  double state = 0.0;  ///< saddle end state of the heteroclinic orbit
};

/// Bisect on the speed for the saddle-to-saddle connection separating
/// converging from diverging orbits. The bracket ends must give different
/// outcomes; returns none otherwise.
std::optional<Connection> find_nonclassical_connection(const FluxModel& flux, double eps,
                                                       double delta, double u_left,
                                                       std::pair<double, double> speed_bracket,
                                                       std::pair<double, double> search);

struct CalibrationStep {
  double K = 0.0;
  std::optional<Connection> connection;
  double predicted_distance = 0.0;  ///< L1 window distance, nonclassical vs Oleinik fan
  bool accepted = false;
};

struct CalibrationResult {
  std::vector<CalibrationStep> steps;
  std::optional<double> K;  ///< first accepted candidate
};

struct CalibrationPlan {
  double u_left = 1.0;
  double u_right = -1.0;
  double eps = 0.01;                        ///< profile shape only depends on delta / eps^2
  std::vector<double> K_candidates{1, 2, 4, 8, 16, 32, 64};
  std::pair<double, double> window{0.2, 3.2};
  double t = 1.0;
  double x0 = 0.0;
  double min_distance = 0.3;  ///< required predicted fan distance
};

/// For each candidate K (delta = K eps^2) shoot for a connection from u_left to
/// a state beyond the classical intermediate state; the nonclassical fan is a
/// shock to that state followed by the Oleinik fan to u_right. Accept the first
/// K whose fan differs from the classical fan by at least min_distance.
CalibrationResult calibrate_nonclassical_K(const FluxModel& flux, const CalibrationPlan& plan);

}  // namespace ddlab
