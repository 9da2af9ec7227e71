#pragma once
// Singular-limit experiments: families delta = K eps^p, distances to the
// entropy solution, and classification of the observed limit.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ddlab/estimates.hpp"
#include "ddlab/flux.hpp"
#include "ddlab/hyperbolic_ref.hpp"
#include "ddlab/spectral1d.hpp"

namespace ddlab {

using Window = std::pair<double, double>;

/// n = next power of two >= factor L / (pi eps) max(1, sqrt(delta) / eps),
/// clamped below by n_min.
struct GridRule {
  double factor = 16.0;
  std::size_t n_min = 64;
  std::size_t n_max = std::size_t{1} << 20;

  std::size_t n(double length, double eps, double delta) const;
};

enum class ReferenceKind { fan, fine_grid };

struct SweepPlan {
  std::vector<double> eps_list;  ///< strictly decreasing
  double K = 1.0;
  double p = 2.0;
  FluxModel flux;
  InitialProfile profile;
  double x_min = -4.0, x_max = 4.0;
  std::optional<double> t_eval;  ///< default: default_t_eval
  Window window{-1.0, 2.0};
  std::vector<double> q_list{1.0};
  GridRule grid_rule;
  /// Fan needs Riemann data; defaults to fan for Riemann data, else fine grid.
  std::optional<ReferenceKind> reference;
  std::size_t reference_factor = 8;
  double cfl = 0.4;
  double dt_max = 0.05;
  std::size_t snapshots = 32;       ///< snapshot intervals on [0, t_eval]
  std::optional<TestFunction> theta;  ///< Gamma pairings with U = u^2 when set
  std::size_t workers = 1;

  double delta(double eps) const;
  /// Throws InvalidArgument naming the violated precondition.
  void validate() const;
};

struct SweepRecord {
  double eps = 0.0;
  double delta = 0.0;
  std::size_t n = 0;
  bool failed = false;
  std::string failure;
  std::vector<double> distance;  ///< one per q in the plan
  std::optional<double> cauchy_increment;  ///< L1 window distance to the previous eps
  bool estimates_pass = false;
  std::vector<InequalityRecord> estimates;  ///< worst record per label
  std::optional<GammaReport> gamma;
  std::optional<Field1D> solution;  ///< state at t_eval
};

struct LimitClass {
  enum class Kind { classical, nonclassical, nonconvergent };
  Kind kind = Kind::nonconvergent;
  double final_distance = 0.0;
  std::vector<double> increments;
  /// max(0, sum of Gamma pairings) at the smallest eps, when pairings exist.
  std::optional<double> entropy_violation;
  double tol_conv = 0.0;
  double tol_dist = 0.0;
};

std::string to_string(LimitClass::Kind k);

struct SweepResult {
  double t_eval = 0.0;
  double u0_window_l1 = 0.0;  ///< ||u0||_L1(window)
  double u0_l2sq = 0.0;       ///< ||u0||^2 over the domain
  std::vector<SweepRecord> records;  ///< eps descending, as in the plan
  std::vector<RateFit> distance_slopes;  ///< per q, log distance vs log eps
  std::array<RateFit, 4> gamma_slopes{};
  std::optional<LimitClass> classification;  ///< with the default thresholds
};

/// (int_window |a - ref|^q dx)^{1/q} over nodes in the half-open window.
double lploc_distance(const Field1D& a, const ReferenceSolution& ref, double q, Window window);

/// L1 distance over the window between two fields on dyadically related grids
/// of the same domain, sampled at the coarser grid's nodes.
double window_l1_between(const Field1D& a, const Field1D& b, Window window);

/// Twice the estimated shock formation time 1/max(-(f'(u0))_x); 1 when the
/// data never steepen.
double default_t_eval(const Field1D& u0, const FluxModel& flux);

SweepResult run_sweep(const SweepPlan& plan);

/// Rule: c_last > tol_conv -> nonconvergent; else final distance < tol_dist ->
/// classical; else nonclassical. Needs at least 3 distances.
LimitClass classify(std::span<const double> distances, std::span<const double> increments,
                    double tol_conv, double tol_dist);

/// Uses the successful records, the first q of the plan, and by default
/// tol_conv = 0.02 ||u0||_L1(window), tol_dist = 0.05 ||u0||_L1(window).
LimitClass classify(const SweepResult& result, std::optional<double> tol_conv = {},
                    std::optional<double> tol_dist = {});

struct GammaBounds {
  std::array<double, 3> C{};  ///< constants for <G1,theta>, <G3,theta>, ||G4||_L1 at the largest eps
  EstimateReport report;
};

/// Rate bounds on the entropy-dissipation terms over a sweep with pairings:
/// |<G1,theta>| <= s C1 sqrt(eps), |<G3,theta>| <= s C3 sqrt(delta/eps),
/// ||G4||_L1 <= s C4 sqrt(delta)/eps with C fitted at the largest eps and
/// safety factor s; ||G2||_L1 <= ||u0||^2 / 2 and <G2,theta> <= 0.
GammaBounds check_gamma_bounds(const SweepResult& result, double safety = 1.5);

}  // namespace ddlab
