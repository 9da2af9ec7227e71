#pragma once
// Scalar flux models and entropy / entropy-flux pairs.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ddlab {

enum class FluxKind { linear, burgers, odd_power, cubic, custom };

struct FluxParams {
  double a = 1.0;          ///< wave speed of the linear flux
  int p = 1;               ///< exponent of odd_power: u^{2p+1}/(2p+1)
  double bound = 0.0;      ///< working-range radius B > 0
  bool saturated = false;  ///< C^1 linear extension of f outside [-B, B]
};

namespace detail {
struct CubicSpline;
}

/// Flux f with derivative, a Lipschitz bound valid on the working range
/// [-B, B], and the critical points of f (zeros of f') inside that range.
/// Immutable; cheap to copy.
class FluxModel {
 public:
  const std::string& name() const { return name_; }
  FluxKind kind() const { return kind_; }

  double eval(double u) const;
  double deriv(double u) const;
  double deriv2(double u) const;

  /// Vectorized evaluation through the active kernel table. df may be empty.
  void eval(std::span<const double> u, std::span<double> f, std::span<double> df = {}) const;

  double lipschitz_bound() const { return lipschitz_; }
  double bound() const { return bound_; }
  std::pair<double, double> working_range() const { return {-bound_, bound_}; }
  bool saturated() const { return saturated_; }
  bool contains(double u) const { return u >= -bound_ && u <= bound_; }

  /// Zeros of f' in [-B, B], ascending.
  std::span<const double> critical_points() const { return critical_; }

  /// Polynomial coefficients in increasing degree; empty for tabulated fluxes.
  std::span<const double> poly_coefficients() const { return poly_; }

 private:
  friend FluxModel make_flux(std::string_view name, const FluxParams& params);
  friend FluxModel make_custom_flux(std::vector<double> u, std::vector<double> f,
                                    double bound, bool saturated);

  double raw_eval(double u) const;
  double raw_deriv(double u) const;
  double raw_deriv2(double u) const;

  std::string name_;
  FluxKind kind_ = FluxKind::linear;
  std::vector<double> poly_;
  std::shared_ptr<const detail::CubicSpline> spline_;
  double bound_ = 1.0;
  bool saturated_ = false;
  double lipschitz_ = 0.0;
  std::vector<double> critical_;
};

/// Built-in models: linear, burgers, odd_power, cubic (f = u^3).
FluxModel make_flux(std::string_view name, const FluxParams& params);

/// Natural cubic spline through (u, f) with strictly increasing u.
FluxModel make_custom_flux(std::vector<double> u, std::vector<double> f, double bound,
                           bool saturated);

/// Two-column CSV table "u,f"; a non-numeric first line is treated as header.
FluxModel load_flux_table(const std::filesystem::path& path, double bound, bool saturated);

/// Default working-range radius for data with sup-norm max_abs_u0.
inline double default_flux_bound(double max_abs_u0) { return 2.0 * max_abs_u0 + 1.0; }

/// Antiderivative G(u) = int_0^u g, tabulated by composite Simpson on a uniform
/// grid over [lo, hi] and interpolated with cubic Hermite using the exact g at
/// the nodes. G(0) = 0 exactly.
class TabulatedIntegral {
 public:
  TabulatedIntegral() = default;
  TabulatedIntegral(std::function<double(double)> g, double lo, double hi, std::size_t nodes);

  double operator()(double u) const;
  std::size_t nodes() const { return x_.size(); }

 private:
  double integrate(double a, double b) const;

  std::function<double(double)> g_;
  std::vector<double> x_, val_, der_;
  double lo_ = 0.0, hi_ = 0.0, h_ = 0.0;
};

struct EntropySpec {
  std::string name;
  std::function<double(double)> U, dU, d2U, d3U;
  bool convex = false;
};

/// U(u) = u^2.
EntropySpec square_entropy();

/// U(u) = e^u: convex with nonzero third derivative, so every balance term is active.
EntropySpec exponential_entropy();

/// Finite-difference consistency of U, U', U'', U''' on [lo, hi]; throws
/// InvalidArgument naming the first failing derivative.
void check_entropy_spec(const EntropySpec& spec, double lo, double hi);

/// Entropy U together with its flux F, F' = U' f', F(0) = 0.
class EntropyPair {
 public:
  EntropyPair(EntropySpec spec, FluxModel flux, std::size_t quadrature_nodes);

  const EntropySpec& spec() const { return spec_; }
  const FluxModel& flux() const { return flux_; }
  std::size_t quadrature_nodes() const { return F_.nodes(); }

  double U(double u) const { return spec_.U(u); }
  double dU(double u) const { return spec_.dU(u); }
  double d2U(double u) const { return spec_.d2U(u); }
  double d3U(double u) const { return spec_.d3U(u); }
  double F(double u) const { return F_(u); }
  double dF(double u) const { return spec_.dU(u) * flux_.deriv(u); }

 private:
  EntropySpec spec_;
  FluxModel flux_;
  TabulatedIntegral F_;
};

inline constexpr std::size_t kDefaultQuadratureNodes = 4097;

EntropyPair make_entropy_pair(EntropySpec spec, const FluxModel& flux,
                              std::size_t nodes = kDefaultQuadratureNodes);

/// U(u) = -2 int_0^u (f(v) - f(0)) dv, the entropy whose cubic dissipation
/// term cancels the gradient-identity flux term.
EntropyPair special_entropy(const FluxModel& flux, std::size_t nodes = kDefaultQuadratureNodes);

}  // namespace ddlab
