#include "ddlab/flux.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ddlab/error.hpp"
#include "ddlab/kernels.hpp"

namespace ddlab {

namespace detail {

struct CubicSpline {
  std::vector<double> x, y, m;  // knots, values, second derivatives (natural)

  CubicSpline(std::vector<double> xs, std::vector<double> ys) : x(std::move(xs)), y(std::move(ys)) {
    const std::size_t n = x.size();
    m.assign(n, 0.0);
    if (n < 3) return;
    // Thomas algorithm on the interior second derivatives.
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x[i] - x[i - 1];
      const double h1 = x[i + 1] - x[i];
      const double rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
      const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
      c[i] = h1 / diag;
      d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m[i] = d[i] - c[i] * m[i + 1];
    }
  }

  std::size_t interval(double u) const {
    auto it = std::upper_bound(x.begin(), x.end(), u);
    std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    return std::min(i, x.size() - 2);
  }

  double slope(std::size_t i) const {
    const double h = x[i + 1] - x[i];
    return (y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
  }

  double end_slope_right() const {
    const std::size_t i = x.size() - 2;
    const double h = x[i + 1] - x[i];
    return slope(i) + m[i] * h + (m[i + 1] - m[i]) * h / 2.0;
  }

  double eval(double u) const {
    if (u < x.front()) return y.front() + slope(0) * (u - x.front());
    if (u > x.back()) return y.back() + end_slope_right() * (u - x.back());
    const std::size_t i = interval(u);
    const double h = x[i + 1] - x[i];
    const double t = u - x[i];
    return y[i] + t * (slope(i) + t * (m[i] / 2.0 + t * (m[i + 1] - m[i]) / (6.0 * h)));
  }

  double deriv(double u) const {
    if (u < x.front()) return slope(0);
    if (u > x.back()) return end_slope_right();
    const std::size_t i = interval(u);
    const double h = x[i + 1] - x[i];
    const double t = u - x[i];
    return slope(i) + t * (m[i] + t * (m[i + 1] - m[i]) / (2.0 * h));
  }

  double deriv2(double u) const {
    if (u < x.front() || u > x.back()) return 0.0;
    const std::size_t i = interval(u);
    const double h = x[i + 1] - x[i];
    return m[i] + (m[i + 1] - m[i]) * (u - x[i]) / h;
  }
};

}  // namespace detail

double FluxModel::raw_eval(double u) const {
  if (spline_) return spline_->eval(u);
  double p = 0.0;
  for (std::size_t m = poly_.size(); m-- > 0;) p = p * u + poly_[m];
  return p;
}

double FluxModel::raw_deriv(double u) const {
  if (spline_) return spline_->deriv(u);
  double p = 0.0;
  for (std::size_t m = poly_.size(); m-- > 1;) p = p * u + static_cast<double>(m) * poly_[m];
  return p;
}

double FluxModel::raw_deriv2(double u) const {
  if (spline_) return spline_->deriv2(u);
  double p = 0.0;
  for (std::size_t m = poly_.size(); m-- > 2;) {
    p = p * u + static_cast<double>(m * (m - 1)) * poly_[m];
  }
  return p;
}

double FluxModel::eval(double u) const {
  if (!saturated_) return raw_eval(u);
  const double c = std::clamp(u, -bound_, bound_);
  return raw_eval(c) + raw_deriv(c) * (u - c);
}

double FluxModel::deriv(double u) const {
  if (!saturated_) return raw_deriv(u);
  return raw_deriv(std::clamp(u, -bound_, bound_));
}

double FluxModel::deriv2(double u) const {
  if (saturated_ && (u < -bound_ || u > bound_)) return 0.0;
  return raw_deriv2(u);
}

void FluxModel::eval(std::span<const double> u, std::span<double> f, std::span<double> df) const {
  if (!poly_.empty()) {
    const double b = saturated_ ? bound_ : std::numeric_limits<double>::infinity();
    kernels::active().poly_flux(poly_, b, u, f, df);
    return;
  }
  for (std::size_t k = 0; k < u.size(); ++k) {
    f[k] = eval(u[k]);
    if (!df.empty()) df[k] = deriv(u[k]);
  }
}

FluxModel make_flux(std::string_view name, const FluxParams& params) {
  if (!(params.bound > 0.0)) {
    throw InvalidArgument("make_flux: working-range radius B must be > 0");
  }
  FluxModel m;
  m.name_ = std::string(name);
  m.bound_ = params.bound;
  m.saturated_ = params.saturated;
  const double B = params.bound;
  if (name == "linear") {
    m.kind_ = FluxKind::linear;
    m.poly_ = {0.0, params.a};
    m.lipschitz_ = std::abs(params.a);
  } else if (name == "burgers") {
    m.kind_ = FluxKind::burgers;
    m.poly_ = {0.0, 0.0, 0.5};
    m.lipschitz_ = B;
    m.critical_ = {0.0};
  } else if (name == "odd_power") {
    if (params.p < 1) throw InvalidArgument("make_flux: odd_power requires p >= 1");
    const int deg = 2 * params.p + 1;
    m.kind_ = FluxKind::odd_power;
    m.poly_.assign(static_cast<std::size_t>(deg) + 1, 0.0);
    m.poly_[static_cast<std::size_t>(deg)] = 1.0 / deg;
    m.lipschitz_ = std::pow(B, 2 * params.p);
    m.critical_ = {0.0};
  } else if (name == "cubic") {
    m.kind_ = FluxKind::cubic;
    m.poly_ = {0.0, 0.0, 0.0, 1.0};
    m.lipschitz_ = 3.0 * B * B;
    m.critical_ = {0.0};
  } else {
    throw InvalidArgument("make_flux: unknown flux '" + std::string(name) + "'");
  }
  return m;
}

FluxModel make_custom_flux(std::vector<double> u, std::vector<double> f, double bound,
                           bool saturated) {
  if (!(bound > 0.0)) throw InvalidArgument("make_custom_flux: B must be > 0");
  if (u.size() != f.size() || u.size() < 2) {
    throw InvalidArgument("make_custom_flux: need at least two (u, f) pairs");
  }
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (!(u[i] > u[i - 1])) {
      throw InvalidArgument("make_custom_flux: u must be strictly increasing");
    }
  }
  FluxModel m;
  m.name_ = "custom";
  m.kind_ = FluxKind::custom;
  m.bound_ = bound;
  m.saturated_ = saturated;
  auto spline = std::make_shared<detail::CubicSpline>(std::move(u), std::move(f));

  // f' is quadratic on each spline interval, so its extrema and zeros are exact.
  const auto& s = *spline;
  double lip = 0.0;
  auto consider = [&](double v) { lip = std::max(lip, std::abs(s.deriv(v))); };
  consider(-bound);
  consider(bound);
  for (std::size_t i = 0; i + 1 < s.x.size(); ++i) {
    const double a = std::max(s.x[i], -bound);
    const double b = std::min(s.x[i + 1], bound);
    if (a > b) continue;
    const double h = s.x[i + 1] - s.x[i];
    const double qa = (s.m[i + 1] - s.m[i]) / (2.0 * h);
    const double qb = s.m[i];
    const double qc = s.slope(i);
    consider(a);
    consider(b);
    if (qa != 0.0) {
      const double tv = -qb / (2.0 * qa) + s.x[i];
      if (tv > a && tv < b) consider(tv);
    }
    std::vector<double> roots;
    if (qa == 0.0) {
      if (qb != 0.0) roots.push_back(-qc / qb);
    } else {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (qb + std::copysign(sq, qb));
        if (q != 0.0) roots.push_back(q / qa);
        if (q != 0.0) roots.push_back(qc / q);
      }
    }
    for (double t : roots) {
      const double v = s.x[i] + t;
      if (v >= a && v <= b) m.critical_.push_back(v);
    }
  }
  std::sort(m.critical_.begin(), m.critical_.end());
  m.critical_.erase(std::unique(m.critical_.begin(), m.critical_.end()), m.critical_.end());
  m.lipschitz_ = lip;
  m.spline_ = std::move(spline);
  return m;
}

FluxModel load_flux_table(const std::filesystem::path& path, double bound, bool saturated) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("load_flux_table: cannot open " + path.string());
  std::vector<double> us, fs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double u = 0.0, f = 0.0;
    if (!(ls >> u >> f)) {
      if (first) {
        first = false;
        continue;
      }
      throw InvalidArgument("load_flux_table: malformed row '" + line + "'");
    }
    first = false;
    us.push_back(u);
    fs.push_back(f);
  }
  return make_custom_flux(std::move(us), std::move(fs), bound, saturated);
}

// ---------------------------------------------------------------------------

TabulatedIntegral::TabulatedIntegral(std::function<double(double)> g, double lo, double hi,
                                     std::size_t nodes)
    : g_(std::move(g)), lo_(lo), hi_(hi) {
  if (nodes < 3) throw InvalidArgument("TabulatedIntegral: need >= 3 nodes");
  if (!(lo <= 0.0 && 0.0 <= hi && lo < hi)) {
    throw InvalidArgument("TabulatedIntegral: range must contain 0");
  }
  const std::size_t n = nodes;
  h_ = (hi - lo) / static_cast<double>(n - 1);
  x_.resize(n);
  val_.assign(n, 0.0);
  der_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    x_[j] = lo + (hi - lo) * (static_cast<double>(j) / static_cast<double>(n - 1));
    der_[j] = g_(x_[j]);
  }
  // Anchor at the node closest to 0 and sweep outwards with per-interval Simpson.
  std::size_t j0 = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (std::abs(x_[j]) < std::abs(x_[j0])) j0 = j;
  }
  val_[j0] = x_[j0] == 0.0 ? 0.0 : integrate(0.0, x_[j0]);
  auto simpson = [&](std::size_t a, std::size_t b) {
    const double mid = 0.5 * (x_[a] + x_[b]);
    return (x_[b] - x_[a]) / 6.0 * (der_[a] + 4.0 * g_(mid) + der_[b]);
  };
  for (std::size_t j = j0 + 1; j < n; ++j) val_[j] = val_[j - 1] + simpson(j - 1, j);
  for (std::size_t j = j0; j-- > 0;) val_[j] = val_[j + 1] - simpson(j, j + 1);
}

double TabulatedIntegral::integrate(double a, double b) const {
  constexpr int panels = 64;
  const double h = (b - a) / panels;
  double acc = g_(a) + g_(b);
  for (int i = 1; i < panels; ++i) acc += g_(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double TabulatedIntegral::operator()(double u) const {
  if (u == 0.0) return 0.0;
  if (u < lo_) return val_.front() - integrate(u, lo_);
  if (u > hi_) return val_.back() + integrate(hi_, u);
  std::size_t j = static_cast<std::size_t>((u - lo_) / h_);
  j = std::min(j, x_.size() - 2);
  const double t = (u - x_[j]) / h_;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * val_[j] + h10 * h_ * der_[j] + h01 * val_[j + 1] + h11 * h_ * der_[j + 1];
}

// ---------------------------------------------------------------------------

EntropySpec square_entropy() {
  return {"square", [](double u) { return u * u; }, [](double u) { return 2.0 * u; },
          [](double) { return 2.0; }, [](double) { return 0.0; }, true};
}

EntropySpec exponential_entropy() {
  auto e = [](double u) { return std::exp(u); };
  return {"exponential", e, e, e, e, true};
}

void check_entropy_spec(const EntropySpec& spec, double lo, double hi) {
  if (!spec.U || !spec.dU || !spec.d2U || !spec.d3U) {
    throw InvalidArgument("entropy '" + spec.name + "': missing derivative");
  }
  const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
  const double h = 1e-4 * scale;
  constexpr int samples = 257;
  struct Level {
    const std::function<double(double)>* f;
    const std::function<double(double)>* df;
    const char* label;
  };
  const Level levels[] = {{&spec.U, &spec.dU, "U'"},
                          {&spec.dU, &spec.d2U, "U''"},
                          {&spec.d2U, &spec.d3U, "U'''"}};
  for (const auto& lv : levels) {
    double worst = 0.0, mag = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double u = lo + (hi - lo) * i / (samples - 1.0);
      const double fd = ((*lv.f)(u + h) - (*lv.f)(u - h)) / (2.0 * h);
      const double ex = (*lv.df)(u);
      worst = std::max(worst, std::abs(fd - ex));
      mag = std::max(mag, std::abs(ex));
    }
    if (worst > 1e-5 * std::max(mag, 1.0)) {
      throw InvalidArgument("entropy '" + spec.name + "': " + lv.label +
                            " inconsistent with finite differences");
    }
  }
  if (spec.convex) {
    for (int i = 0; i < samples; ++i) {
      const double u = lo + (hi - lo) * i / (samples - 1.0);
      if (spec.d2U(u) < 0.0) {
        throw InvalidArgument("entropy '" + spec.name + "': declared convex but U'' < 0");
      }
    }
  }
}

EntropyPair::EntropyPair(EntropySpec spec, FluxModel flux, std::size_t quadrature_nodes)
    : spec_(std::move(spec)), flux_(std::move(flux)) {
  const auto [lo, hi] = flux_.working_range();
  auto dU = spec_.dU;
  const FluxModel f = flux_;
  F_ = TabulatedIntegral([dU, f](double u) { return dU(u) * f.deriv(u); }, lo, hi,
                         quadrature_nodes);
}

EntropyPair make_entropy_pair(EntropySpec spec, const FluxModel& flux, std::size_t nodes) {
  const auto [lo, hi] = flux.working_range();
  check_entropy_spec(spec, lo, hi);
  return EntropyPair(std::move(spec), flux, nodes);
}

EntropyPair special_entropy(const FluxModel& flux, std::size_t nodes) {
  const double f0 = flux.eval(0.0);
  const auto [lo, hi] = flux.working_range();
  auto dU = [flux, f0](double u) { return -2.0 * (flux.eval(u) - f0); };
  auto U = std::make_shared<TabulatedIntegral>(dU, lo, hi, nodes);
  EntropySpec spec;
  spec.name = "special";
  spec.U = [U](double u) { return (*U)(u); };
  spec.dU = dU;
  spec.d2U = [flux](double u) { return -2.0 * flux.deriv(u); };
  spec.d3U = [flux](double u) { return -2.0 * flux.deriv2(u); };
  spec.convex = false;
  return EntropyPair(std::move(spec), flux, nodes);
}

}  // namespace ddlab
