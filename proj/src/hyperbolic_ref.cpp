#include "ddlab/hyperbolic_ref.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "ddlab/error.hpp"
#include "ddlab/kernels.hpp"

namespace ddlab {

namespace {

// Solve f'(u) = xi for u between a and b, assuming f' monotone there.
double invert_speed(const FluxModel& f, double a, double b, double xi) {
  // Quadratic fluxes have a linear f' and invert exactly.
  const auto c = f.poly_coefficients();
  if (c.size() == 3 && c[2] != 0.0) {
    const double u = (xi - c[1]) / (2.0 * c[2]);
    if (u >= std::min(a, b) && u <= std::max(a, b) && f.contains(u)) return u;
  }
  // Otherwise bisect until the bracket cannot shrink further.
  double lo = a, hi = b;
  const bool rising = f.deriv(b) >= f.deriv(a);
  for (int it = 0; it < 2100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const bool below = f.deriv(mid) < xi;
    if (below == rising) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double chord_speed(const FluxModel& f, double a, double b) {
  return (f.eval(b) - f.eval(a)) / (b - a);
}

}  // namespace

WaveFan::WaveFan(double u_left, double u_right, FluxModel flux, std::vector<Wave> waves)
    : u_left_(u_left), u_right_(u_right), flux_(std::move(flux)), waves_(std::move(waves)) {}

double WaveFan::operator()(double xi) const {
  double cur = u_left_;
  for (const Wave& w : waves_) {
    if (xi < w.speed_left) return cur;
    if (w.kind == Wave::Kind::rarefaction && xi < w.speed_right) {
      return invert_speed(flux_, w.u_left, w.u_right, xi);
    }
    cur = w.u_right;
  }
  return cur;
}

WaveFan::Check WaveFan::check(std::size_t samples) const {
  Check c;
  double prev = -std::numeric_limits<double>::infinity();
  for (const Wave& w : waves_) {
    if (w.speed_left < prev - 1e-12 || w.speed_right < w.speed_left - 1e-12) {
      c.speeds_ordered = false;
    }
    prev = w.speed_right;
    if (w.kind != Wave::Kind::shock) continue;
    const double s = w.speed_left;
    c.rh_residual = std::max(c.rh_residual, std::abs(s - chord_speed(flux_, w.u_left, w.u_right)));
    const double fl = flux_.eval(w.u_left);
    for (std::size_t k = 1; k <= samples; ++k) {
      const double u = w.u_left + (w.u_right - w.u_left) * static_cast<double>(k) /
                                      static_cast<double>(samples + 1);
      const double gap = flux_.eval(u) - (fl + s * (u - w.u_left));
      // increasing jumps need f above the chord, decreasing ones below
      const double v = (w.u_left < w.u_right) ? -gap : gap;
      c.chord_violation = std::max(c.chord_violation, v);
    }
  }
  return c;
}

std::string WaveFan::to_json() const {
  nlohmann::ordered_json j;
  j["flux"] = flux_.name();
  j["u_left"] = u_left_;
  j["u_right"] = u_right_;
  j["waves"] = nlohmann::ordered_json::array();
  for (const Wave& w : waves_) {
    nlohmann::ordered_json o;
    o["kind"] = w.kind == Wave::Kind::shock ? "shock" : "rarefaction";
    o["u_left"] = w.u_left;
    o["u_right"] = w.u_right;
    if (w.kind == Wave::Kind::shock) {
      o["speed"] = w.speed_left;
    } else {
      o["speed_left"] = w.speed_left;
      o["speed_right"] = w.speed_right;
    }
    j["waves"].push_back(std::move(o));
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------

double riemann_convex(const RiemannProblem& p, double xi) {
  const double a = std::min(p.u_left, p.u_right);
  const double b = std::max(p.u_left, p.u_right);
  if (a == b) return p.u_left;
  constexpr int samples = 1025;
  for (int k = 0; k < samples; ++k) {
    const double u = a + (b - a) * k / (samples - 1.0);
    if (!(p.flux.deriv2(u) > 0.0)) {
      throw InvalidArgument("riemann_convex: flux '" + p.flux.name() +
                            "' is not strictly convex on the state interval");
    }
  }
  if (p.u_left > p.u_right) {
    const double s = chord_speed(p.flux, p.u_left, p.u_right);
    return xi < s ? p.u_left : p.u_right;
  }
  const double sl = p.flux.deriv(p.u_left);
  const double sr = p.flux.deriv(p.u_right);
  if (xi <= sl) return p.u_left;
  if (xi >= sr) return p.u_right;
  return invert_speed(p.flux, p.u_left, p.u_right, xi);
}

// ---------------------------------------------------------------------------

namespace {

struct Piece {
  bool chord;
  double a, b;  // ascending state interval
};

// Lower convex hull of (u_i, sign f(u_i)) on an ascending uniform grid; returns
// the pieces in ascending order.
std::vector<Piece> lower_envelope(const FluxModel& f, double sign, double a, double b,
                                  std::size_t n) {
  std::vector<double> u(n), g(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = (i + 1 == n) ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    g[i] = sign * f.eval(u[i]);
  }
  std::vector<std::size_t> h;
  for (std::size_t i = 0; i < n; ++i) {
    while (h.size() >= 2) {
      const std::size_t o = h[h.size() - 2], p = h.back();
      const double cross = (u[p] - u[o]) * (g[i] - g[o]) - (g[p] - g[o]) * (u[i] - u[o]);
      if (cross > 0.0) break;
      h.pop_back();
    }
    h.push_back(i);
  }
  std::vector<Piece> out;
  for (std::size_t k = 0; k + 1 < h.size(); ++k) {
    // A gap of one or two nodes is the curve itself up to rounding.
    const bool chord = h[k + 1] - h[k] > 2;
    if (!out.empty() && !out.back().chord && !chord) {
      out.back().b = u[h[k + 1]];
    } else {
      out.push_back({chord, u[h[k]], u[h[k + 1]]});
    }
  }
  return out;
}

// Move the tangency end of a chord so that f'(T)(T - A) = f(T) - f(A).
double refine_tangent(const FluxModel& f, double A, double T, double h, double lo, double hi) {
  auto phi = [&](double x) { return f.deriv(x) * (x - A) - (f.eval(x) - f.eval(A)); };
  double l = std::max(lo, T - 2.0 * h), r = std::min(hi, T + 2.0 * h);
  double pl = phi(l), pr = phi(r);
  if (pl == 0.0) return l;
  if (pr == 0.0) return r;
  if ((pl > 0.0) == (pr > 0.0)) return T;
  for (int it = 0; it < 200 && r - l > 1e-16 * std::max(1.0, std::abs(l)); ++it) {
    const double m = 0.5 * (l + r);
    const double pm = phi(m);
    if ((pm > 0.0) == (pl > 0.0)) {
      l = m;
      pl = pm;
    } else {
      r = m;
    }
  }
  return 0.5 * (l + r);
}

}  // namespace

WaveFan oleinik_fan(const RiemannProblem& p, std::size_t npts) {
  if (npts < 3) throw InvalidArgument("oleinik_fan: need at least 3 state points");
  if (p.u_left == p.u_right) return WaveFan(p.u_left, p.u_right, p.flux, {});
  const bool rising = p.u_left < p.u_right;
  const double a = std::min(p.u_left, p.u_right);
  const double b = std::max(p.u_left, p.u_right);
  const double h = (b - a) / static_cast<double>(npts - 1);
  std::vector<Piece> pieces = lower_envelope(p.flux, rising ? 1.0 : -1.0, a, b, npts);

  // Tangency refinement; alternate when both chord ends touch the curve.
  for (int sweep = 0; sweep < 8; ++sweep) {
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      if (!pieces[k].chord) continue;
      const bool left_tangent = k > 0;
      const bool right_tangent = k + 1 < pieces.size();
      if (right_tangent) {
        const double t = refine_tangent(p.flux, pieces[k].a, pieces[k].b, h, pieces[k].a + h, b);
        pieces[k].b = t;
        pieces[k + 1].a = t;
      }
      if (left_tangent) {
        const double t = refine_tangent(p.flux, pieces[k].b, pieces[k].a, h, a, pieces[k].b - h);
        pieces[k].a = t;
        pieces[k - 1].b = t;
      }
    }
  }

  std::vector<Wave> waves;
  auto make_wave = [&](const Piece& pc, double from, double to) {
    Wave w;
    w.u_left = from;
    w.u_right = to;
    if (pc.chord) {
      w.kind = Wave::Kind::shock;
      w.speed_left = w.speed_right = chord_speed(p.flux, from, to);
    } else {
      w.kind = Wave::Kind::rarefaction;
      w.speed_left = p.flux.deriv(from);
      w.speed_right = p.flux.deriv(to);
    }
    return w;
  };
  if (rising) {
    for (const Piece& pc : pieces) waves.push_back(make_wave(pc, pc.a, pc.b));
  } else {
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
      waves.push_back(make_wave(*it, it->b, it->a));
    }
  }
  waves.front().u_left = p.u_left;
  waves.back().u_right = p.u_right;
  return WaveFan(p.u_left, p.u_right, p.flux, std::move(waves));
}

// ---------------------------------------------------------------------------

Field1D riemann_step(const Grid1D& grid, double u_left, double u_right, std::optional<double> x0) {
  const double L = grid.length();
  const double c = x0.value_or(0.5 * (grid.x_min + grid.x_max));
  const double dx = grid.dx();
  Field1D f{grid, std::vector<double>(grid.n), 0.0};
  // Fraction of [x - dx/2, x + dx/2] inside the u_right half-period [c, c + L/2).
  auto frac_right = [&](double x) {
    double s = 0.0;
    for (int m = -1; m <= 1; ++m) {
      const double lo = c + m * L, hi = c + 0.5 * L + m * L;
      s += std::max(0.0, std::min(hi, x + 0.5 * dx) - std::max(lo, x - 0.5 * dx));
    }
    return s / dx;
  };
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double w = frac_right(grid.x(j));
    f.values[j] = u_left + (u_right - u_left) * w;
  }
  return f;
}

Field1D godunov_solve(const Field1D& u0, const FluxModel& flux, double t_final, double cfl) {
  if (!(cfl > 0.0 && cfl <= 0.5)) {
    throw InvalidArgument("godunov_solve: CFL number must satisfy 0 < cfl <= 0.5");
  }
  if (!(t_final >= 0.0)) throw InvalidArgument("godunov_solve: t_final must be >= 0");
  const std::size_t n = u0.values.size();
  Field1D u = u0;
  if (t_final == 0.0) return u;

  // The scheme is monotone, so the state range is invariant and the wave speed bound fixed.
  const auto [mn, mx] = std::minmax_element(u.values.begin(), u.values.end());
  double smax = 0.0;
  constexpr int samples = 513;
  for (int k = 0; k < samples; ++k) {
    smax = std::max(smax, std::abs(flux.deriv(*mn + (*mx - *mn) * k / (samples - 1.0))));
  }
  for (double c : flux.critical_points()) {
    if (c >= *mn && c <= *mx) smax = std::max(smax, std::abs(flux.deriv(c)));
  }
  smax = std::max(smax, 1e-12);
  const double dx = u.grid.dx();
  const double dt_cfl = cfl * dx / smax;

  std::vector<double> crit_u(flux.critical_points().begin(), flux.critical_points().end());
  std::vector<double> crit_f(crit_u.size());
  for (std::size_t k = 0; k < crit_u.size(); ++k) crit_f[k] = flux.eval(crit_u[k]);

  std::vector<double> right(n), fu(n), fr(n), g(n);
  const auto& K = kernels::active();
  double t = 0.0;
  while (t < t_final) {
    double dt = dt_cfl;
    if (t + dt >= t_final) dt = t_final - t;
    std::rotate_copy(u.values.begin(), u.values.begin() + 1, u.values.end(), right.begin());
    flux.eval(u.values, fu);
    std::rotate_copy(fu.begin(), fu.begin() + 1, fu.end(), fr.begin());
    K.godunov_flux(u.values, right, fu, fr, crit_u, crit_f, g);  // g[j] at x_{j+1/2}
    const double r = dt / dx;
    const double g_last = g[n - 1];
    for (std::size_t j = n; j-- > 1;) u.values[j] -= r * (g[j] - g[j - 1]);
    u.values[0] -= r * (g[0] - g_last);
    t = (dt == t_final - t) ? t_final : t + dt;
  }
  u.time = u0.time + t_final;
  return u;
}

// ---------------------------------------------------------------------------

ReferenceSolution ReferenceSolution::self_similar(WaveFan fan, double x0, double t) {
  if (!(t > 0.0)) throw InvalidArgument("ReferenceSolution: t must be > 0");
  ReferenceSolution r;
  r.kind_ = Kind::fan;
  r.fan_ = std::move(fan);
  r.x0_ = x0;
  r.t_ = t;
  return r;
}

ReferenceSolution ReferenceSolution::fine_grid(Field1D fine) {
  ReferenceSolution r;
  r.kind_ = Kind::fine_grid;
  r.t_ = fine.time;
  r.fine_ = std::move(fine);
  return r;
}

std::vector<double> ReferenceSolution::on_grid(const Grid1D& grid) const {
  std::vector<double> out(grid.n);
  if (kind_ == Kind::fan) {
    for (std::size_t j = 0; j < grid.n; ++j) out[j] = (*fan_)((grid.x(j) - x0_) / t_);
    return out;
  }
  const Grid1D& fg = fine_->grid;
  if (fg.x_min != grid.x_min || fg.x_max != grid.x_max || fg.n % grid.n != 0 ||
      (fg.n / grid.n) % 2 != 0) {
    throw InvalidArgument("ReferenceSolution: fine grid must refine the target by an even factor");
  }
  const std::size_t r = fg.n / grid.n;
  const std::size_t half = r / 2;
  const auto& v = fine_->values;
  for (std::size_t j = 0; j < grid.n; ++j) {
    const std::size_t c = j * r;
    double s = 0.5 * (v[(c + fg.n - half) % fg.n] + v[(c + half) % fg.n]);
    for (std::size_t k = 1; k < half; ++k) s += v[(c + fg.n - k) % fg.n] + v[(c + k) % fg.n];
    s += v[c];
    out[j] = s / static_cast<double>(r);
  }
  return out;
}

}  // namespace ddlab
