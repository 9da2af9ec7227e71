#include "ddlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddlab::kernels {
namespace {

void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    const double br = b[k].real(), bi = b[k].imag();
    out[k] = cplx(ar * br - ai * bi, ar * bi + ai * br);
  }
}

void cmul_acc(std::span<const cplx> a, std::span<const cplx> x, std::span<cplx> y) {
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    const double xr = x[k].real(), xi = x[k].imag();
    y[k] = cplx(y[k].real() + (ar * xr - ai * xi), y[k].imag() + (ar * xi + ai * xr));
  }
}

void axpy(double s, std::span<const cplx> z, std::span<const cplx> x, std::span<cplx> y) {
  for (std::size_t k = 0; k < y.size(); ++k) {
    y[k] = cplx(x[k].real() + s * z[k].real(), x[k].imag() + s * z[k].imag());
  }
}

void ideriv(double scale, std::span<const double> xi, std::span<const cplx> in,
            std::span<cplx> out) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double m = scale * xi[k];
    out[k] = cplx(-m * in[k].imag(), m * in[k].real());
  }
}

double weighted_sumsq(std::span<const double> w, std::span<const cplx> x) {
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    acc += w[k] * (x[k].real() * x[k].real() + x[k].imag() * x[k].imag());
  }
  return acc;
}

double sumsq(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
    m = std::max(m, std::abs(v));
  }
  return m;
}

void poly_flux(std::span<const double> coeffs, double bound, std::span<const double> u,
               std::span<double> f, std::span<double> df) {
  const std::size_t deg = coeffs.size() - 1;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double c = std::clamp(u[k], -bound, bound);
    double p = coeffs[deg];
    double dp = 0.0;
    for (std::size_t m = deg; m-- > 0;) {
      dp = dp * c + p;
      p = p * c + coeffs[m];
    }
    f[k] = p + dp * (u[k] - c);
    if (!df.empty()) df[k] = dp;
  }
}

void godunov_flux(std::span<const double> a, std::span<const double> b,
                  std::span<const double> fa, std::span<const double> fb,
                  std::span<const double> crit_u, std::span<const double> crit_f,
                  std::span<double> out) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double lo = std::min(a[k], b[k]);
    const double hi = std::max(a[k], b[k]);
    if (a[k] <= b[k]) {
      double g = std::min(fa[k], fb[k]);
      for (std::size_t c = 0; c < crit_u.size(); ++c) {
        if (crit_u[c] >= lo && crit_u[c] <= hi) g = std::min(g, crit_f[c]);
      }
      out[k] = g;
    } else {
      double g = std::max(fa[k], fb[k]);
      for (std::size_t c = 0; c < crit_u.size(); ++c) {
        if (crit_u[c] >= lo && crit_u[c] <= hi) g = std::max(g, crit_f[c]);
      }
      out[k] = g;
    }
  }
}

}  // namespace

const Table& scalar_table() {
  static const Table t{Backend::scalar, cmul,   cmul_acc,  axpy,     ideriv,
                       weighted_sumsq,  sumsq,  max_abs,   poly_flux, godunov_flux};
  return t;
}

}  // namespace ddlab::kernels
