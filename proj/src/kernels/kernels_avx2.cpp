// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after cpu_has_avx2() returned true.
#include "ddlab/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddlab::kernels {
namespace {

inline const double* dp(std::span<const cplx> s) {
  return reinterpret_cast<const double*>(s.data());
}
inline double* dp(std::span<cplx> s) { return reinterpret_cast<double*>(s.data()); }

// [r0 i0 r1 i1] * [r0' i0' r1' i1'] as two complex products.
inline __m256d cmul_pd(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

// [w0 w0 w1 w1] from two consecutive doubles.
inline __m256d dup_pairs(const double* w) {
  const __m256d v = _mm256_castpd128_pd256(_mm_loadu_pd(w));
  return _mm256_permute4x64_pd(v, 0x50);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void cmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
  const std::size_t n = out.size();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d va = _mm256_loadu_pd(dp(a) + 2 * k);
    const __m256d vb = _mm256_loadu_pd(dp(b) + 2 * k);
    _mm256_storeu_pd(dp(out) + 2 * k, cmul_pd(va, vb));
  }
  for (; k < n; ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    const double br = b[k].real(), bi = b[k].imag();
    out[k] = cplx(ar * br - ai * bi, ar * bi + ai * br);
  }
}

void cmul_acc(std::span<const cplx> a, std::span<const cplx> x, std::span<cplx> y) {
  const std::size_t n = y.size();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d va = _mm256_loadu_pd(dp(a) + 2 * k);
    const __m256d vx = _mm256_loadu_pd(dp(x) + 2 * k);
    const __m256d vy = _mm256_loadu_pd(dp(y) + 2 * k);
    _mm256_storeu_pd(dp(y) + 2 * k, _mm256_add_pd(vy, cmul_pd(va, vx)));
  }
  for (; k < n; ++k) {
    const double ar = a[k].real(), ai = a[k].imag();
    const double xr = x[k].real(), xi = x[k].imag();
    y[k] = cplx(y[k].real() + (ar * xr - ai * xi), y[k].imag() + (ar * xi + ai * xr));
  }
}

void axpy(double s, std::span<const cplx> z, std::span<const cplx> x, std::span<cplx> y) {
  const std::size_t n = 2 * y.size();
  const double* zp = dp(z);
  const double* xp = dp(x);
  double* yp = dp(y);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(yp + k,
                     _mm256_fmadd_pd(vs, _mm256_loadu_pd(zp + k), _mm256_loadu_pd(xp + k)));
  }
  for (; k < n; ++k) yp[k] = std::fma(s, zp[k], xp[k]);
}

void ideriv(double scale, std::span<const double> xi, std::span<const cplx> in,
            std::span<cplx> out) {
  const std::size_t n = out.size();
  const __m256d vscale = _mm256_set1_pd(scale);
  const __m256d sign = _mm256_set_pd(0.0, -0.0, 0.0, -0.0);  // negate even lanes
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d m = _mm256_mul_pd(vscale, dup_pairs(xi.data() + k));
    const __m256d v = _mm256_permute_pd(_mm256_loadu_pd(dp(in) + 2 * k), 0x5);
    _mm256_storeu_pd(dp(out) + 2 * k, _mm256_xor_pd(_mm256_mul_pd(m, v), sign));
  }
  for (; k < n; ++k) {
    const double m = scale * xi[k];
    out[k] = cplx(-m * in[k].imag(), m * in[k].real());
  }
}

double weighted_sumsq(std::span<const double> w, std::span<const cplx> x) {
  const std::size_t n = x.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const __m256d v = _mm256_loadu_pd(dp(x) + 2 * k);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(v, v), dup_pairs(w.data() + k), acc);
  }
  double s = hsum(acc);
  for (; k < n; ++k) {
    s += w[k] * (x[k].real() * x[k].real() + x[k].imag() * x[k].imag());
  }
  return s;
}

double sumsq(std::span<const double> x) {
  const std::size_t n = x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256d v0 = _mm256_loadu_pd(x.data() + k);
    const __m256d v1 = _mm256_loadu_pd(x.data() + k + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  for (; k + 4 <= n; k += 4) {
    const __m256d v0 = _mm256_loadu_pd(x.data() + k);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) s += x[k] * x[k];
  return s;
}

double max_abs(std::span<const double> x) {
  const std::size_t n = x.size();
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
  __m256d m = _mm256_setzero_pd();
  __m256d finite = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d v = _mm256_loadu_pd(x.data() + k);
    // v - v is zero exactly when v is finite
    finite = _mm256_and_pd(finite, _mm256_cmp_pd(_mm256_sub_pd(v, v), _mm256_setzero_pd(),
                                                 _CMP_EQ_OQ));
    m = _mm256_max_pd(m, _mm256_and_pd(v, absmask));
  }
  if (_mm256_movemask_pd(finite) != 0xF) return std::numeric_limits<double>::quiet_NaN();
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; k < n; ++k) {
    if (!std::isfinite(x[k])) return std::numeric_limits<double>::quiet_NaN();
    r = std::max(r, std::abs(x[k]));
  }
  return r;
}

void poly_flux(std::span<const double> coeffs, double bound, std::span<const double> u,
               std::span<double> f, std::span<double> df) {
  const std::size_t deg = coeffs.size() - 1;
  const std::size_t n = u.size();
  const __m256d hi = _mm256_set1_pd(bound);
  const __m256d lo = _mm256_set1_pd(-bound);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vu = _mm256_loadu_pd(u.data() + k);
    const __m256d c = _mm256_min_pd(_mm256_max_pd(vu, lo), hi);
    __m256d p = _mm256_set1_pd(coeffs[deg]);
    __m256d d = _mm256_setzero_pd();
    for (std::size_t m = deg; m-- > 0;) {
      d = _mm256_fmadd_pd(d, c, p);
      p = _mm256_fmadd_pd(p, c, _mm256_set1_pd(coeffs[m]));
    }
    _mm256_storeu_pd(f.data() + k, _mm256_fmadd_pd(d, _mm256_sub_pd(vu, c), p));
    if (!df.empty()) _mm256_storeu_pd(df.data() + k, d);
  }
  for (; k < n; ++k) {
    const double c = std::clamp(u[k], -bound, bound);
    double p = coeffs[deg];
    double d = 0.0;
    for (std::size_t m = deg; m-- > 0;) {
      d = std::fma(d, c, p);
      p = std::fma(p, c, coeffs[m]);
    }
    f[k] = std::fma(d, u[k] - c, p);
    if (!df.empty()) df[k] = d;
  }
}

void godunov_flux(std::span<const double> a, std::span<const double> b,
                  std::span<const double> fa, std::span<const double> fb,
                  std::span<const double> crit_u, std::span<const double> crit_f,
                  std::span<double> out) {
  const std::size_t n = out.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d va = _mm256_loadu_pd(a.data() + k);
    const __m256d vb = _mm256_loadu_pd(b.data() + k);
    const __m256d vfa = _mm256_loadu_pd(fa.data() + k);
    const __m256d vfb = _mm256_loadu_pd(fb.data() + k);
    const __m256d lo = _mm256_min_pd(va, vb);
    const __m256d hi = _mm256_max_pd(va, vb);
    __m256d gmin = _mm256_min_pd(vfa, vfb);
    __m256d gmax = _mm256_max_pd(vfa, vfb);
    for (std::size_t c = 0; c < crit_u.size(); ++c) {
      const __m256d cu = _mm256_set1_pd(crit_u[c]);
      const __m256d cf = _mm256_set1_pd(crit_f[c]);
      const __m256d inside = _mm256_and_pd(_mm256_cmp_pd(cu, lo, _CMP_GE_OQ),
                                           _mm256_cmp_pd(cu, hi, _CMP_LE_OQ));
      gmin = _mm256_blendv_pd(gmin, _mm256_min_pd(gmin, cf), inside);
      gmax = _mm256_blendv_pd(gmax, _mm256_max_pd(gmax, cf), inside);
    }
    const __m256d rising = _mm256_cmp_pd(va, vb, _CMP_LE_OQ);
    _mm256_storeu_pd(out.data() + k, _mm256_blendv_pd(gmax, gmin, rising));
  }
  for (; k < n; ++k) {
    const double l = std::min(a[k], b[k]);
    const double h = std::max(a[k], b[k]);
    const bool rising = a[k] <= b[k];
    double g = rising ? std::min(fa[k], fb[k]) : std::max(fa[k], fb[k]);
    for (std::size_t c = 0; c < crit_u.size(); ++c) {
      if (crit_u[c] >= l && crit_u[c] <= h) {
        g = rising ? std::min(g, crit_f[c]) : std::max(g, crit_f[c]);
      }
    }
    out[k] = g;
  }
}

}  // namespace

const Table& avx2_table_impl() {
  static const Table t{Backend::avx2,  cmul,  cmul_acc, axpy,      ideriv,
                       weighted_sumsq, sumsq, max_abs,  poly_flux, godunov_flux};
  return t;
}

}  // namespace ddlab::kernels
