#pragma once
// Data-parallel inner loops of the solvers.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The active table is chosen once at first use from the
// CPU feature bits and can be forced to the scalar path for equivalence
// testing or reproducibility against a scalar-only machine.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace ddlab::kernels {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2 };

struct Table {
  Backend backend;

  /// out[k] = a[k] * b[k]
  void (*cmul)(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out);

  /// y[k] += a[k] * x[k]
  void (*cmul_acc)(std::span<const cplx> a, std::span<const cplx> x, std::span<cplx> y);

  /// y[k] = x[k] + s * z[k]
  void (*axpy)(double s, std::span<const cplx> z, std::span<const cplx> x, std::span<cplx> y);

  /// out[k] = i * scale * xi[k] * in[k]   (spectral derivative; xi may carry a mask)
  void (*ideriv)(double scale, std::span<const double> xi, std::span<const cplx> in,
                 std::span<cplx> out);

  /// sum_k w[k] |x[k]|^2
  double (*weighted_sumsq)(std::span<const double> w, std::span<const cplx> x);

  /// sum_k x[k]^2
  double (*sumsq)(std::span<const double> x);

  /// max_k |x[k]|; NaN if any entry is not finite.
  double (*max_abs)(std::span<const double> x);

  /// Polynomial flux with optional C^1 linear saturation outside [-bound, bound]:
  /// with c = clamp(u, -bound, bound), f = P(c) + P'(c)(u - c), f' = P'(c).
  /// coeffs are in increasing degree. df may be empty.
  void (*poly_flux)(std::span<const double> coeffs, double bound, std::span<const double> u,
                    std::span<double> f, std::span<double> df);

  /// Exact Godunov flux for the interface (a, b) given f(a), f(b) and the flux
  /// extrema candidates (critical points crit_u with values crit_f).
  void (*godunov_flux)(std::span<const double> a, std::span<const double> b,
                       std::span<const double> fa, std::span<const double> fb,
                       std::span<const double> crit_u, std::span<const double> crit_f,
                       std::span<double> out);
};

const Table& scalar_table();
/// nullptr when the variant was not compiled in.
const Table* avx2_table();

bool cpu_has_avx2();

/// Active table. Thread-safe; the selection is made once.
const Table& active();

/// Force a backend. Throws std::invalid_argument when the backend is unavailable.
void select(Backend b);
void select_auto();

std::string_view name(Backend b);

}  // namespace ddlab::kernels
