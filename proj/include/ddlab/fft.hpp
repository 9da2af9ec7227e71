#pragma once
// Thin RAII wrapper over FFTW real-to-complex transforms.

#include <complex>
#include <cstddef>
#include <span>

namespace ddlab {

/// Real <-> half-spectrum transform of fixed size. Not thread-safe per object;
/// create one per worker. Plans are created with FFTW_ESTIMATE so results are
/// reproducible run to run.
class RealFFT {
 public:
  /// One-dimensional transform of length n.
  explicit RealFFT(std::size_t n);
  /// Two-dimensional transform of an n0 x n1 row-major array (last axis halved).
  RealFFT(std::size_t n0, std::size_t n1);
  ~RealFFT();

  RealFFT(const RealFFT&) = delete;
  RealFFT& operator=(const RealFFT&) = delete;
  RealFFT(RealFFT&&) noexcept;
  RealFFT& operator=(RealFFT&&) noexcept;

  std::size_t real_size() const { return real_size_; }
  std::size_t spectral_size() const { return spec_size_; }

  /// Unnormalized forward transform.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  /// Inverse transform including the 1/N normalization.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  void release() noexcept;

  std::size_t real_size_ = 0;
  std::size_t spec_size_ = 0;
  double* rbuf_ = nullptr;
  std::complex<double>* cbuf_ = nullptr;
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
};

}  // namespace ddlab
