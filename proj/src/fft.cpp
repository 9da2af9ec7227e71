#include "ddlab/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>
#include <utility>

#include "ddlab/error.hpp"

namespace ddlab {
namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFFT::RealFFT(std::size_t n) : real_size_(n), spec_size_(n / 2 + 1) {
  if (n < 2) throw InvalidArgument("RealFFT: size must be >= 2");
  rbuf_ = fftw_alloc_real(real_size_);
  cbuf_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(spec_size_));
  if (!rbuf_ || !cbuf_) {
    release();
    throw std::bad_alloc();
  }
  std::lock_guard lock(planner_mutex());
  auto* c = reinterpret_cast<fftw_complex*>(cbuf_);
  fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), rbuf_, c, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), c, rbuf_, FFTW_ESTIMATE);
}

RealFFT::RealFFT(std::size_t n0, std::size_t n1)
    : real_size_(n0 * n1), spec_size_(n0 * (n1 / 2 + 1)) {
  if (n0 < 2 || n1 < 2) throw InvalidArgument("RealFFT: sizes must be >= 2");
  rbuf_ = fftw_alloc_real(real_size_);
  cbuf_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(spec_size_));
  if (!rbuf_ || !cbuf_) {
    release();
    throw std::bad_alloc();
  }
  std::lock_guard lock(planner_mutex());
  auto* c = reinterpret_cast<fftw_complex*>(cbuf_);
  fwd_ = fftw_plan_dft_r2c_2d(static_cast<int>(n0), static_cast<int>(n1), rbuf_, c,
                              FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_2d(static_cast<int>(n0), static_cast<int>(n1), c, rbuf_,
                              FFTW_ESTIMATE);
}

RealFFT::~RealFFT() { release(); }

RealFFT::RealFFT(RealFFT&& o) noexcept
    : real_size_(o.real_size_),
      spec_size_(o.spec_size_),
      rbuf_(std::exchange(o.rbuf_, nullptr)),
      cbuf_(std::exchange(o.cbuf_, nullptr)),
      fwd_(std::exchange(o.fwd_, nullptr)),
      inv_(std::exchange(o.inv_, nullptr)) {}

RealFFT& RealFFT::operator=(RealFFT&& o) noexcept {
  if (this != &o) {
    release();
    real_size_ = o.real_size_;
    spec_size_ = o.spec_size_;
    rbuf_ = std::exchange(o.rbuf_, nullptr);
    cbuf_ = std::exchange(o.cbuf_, nullptr);
    fwd_ = std::exchange(o.fwd_, nullptr);
    inv_ = std::exchange(o.inv_, nullptr);
  }
  return *this;
}

void RealFFT::release() noexcept {
  if (fwd_ || inv_) {
    std::lock_guard lock(planner_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (inv_) fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  }
  fwd_ = inv_ = nullptr;
  if (rbuf_) fftw_free(rbuf_);
  if (cbuf_) fftw_free(cbuf_);
  rbuf_ = nullptr;
  cbuf_ = nullptr;
}

void RealFFT::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), rbuf_);
  fftw_execute(static_cast<fftw_plan>(fwd_));
  std::copy(cbuf_, cbuf_ + spec_size_, out.begin());
}

void RealFFT::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  // c2r overwrites its input, hence the staging copy.
  std::copy(in.begin(), in.end(), cbuf_);
  fftw_execute(static_cast<fftw_plan>(inv_));
  const double scale = 1.0 / static_cast<double>(real_size_);
  for (std::size_t k = 0; k < real_size_; ++k) out[k] = rbuf_[k] * scale;
}

}  // namespace ddlab
