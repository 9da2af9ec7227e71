#include <atomic>
#include <stdexcept>
#include <string>

#include "ddlab/kernels.hpp"

namespace ddlab::kernels {

#ifdef DDLAB_HAVE_AVX2
const Table& avx2_table_impl();
#endif

const Table* avx2_table() {
#ifdef DDLAB_HAVE_AVX2
  return &avx2_table_impl();
#else
  return nullptr;
#endif
}

bool cpu_has_avx2() {
#if defined(DDLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

namespace {

const Table* detect() {
  if (cpu_has_avx2() && avx2_table() != nullptr) return avx2_table();
  return &scalar_table();
}

std::atomic<const Table*>& slot() {
  static std::atomic<const Table*> current{detect()};
  return current;
}

}  // namespace

const Table& active() { return *slot().load(std::memory_order_acquire); }

void select(Backend b) {
  switch (b) {
    case Backend::scalar:
      slot().store(&scalar_table(), std::memory_order_release);
      return;
    case Backend::avx2:
      if (!cpu_has_avx2() || avx2_table() == nullptr) {
        throw std::invalid_argument("AVX2 kernels are not available on this build/CPU");
      }
      slot().store(avx2_table(), std::memory_order_release);
      return;
  }
}

void select_auto() { slot().store(detect(), std::memory_order_release); }

std::string_view name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

}  // namespace ddlab::kernels
