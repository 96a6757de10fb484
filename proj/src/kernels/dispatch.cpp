// Selection logic only; no intrinsics in this file.

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string_view>

#include "lanolem/kernels.hpp"

namespace lanolem::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(LANOLEM_HAS_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() noexcept {
  if (const char* env = std::getenv("LANOLEM_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
    return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

const char* isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::avx2:
      return "avx2";
    case Isa::scalar:
      break;
  }
  return "scalar";
}

bool isa_available(Isa isa) noexcept { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) noexcept {
  current().store(isa_available(isa) ? isa : Isa::scalar, std::memory_order_relaxed);
}

void shifted_soft_threshold(std::span<const double> x, std::span<const double> shift, double tau,
                            std::span<double> out) noexcept {
  assert(x.size() == shift.size() && x.size() == out.size());
#if defined(LANOLEM_HAS_AVX2)
  if (active_isa() == Isa::avx2) {
    return avx2::shifted_soft_threshold(x.data(), shift.data(), tau, out.data(), x.size());
  }
#endif
  scalar::shifted_soft_threshold(x.data(), shift.data(), tau, out.data(), x.size());
}

void rank1_update(std::span<double> m, std::span<const double> v, double w) noexcept {
  assert(m.size() == v.size() * v.size());
#if defined(LANOLEM_HAS_AVX2)
  if (active_isa() == Isa::avx2) return avx2::rank1_update(m.data(), v.data(), w, v.size());
#endif
  scalar::rank1_update(m.data(), v.data(), w, v.size());
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  assert(a.size() == b.size());
#if defined(LANOLEM_HAS_AVX2)
  if (active_isa() == Isa::avx2) return avx2::dot(a.data(), b.data(), a.size());
#endif
  return scalar::dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  assert(a.size() == b.size());
#if defined(LANOLEM_HAS_AVX2)
  if (active_isa() == Isa::avx2) return avx2::squared_distance(a.data(), b.data(), a.size());
#endif
  return scalar::squared_distance(a.data(), b.data(), a.size());
}

double l1_distance(std::span<const double> a, std::span<const double> b) noexcept {
  assert(a.size() == b.size());
#if defined(LANOLEM_HAS_AVX2)
  if (active_isa() == Isa::avx2) return avx2::l1_distance(a.data(), b.data(), a.size());
#endif
  return scalar::l1_distance(a.data(), b.data(), a.size());
}

}  // namespace lanolem::kernels
