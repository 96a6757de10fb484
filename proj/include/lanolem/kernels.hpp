#pragma once

// Data-parallel inner loops used by the learning and moment code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The public entry points dispatch once at first use to the
// best variant the CPU supports; LANOLEM_SIMD=scalar forces the reference path.

#include <cstddef>
#include <span>

namespace lanolem::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa) noexcept;
bool isa_available(Isa isa) noexcept;

/// Variant used by the dispatched entry points below.
Isa active_isa() noexcept;

/// Override the dispatch target (tests and benchmarks). Falls back to scalar
/// when the requested variant is not available on this CPU.
void set_active_isa(Isa isa) noexcept;

/// out[i] = shift[i] + Th_tau(x[i] - shift[i]), Th the soft-threshold operator.
/// Entries inside the dead zone land exactly on shift[i].
void shifted_soft_threshold(std::span<const double> x, std::span<const double> shift, double tau,
                            std::span<double> out) noexcept;

/// m += w * v v^T for a column-major n x n block, n = v.size().
void rank1_update(std::span<double> m, std::span<const double> v, double w) noexcept;

double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// sum_i (a[i] - b[i])^2
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

/// sum_i |a[i] - b[i]|
double l1_distance(std::span<const double> a, std::span<const double> b) noexcept;

namespace scalar {
void shifted_soft_threshold(const double* x, const double* shift, double tau, double* out, std::size_t n) noexcept;
void rank1_update(double* m, const double* v, double w, std::size_t n) noexcept;
double dot(const double* a, const double* b, std::size_t n) noexcept;
double squared_distance(const double* a, const double* b, std::size_t n) noexcept;
double l1_distance(const double* a, const double* b, std::size_t n) noexcept;
}  // namespace scalar

#if defined(LANOLEM_HAS_AVX2)
namespace avx2 {
void shifted_soft_threshold(const double* x, const double* shift, double tau, double* out, std::size_t n) noexcept;
void rank1_update(double* m, const double* v, double w, std::size_t n) noexcept;
double dot(const double* a, const double* b, std::size_t n) noexcept;
double squared_distance(const double* a, const double* b, std::size_t n) noexcept;
double l1_distance(const double* a, const double* b, std::size_t n) noexcept;
}  // namespace avx2
#endif

}  // namespace lanolem::kernels
