#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Data-parallel inner loops shared by junction-tree propagation and the Cox
// risk-set sums. Each kernel has a scalar reference and, on x86-64, an AVX2
// variant; the variant is picked once per process from CPUID. Setting the
// environment variable POOCOX_SIMD=scalar forces the reference path.

namespace poocox::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  const char* name;
  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*scale)(double* x, std::size_t n, double c);
  // dst[j] = a[j] * b[j]
  void (*multiply)(double* dst, const double* a, const double* b, std::size_t n);
  // dst[j] *= src[idx[j]]
  void (*gather_multiply)(double* dst, const double* src, const std::uint32_t* idx, std::size_t n);
};

bool supported(Isa isa) noexcept;
/// Throws std::invalid_argument if `isa` is not supported on this machine.
const KernelTable& table(Isa isa);
const KernelTable& active() noexcept;

const KernelTable& scalar_table() noexcept;
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table() noexcept;
#endif

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void scale(std::span<double> x, double c) { active().scale(x.data(), x.size(), c); }
inline void multiply(std::span<double> dst, std::span<const double> a, std::span<const double> b) {
  active().multiply(dst.data(), a.data(), b.data(), dst.size());
}
inline void gather_multiply(std::span<double> dst, std::span<const double> src,
                            std::span<const std::uint32_t> idx) {
  active().gather_multiply(dst.data(), src.data(), idx.data(), dst.size());
}

/// dst[idx[j]] += src[j]. Scatter has no AVX2 form; scalar everywhere.
inline void scatter_add(std::span<double> dst, std::span<const double> src, std::span<const std::uint32_t> idx) {
  for (std::size_t j = 0; j < src.size(); ++j) dst[idx[j]] += src[j];
}

}  // namespace poocox::kernels
