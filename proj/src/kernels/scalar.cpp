#include "poocox/kernels.hpp"

namespace poocox::kernels {

namespace {

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void scale_scalar(double* x, std::size_t n, double c) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= c;
}

void multiply_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void gather_multiply_scalar(double* dst, const double* src, const std::uint32_t* idx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] *= src[idx[i]];
}

constexpr KernelTable kScalar{Isa::Scalar,   "scalar",        sum_scalar, dot_scalar, scale_scalar,
                              multiply_scalar, gather_multiply_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace poocox::kernels
