#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "poocox/kernels.hpp"

namespace poocox::kernels {

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) throw std::invalid_argument("requested SIMD variant is not supported on this CPU");
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::Avx2) return avx2_table();
#endif
  return scalar_table();
}

const KernelTable& active() noexcept {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* env = std::getenv("POOCOX_SIMD");
    if (env && std::string_view(env) == "scalar") return scalar_table();
    if (supported(Isa::Avx2)) return table(Isa::Avx2);
    return scalar_table();
  }();
  return chosen;
}

}  // namespace poocox::kernels
