#include <cstdlib>
#include <cstring>

#include "popmc/kernels.hpp"

namespace popmc::kernels {

#ifdef POPMC_HAVE_AVX2
namespace detail {
const KernelTable& avx2_table();
}
#endif

const KernelTable* avx2() {
#ifdef POPMC_HAVE_AVX2
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  if (supported) return &detail::avx2_table();
#endif
  return nullptr;
}

const KernelTable& active() {
  static const KernelTable& table = []() -> const KernelTable& {
    const char* force = std::getenv("POPMC_FORCE_SCALAR");
    if (force != nullptr && std::strcmp(force, "0") != 0) return scalar();
    if (const KernelTable* t = avx2()) return *t;
    return scalar();
  }();
  return table;
}

}  // namespace popmc::kernels
