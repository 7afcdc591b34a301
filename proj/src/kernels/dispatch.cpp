#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"

namespace qboost::kernels {

const KernelTable& scalar_table() {
  static const KernelTable table{
      Isa::Scalar,           "scalar",
      scalar::dot,           scalar::axpy,
      scalar::symv,          scalar::rank2_update,
      scalar::probit_terms,  scalar::logistic_terms,
      scalar::normal_cdf,    scalar::expected_gain,
  };
  return table;
}

const KernelTable* avx2_table() {
#if defined(QBOOST_HAVE_AVX2_TU)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  static const KernelTable table{
      Isa::Avx2,           "avx2",
      avx2::dot,           avx2::axpy,
      avx2::symv,          avx2::rank2_update,
      avx2::probit_terms,  avx2::logistic_terms,
      avx2::normal_cdf,    avx2::expected_gain,
  };
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& chosen = []() -> const KernelTable& {
    const char* env = std::getenv("QBOOST_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return chosen;
}

}  // namespace qboost::kernels
