#include <atomic>
#include <cstdlib>
#include <string>

#include "pwl/error.hpp"
#include "simd/kernel_tables.hpp"

namespace pwl::simd {
namespace {

bool cpu_has_avx2() {
#if defined(PWL_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  if (const char* forced = std::getenv("PWL_SIMD")) {
    const std::string name(forced);
    if (name == "scalar") return &scalar_kernels();
    if (name == "avx2") return &kernels_for(Isa::Avx2);
    throw ConfigError("PWL_SIMD must be 'scalar' or 'avx2', got '" + name + "'");
  }
  return isa_supported(Isa::Avx2) ? &kernels_for(Isa::Avx2) : &scalar_kernels();
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2: {
      static const bool supported = cpu_has_avx2();
      return supported;
    }
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw ContractError("instruction set " + std::string(isa_name(isa)) +
                        " is not available on this CPU or build");
  }
#if defined(PWL_HAVE_AVX2_KERNELS)
  if (isa == Isa::Avx2) return avx2_kernels();
#endif
  return scalar_kernels();
}

const KernelTable& kernels() { return *active().load(std::memory_order_relaxed); }

void select_isa(Isa isa) { active().store(&kernels_for(isa), std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace pwl::simd
