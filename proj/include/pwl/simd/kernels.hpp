#pragma once

// Data-parallel inner loops used by the tensor ops. Each instruction set
// provides the same table; one table is selected on first use from the CPU
// features (override with PWL_SIMD=scalar|avx2). Variants agree with the
// scalar reference up to summation reordering and FMA rounding.

#include <cstddef>
#include <string_view>

namespace pwl::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// out[i] = a[i] * b[i]
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  /// out[i] += a[i] * b[i]
  void (*mul_acc)(const double* a, const double* b, double* out, std::size_t n);
  /// out[i] = a[i] + b[i]
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  /// out[i] = alpha * a[i]
  void (*scale)(double alpha, const double* a, double* out, std::size_t n);
  /// sum_i a[i]
  double (*sum)(const double* a, std::size_t n);
};

bool isa_supported(Isa isa);

/// Kernel table for a specific instruction set; throws ContractError when
/// the CPU or the build lacks it.
const KernelTable& kernels_for(Isa isa);

/// Currently selected table.
const KernelTable& kernels();

/// Replace the selected table (tests and benchmarking).
void select_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace pwl::simd
