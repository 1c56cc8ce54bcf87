#pragma once

#include "pwl/simd/kernels.hpp"

namespace pwl::simd {

const KernelTable& scalar_kernels();
#if defined(PWL_HAVE_AVX2_KERNELS)
const KernelTable& avx2_kernels();
#endif

}  // namespace pwl::simd
