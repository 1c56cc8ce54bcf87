#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pwl/error.hpp"
#include "pwl/random.hpp"
#include "pwl/simd/kernels.hpp"

namespace {

using namespace pwl;
using simd::Isa;

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal(0.0, 3.0);
  return v;
}

class SimdEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!simd::isa_supported(Isa::Avx2)) GTEST_SKIP() << "AVX2/FMA not available";
  }
  const simd::KernelTable& ref = simd::kernels_for(Isa::Scalar);
  const simd::KernelTable& vec() { return simd::kernels_for(Isa::Avx2); }
};

// Sizes cover empty input, every remainder of the 4-wide and 8-wide loops,
// and larger odd lengths.
const std::vector<std::size_t> kSizes = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 15, 16, 17, 31, 33, 64, 127, 1000, 1003};

TEST_F(SimdEquivalence, DotAndSumAgreeUpToReordering) {
  Rng rng(1);
  for (std::size_t n : kSizes) {
    const auto a = random_values(n, rng), b = random_values(n, rng);
    double magnitude = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      magnitude += std::abs(a[i] * b[i]);
      total += std::abs(a[i]);
    }
    EXPECT_NEAR(vec().dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), 1e-14 * (magnitude + 1.0))
        << "n=" << n;
    EXPECT_NEAR(vec().sum(a.data(), n), ref.sum(a.data(), n), 1e-14 * (total + 1.0)) << "n=" << n;
  }
}

TEST_F(SimdEquivalence, ElementwiseKernelsAreExact) {
  Rng rng(2);
  for (std::size_t n : kSizes) {
    const auto a = random_values(n, rng), b = random_values(n, rng);
    std::vector<double> r(n), v(n);
    ref.mul(a.data(), b.data(), r.data(), n);
    vec().mul(a.data(), b.data(), v.data(), n);
    EXPECT_EQ(r, v) << "mul n=" << n;
    ref.add(a.data(), b.data(), r.data(), n);
    vec().add(a.data(), b.data(), v.data(), n);
    EXPECT_EQ(r, v) << "add n=" << n;
    ref.scale(-1.75, a.data(), r.data(), n);
    vec().scale(-1.75, a.data(), v.data(), n);
    EXPECT_EQ(r, v) << "scale n=" << n;
  }
}

TEST_F(SimdEquivalence, FusedKernelsAgreeWithinRounding) {
  Rng rng(3);
  for (std::size_t n : kSizes) {
    const auto a = random_values(n, rng), b = random_values(n, rng), y0 = random_values(n, rng);
    std::vector<double> r = y0, v = y0;
    ref.axpy(0.37, a.data(), r.data(), n);
    vec().axpy(0.37, a.data(), v.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(r[i], v[i], 1e-15 * (std::abs(r[i]) + std::abs(a[i]) + 1.0));
    r = y0;
    v = y0;
    ref.mul_acc(a.data(), b.data(), r.data(), n);
    vec().mul_acc(a.data(), b.data(), v.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(r[i], v[i], 1e-15 * (std::abs(r[i]) + std::abs(a[i] * b[i]) + 1.0));
    }
  }
}

TEST(SimdDispatch, ScalarAlwaysAvailable) {
  EXPECT_TRUE(simd::isa_supported(Isa::Scalar));
  EXPECT_EQ(simd::kernels_for(Isa::Scalar).isa, Isa::Scalar);
  EXPECT_EQ(simd::isa_name(Isa::Scalar), "scalar");
  EXPECT_EQ(simd::isa_name(Isa::Avx2), "avx2");
}

TEST(SimdDispatch, SelectSwitchesActiveTable) {
  const Isa original = simd::kernels().isa;
  simd::select_isa(Isa::Scalar);
  EXPECT_EQ(simd::kernels().isa, Isa::Scalar);
  if (simd::isa_supported(Isa::Avx2)) {
    simd::select_isa(Isa::Avx2);
    EXPECT_EQ(simd::kernels().isa, Isa::Avx2);
  } else {
    EXPECT_THROW(simd::kernels_for(Isa::Avx2), ContractError);
  }
  simd::select_isa(original);
}

TEST(SimdDispatch, KnownValues) {
  for (Isa isa : {Isa::Scalar, Isa::Avx2}) {
    if (!simd::isa_supported(isa)) continue;
    const auto& k = simd::kernels_for(isa);
    const std::vector<double> a = {1, 2, 3, 4, 5}, b = {5, 4, 3, 2, 1};
    EXPECT_EQ(k.dot(a.data(), b.data(), 5), 35.0);
    EXPECT_EQ(k.sum(a.data(), 5), 15.0);
    EXPECT_EQ(k.dot(a.data(), b.data(), 0), 0.0);
  }
}

}  // namespace
