#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pwl/error.hpp"
#include "pwl/heads.hpp"
#include "pwl/model.hpp"
#include "pwl/random.hpp"
#include "support/gradcheck.hpp"

namespace {

using namespace pwl;
using check::random_tensor;

double logit_of(const PwlOutput& out, std::size_t n) { return out.logit[n]; }

TEST(Straightforward, Cancellation) {
  const PwlOutput out = forward_straightforward(Tensor::matrix({{1, 1}}), Tensor::matrix({{0.3, -0.3}}));
  EXPECT_EQ(logit_of(out, 0), 0.0);
  EXPECT_EQ(out.y_hat[0], 0.5);
  EXPECT_FALSE(out.rho.has_value());
}

TEST(Straightforward, ZeroEtaGivesSigmoidOfBias) {
  const PwlOutput out = forward_straightforward(Tensor::zeros(1, 3), Tensor::matrix({{5, -2, 1}}), 0.7);
  EXPECT_DOUBLE_EQ(out.y_hat[0], sigmoid(0.7));
}

TEST(Straightforward, MatchesScalarRecomputation) {
  Rng rng(1);
  const Tensor eta = random_tensor({20, 4}, rng), x = random_tensor({20, 4}, rng);
  const PwlOutput out = forward_straightforward(eta, x, -0.3);
  for (std::size_t n = 0; n < 20; ++n) {
    double z = 0.0;
    for (std::size_t j = 0; j < 4; ++j) z += eta.at(n, j) * x.at(n, j);
    EXPECT_NEAR(out.y_hat[n], sigmoid(z + -0.3), 1e-15);
  }
  EXPECT_EQ(out.xi, eta);
  EXPECT_THROW(forward_straightforward(eta, Tensor::zeros(20, 3)), DimensionError);
}

TEST(Realloc, OnesReduceToLogistic) {
  Rng rng(2);
  const Tensor w = random_tensor({3}, rng), x = random_tensor({50, 3}, rng);
  const PwlOutput out = forward_realloc(HeadVariant::ReallocI, w, Tensor::ones(50, 3), x, 0.4);
  const LogisticParams logistic{w, Tensor::scalar(0.4)};
  const std::vector<double> expected = logistic_forward(logistic, x);
  for (std::size_t n = 0; n < 50; ++n) EXPECT_EQ(out.y_hat[n], expected[n]);
}

TEST(Realloc, TypeIXiIsHadamard) {
  const PwlOutput out =
      forward_realloc(HeadVariant::ReallocI, Tensor::vector({1, 2}), Tensor::matrix({{3, 4}}), Tensor::matrix({{1, 1}}));
  EXPECT_EQ(out.xi, Tensor::matrix({{3, 8}}));
}

TEST(Realloc, TypeIIdentity) {
  Rng rng(3);
  const Tensor w = random_tensor({4}, rng), u = random_tensor({30, 4}, rng), x = random_tensor({30, 4}, rng);
  const PwlOutput out = forward_realloc(HeadVariant::ReallocI, w, u, x, 0.2);
  for (std::size_t n = 0; n < 30; ++n) {
    double xi_x = 0.2, w_rho = 0.2;
    for (std::size_t j = 0; j < 4; ++j) {
      xi_x += out.xi.at(n, j) * x.at(n, j);
      w_rho += w[j] * out.rho->at(n, j);
    }
    EXPECT_NEAR(sigmoid(xi_x), sigmoid(w_rho), 1e-12);
    EXPECT_NEAR(xi_x, out.logit[n], 1e-12);
  }
}

TEST(Realloc, TypeIIWithZeroUIsLinear) {
  Rng rng(4);
  const Tensor w = random_tensor({2}, rng), x = random_tensor({10, 2}, rng);
  const PwlOutput out = forward_realloc(HeadVariant::ReallocII, w, Tensor::zeros(10, 2), x, -1.0);
  const std::vector<double> expected = logistic_forward({w, Tensor::scalar(-1.0)}, x);
  for (std::size_t n = 0; n < 10; ++n) EXPECT_NEAR(out.y_hat[n], expected[n], 1e-15);
}

TEST(Realloc, TableRows) {
  const Tensor w = Tensor::vector({2, -1});
  const Tensor x = Tensor::matrix({{0.5, 3}});
  const Tensor u = Tensor::matrix({{4, 2}});
  const Tensor uv = Tensor::matrix({{4, 2, 1, -1}});
  EXPECT_EQ(*forward_realloc(HeadVariant::ReallocI, w, u, x).rho, Tensor::matrix({{2, 6}}));
  EXPECT_EQ(*forward_realloc(HeadVariant::ReallocII, w, u, x).rho, Tensor::matrix({{4.5, 5}}));
  EXPECT_EQ(*forward_realloc(HeadVariant::ReallocIII, w, uv, x).rho, Tensor::matrix({{6, 4}}));
  EXPECT_EQ(*forward_realloc(HeadVariant::ReallocIV, w, uv, x).rho, Tensor::matrix({{3, 5}}));
  // xi / offset decomposition: logit = sum(xi * x) + sum(offset) + b.
  for (HeadVariant v : {HeadVariant::ReallocII, HeadVariant::ReallocIII, HeadVariant::ReallocIV}) {
    const Tensor& eta = v == HeadVariant::ReallocII ? u : uv;
    const PwlOutput out = forward_realloc(v, w, eta, x, 0.25);
    ASSERT_TRUE(out.offset.has_value());
    double z = 0.25;
    for (std::size_t j = 0; j < 2; ++j) z += out.xi.at(0, j) * x.at(0, j) + out.offset->at(0, j);
    EXPECT_DOUBLE_EQ(z, out.logit[0]) << variant_name(v);
  }
  EXPECT_EQ(forward_realloc(HeadVariant::ReallocII, w, u, x).xi, Tensor::matrix({{2, -1}}));
}

TEST(Realloc, Clamp) {
  const Tensor w = Tensor::vector({1, 1, 1});
  const Tensor x = Tensor::matrix({{-0.5, 0.3, 7}});
  const PwlOutput out = forward_realloc(HeadVariant::ReallocI, w, Tensor::ones(1, 3), x, 0.0, ClampBounds{});
  EXPECT_EQ(*out.rho, Tensor::matrix({{0.0, 0.3, 1.0}}));
  EXPECT_THROW(forward_realloc(HeadVariant::ReallocI, w, Tensor::ones(1, 3), x, 0.0, ClampBounds{1, 0}),
               ArgumentError);

  Rng rng(5);
  const Tensor big = random_tensor({40, 3}, rng, 5.0);
  const PwlOutput clamped =
      forward_realloc(HeadVariant::ReallocIV, w, random_tensor({40, 6}, rng, 3.0), big, 0.0, ClampBounds{-0.2, 0.9});
  for (double v : clamped.rho->values()) {
    EXPECT_GE(v, -0.2);
    EXPECT_LE(v, 0.9);
  }
}

TEST(Realloc, ShapeErrors) {
  EXPECT_THROW(forward_realloc(HeadVariant::ReallocIII, Tensor::vector({1, 1}), Tensor::ones(2, 2), Tensor::ones(2, 2)),
               Error);
  EXPECT_THROW(forward_realloc(HeadVariant::ReallocI, Tensor::vector({1, 1, 1}), Tensor::ones(2, 2), Tensor::ones(2, 2)),
               Error);
  EXPECT_THROW((HeadConfig{HeadVariant::Straightforward, ClampBounds{}, true}.validate()), ConfigError);
}

TEST(Contributions, HandArithmetic) {
  const Tensor w = Tensor::vector({1, 1});
  const Tensor x = Tensor::matrix({{1, 1}});
  const PwlOutput out = forward_realloc(HeadVariant::ReallocI, w, Tensor::matrix({{2, 3}}), x);
  EXPECT_EQ(extract_contributions(out, x, &w), Tensor::matrix({{2, 3}}));
  EXPECT_EQ(out.contributions, Tensor::matrix({{2, 3}}));
  EXPECT_EQ(out.logit[0], 5.0);
  EXPECT_THROW(extract_contributions(out, x, nullptr), ContractError);
}

TEST(Contributions, ZeroSampleTypeIII) {
  const Tensor w = Tensor::vector({2, -3});
  const Tensor x = Tensor::zeros(1, 2);
  const Tensor uv = Tensor::matrix({{0.5, 4, 1.5, -2}});
  const PwlOutput out = forward_realloc(HeadVariant::ReallocIII, w, uv, x);
  EXPECT_EQ(out.contributions, Tensor::matrix({{2 * 0.5 * 1.5, -3 * 4 * -2.0}}));
  const PwlOutput type1 = forward_realloc(HeadVariant::ReallocI, w, Tensor::matrix({{0.5, 4}}), x);
  EXPECT_EQ(type1.contributions, Tensor::matrix({{0, 0}}));
}

TEST(Contributions, SumToLogitForEveryHead) {
  Rng rng(6);
  const Tensor x = random_tensor({25, 3}, rng);
  const Tensor w = random_tensor({3}, rng);
  for (HeadVariant v : {HeadVariant::Straightforward, HeadVariant::ReallocI, HeadVariant::ReallocII,
                        HeadVariant::ReallocIII, HeadVariant::ReallocIV}) {
    for (bool clamp : {false, true}) {
      if (clamp && v == HeadVariant::Straightforward) continue;
      const Tensor eta = random_tensor({25, eta_width(v, 3)}, rng);
      const PwlOutput out = v == HeadVariant::Straightforward
                                ? forward_straightforward(eta, x, 0.3)
                                : forward_realloc(v, w, eta, x, 0.3, clamp ? std::optional(ClampBounds{}) : std::nullopt);
      const Tensor c = extract_contributions(out, x, &w);
      EXPECT_EQ(c, out.contributions);
      for (std::size_t n = 0; n < 25; ++n) {
        double z = out.bias;
        for (double cj : c.row(n)) z += cj;
        EXPECT_NEAR(z, out.logit[n], 1e-12) << variant_name(v);
      }
    }
  }
}

TEST(AngleMap, Definition) {
  const std::vector<double> a = xi_angle_map(Tensor::matrix({{1, 1}, {1, 0}, {0, -1}}));
  EXPECT_DOUBLE_EQ(a[0], std::numbers::pi / 4);
  EXPECT_DOUBLE_EQ(a[1], 0.0);
  EXPECT_DOUBLE_EQ(a[2], -std::numbers::pi / 2);
  EXPECT_THROW(xi_angle_map(Tensor::zeros(2, 3)), ContractError);
}

TEST(Model, ProbabilitiesStayBounded) {
  for (ModelKind kind : kAllModelKinds) {
    ModelSpec spec;
    spec.kind = kind;
    spec.hidden = {8};
    const Model model = Model::create(spec, 1);
    const std::vector<double> p = model.predict(Tensor::matrix({{1e6, -1e6}, {-1e6, 1e6}, {1e6, 1e6}, {0, 0}}));
    for (double v : p) {
      EXPECT_TRUE(std::isfinite(v)) << model_kind_name(kind);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Model, XiIsContinuous) {
  ModelSpec spec;
  spec.kind = ModelKind::PwlReallocI;
  const Model model = Model::create(spec, 2);
  Rng rng(8);
  const Tensor x = random_tensor({20, 2}, rng);
  const Tensor base = model.run(x).xi;
  for (std::size_t j = 0; j < 2; ++j) {
    Tensor moved = x;
    for (std::size_t n = 0; n < 20; ++n) moved.at(n, j) += 1e-6;
    EXPECT_LT(max_abs_diff(model.run(moved).xi, base), 1e-2);
  }
}

TEST(Model, KindNames) {
  for (ModelKind kind : kAllModelKinds) EXPECT_EQ(parse_model_kind(model_kind_name(kind)), kind);
  EXPECT_EQ(model_kind_name(ModelKind::PwlReallocIII), "pwl-realloc-III");
  EXPECT_THROW(parse_model_kind("pwl-realloc-V"), ConfigError);
}

TEST(Model, ForwardIsDeterministic) {
  ModelSpec spec;
  spec.kind = ModelKind::PwlReallocIV;
  spec.clamp = ClampBounds{};
  const Model a = Model::create(spec, 3), b = Model::create(spec, 3);
  Rng rng(1);
  const Tensor x = random_tensor({15, 2}, rng);
  EXPECT_EQ(a.predict(x), b.predict(x));
  EXPECT_EQ(a.predict(x), a.predict(x));
}

}  // namespace
