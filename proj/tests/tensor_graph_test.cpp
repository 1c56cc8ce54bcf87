#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "pwl/error.hpp"
#include "pwl/graph.hpp"
#include "pwl/random.hpp"
#include "pwl/simd/kernels.hpp"
#include "pwl/tensor.hpp"
#include "support/gradcheck.hpp"

namespace {

using namespace pwl;
using check::random_tensor;
using check::relative_error;

TEST(Tensor, ShapesAndAccess) {
  const Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m.at(1, 2), 6.0);
  EXPECT_EQ(m.row(1)[0], 4.0);
  const Tensor v = Tensor::vector({1, 2});
  EXPECT_EQ(v.rank(), 1u);
  EXPECT_EQ(v.rows(), 1u);
  EXPECT_EQ(v.cols(), 2u);
  EXPECT_EQ(Tensor::scalar(3.5).item(), 3.5);
  EXPECT_THROW(m.item(), DimensionError);
  EXPECT_EQ(shape_to_string(m.shape()), "[2x3]");
}

TEST(Tensor, RejectsBadShapes) {
  EXPECT_THROW(Tensor(Shape{}), DimensionError);
  EXPECT_THROW(Tensor(Shape{2, 0}), DimensionError);
  EXPECT_THROW(Tensor(Shape{2, 2, 2}), DimensionError);
  EXPECT_THROW(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor::matrix({{1, 2}, {3}}), DimensionError);
}

TEST(Tensor, RowSelection) {
  const Tensor m = Tensor::matrix({{1, 2}, {3, 4}, {5, 6}});
  EXPECT_EQ(m.slice_rows(1, 2), Tensor::matrix({{3, 4}, {5, 6}}));
  const std::vector<std::size_t> idx = {2, 0, 2};
  EXPECT_EQ(m.gather_rows(idx), Tensor::matrix({{5, 6}, {1, 2}, {5, 6}}));
  EXPECT_THROW(m.slice_rows(2, 2), DimensionError);
  EXPECT_TRUE(m.all_finite());
  Tensor bad = m;
  bad[3] = NAN;
  EXPECT_FALSE(bad.all_finite());
  EXPECT_EQ(max_abs_diff(m, m), 0.0);
}

TEST(Graph, ForwardValues) {
  Graph g;
  const NodeId a = g.constant(Tensor::matrix({{1, 2}, {3, 4}}));
  const NodeId b = g.constant(Tensor::matrix({{5, 6}, {7, 8}}));
  EXPECT_EQ(g.value(g.matmul(a, b)), Tensor::matrix({{19, 22}, {43, 50}}));
  EXPECT_EQ(g.value(g.matmul_transposed(a, b)), Tensor::matrix({{17, 23}, {39, 53}}));
  EXPECT_EQ(g.value(g.hadamard(a, b)), Tensor::matrix({{5, 12}, {21, 32}}));
  EXPECT_EQ(g.value(g.add(a, g.constant(Tensor::scalar(1)))), Tensor::matrix({{2, 3}, {4, 5}}));
  EXPECT_EQ(g.value(g.add_row_vector(a, g.constant(Tensor::vector({10, 20})))), Tensor::matrix({{11, 22}, {13, 24}}));
  EXPECT_EQ(g.value(g.mul_row_vector(a, g.constant(Tensor::vector({2, 3})))), Tensor::matrix({{2, 6}, {6, 12}}));
  EXPECT_EQ(g.value(g.row_sum(a)), Tensor::matrix({{3}, {7}}));
  EXPECT_EQ(g.value(g.row_sum_squares(a)), Tensor::matrix({{5}, {25}}));
  EXPECT_EQ(g.value(g.columns(a, 1, 1)), Tensor::matrix({{2}, {4}}));
  EXPECT_EQ(g.value(g.sum(a)).item(), 10.0);
  EXPECT_EQ(g.value(g.mean(a)).item(), 2.5);
  EXPECT_EQ(g.value(g.clamp(a, 1.5, 3.5)), Tensor::matrix({{1.5, 2}, {3, 3.5}}));
  const NodeId neg = g.constant(Tensor::matrix({{-3, 4}}));
  EXPECT_EQ(g.value(g.row_l1(neg)).item(), 7.0);
  EXPECT_EQ(g.value(g.row_l2(neg)).item(), 5.0);
}

TEST(Graph, ShapeErrors) {
  Graph g;
  const NodeId a = g.constant(Tensor::zeros(2, 3));
  const NodeId b = g.constant(Tensor::zeros(2, 3));
  EXPECT_THROW(g.matmul(a, b), DimensionError);
  EXPECT_THROW(g.add(a, g.constant(Tensor::zeros(3, 2))), DimensionError);
  EXPECT_THROW(g.add_row_vector(a, g.constant(Tensor::vector({1, 2}))), DimensionError);
  EXPECT_THROW(g.columns(a, 2, 2), DimensionError);
  EXPECT_THROW(g.clamp(a, 1.0, 0.0), ArgumentError);
  EXPECT_THROW(g.backward(a), ContractError);
}

TEST(Graph, Activations) {
  Graph g;
  const NodeId x = g.constant(Tensor::vector({-1.0, 0.0, 2.0}));
  EXPECT_EQ(g.value(g.activation(x, Activation::Relu)), Tensor::vector({0.0, 0.0, 2.0}));
  EXPECT_EQ(g.value(g.activation(x, Activation::Identity)), Tensor::vector({-1.0, 0.0, 2.0}));
  const Tensor s = g.value(g.activation(x, Activation::Sigmoid));
  EXPECT_DOUBLE_EQ(s[1], 0.5);
  EXPECT_DOUBLE_EQ(s[2], 1.0 / (1.0 + std::exp(-2.0)));
  const Tensor t = g.value(g.activation(x, Activation::Tanh));
  EXPECT_DOUBLE_EQ(t[0], std::tanh(-1.0));
  const Tensor selu = g.value(g.activation(x, Activation::Selu));
  EXPECT_DOUBLE_EQ(selu[0], kSeluScale * kSeluAlpha * (std::exp(-1.0) - 1.0));
  EXPECT_DOUBLE_EQ(selu[2], kSeluScale * 2.0);
  EXPECT_EQ(parse_activation("selu"), Activation::Selu);
  EXPECT_EQ(activation_name(Activation::Tanh), "tanh");
  EXPECT_THROW(parse_activation("gelu"), ConfigError);
}

TEST(Graph, StableSigmoid) {
  EXPECT_EQ(sigmoid(-800.0), 0.0);
  EXPECT_EQ(sigmoid(800.0), 1.0);
  EXPECT_GT(sigmoid(-700.0), 0.0);
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
}

TEST(Graph, NllMatchesDirectFormula) {
  Graph g;
  const Tensor z = Tensor::matrix({{0.3}, {-2.0}, {5.0}});
  const std::vector<double> t = {1, 0, 0};
  const double loss = g.value(g.nll_with_logits(g.constant(z), t)).item();
  double expected = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = sigmoid(z[i]);
    expected -= t[i] * std::log(p) + (1 - t[i]) * std::log(1 - p);
  }
  EXPECT_NEAR(loss, expected / 3.0, 1e-14);
  EXPECT_THROW(g.nll_with_logits(g.constant(z), std::vector<double>{1, 0, 0.5}), DataError);
  EXPECT_THROW(g.nll_with_logits(g.constant(z), std::vector<double>{1, 0}), DimensionError);
}

TEST(Graph, NllClipsSaturatedProbabilities) {
  Graph g;
  const std::vector<double> t = {0};
  Tensor z = Tensor::matrix({{100.0}});
  const NodeId p = g.parameter(z);
  const NodeId loss = g.nll_with_logits(p, t);
  EXPECT_NEAR(g.value(loss).item(), -std::log(1e-12), 1e-9);
  EXPECT_EQ(g.backward(loss).of(z)[0], 0.0);
}

TEST(Graph, SharedParameterAccumulates) {
  Tensor w = Tensor::vector({1.5, -2.0});
  Graph g;
  const NodeId a = g.parameter(w);
  const NodeId b = g.parameter(w);
  const NodeId loss = g.sum(g.hadamard(a, b));
  EXPECT_EQ(g.backward(loss).of(w), Tensor::vector({3.0, -4.0}));
}

// Finite-difference oracle for single ops: loss = sum(op(inputs) (*) R) with
// a fixed random R so every output element gets a distinct upstream weight.
using OpBuilder = std::function<NodeId(Graph&, const std::vector<NodeId>&)>;

void check_op(const char* name, const OpBuilder& op, std::vector<Tensor> inputs, std::uint64_t seed = 7) {
  Rng rng(seed);
  Tensor weights;
  auto build = [&](Graph& g) {
    std::vector<NodeId> ids;
    for (const Tensor& t : inputs) ids.push_back(g.parameter(t));
    const NodeId out = op(g, ids);
    if (weights.empty()) weights = random_tensor(g.value(out).shape(), rng);
    return g.sum(g.hadamard(out, g.constant(weights)));
  };
  Graph graph;
  const GradientTable grads = graph.backward(build(graph));
  for (Tensor& input : inputs) {
    const Tensor numeric = check::numeric_gradient(input, [&] {
      Graph g;
      return g.value(build(g)).item();
    });
    EXPECT_LT(relative_error(grads.of(input), numeric), 1e-6) << name;
  }
}

class OpGradients : public ::testing::TestWithParam<simd::Isa> {
 protected:
  void SetUp() override {
    if (!simd::isa_supported(GetParam())) GTEST_SKIP();
    original_ = simd::kernels().isa;
    simd::select_isa(GetParam());
  }
  void TearDown() override {
    if (simd::isa_supported(GetParam())) simd::select_isa(original_);
  }
  simd::Isa original_ = simd::Isa::Scalar;
};

TEST_P(OpGradients, MatchCentralDifferences) {
  Rng rng(42);
  auto r = [&](Shape s) { return random_tensor(std::move(s), rng); };
  check_op("matmul", [](Graph& g, auto& in) { return g.matmul(in[0], in[1]); }, {r({4, 3}), r({3, 5})});
  check_op("matmul_transposed", [](Graph& g, auto& in) { return g.matmul_transposed(in[0], in[1]); },
           {r({4, 3}), r({5, 3})});
  check_op("add", [](Graph& g, auto& in) { return g.add(in[0], in[1]); }, {r({3, 2}), r({3, 2})});
  check_op("add_scalar", [](Graph& g, auto& in) { return g.add(in[0], in[1]); }, {r({3, 2}), r({1})});
  check_op("hadamard", [](Graph& g, auto& in) { return g.hadamard(in[0], in[1]); }, {r({3, 4}), r({3, 4})});
  check_op("add_row_vector", [](Graph& g, auto& in) { return g.add_row_vector(in[0], in[1]); }, {r({5, 3}), r({3})});
  check_op("mul_row_vector", [](Graph& g, auto& in) { return g.mul_row_vector(in[0], in[1]); }, {r({5, 3}), r({3})});
  check_op("scale", [](Graph& g, auto& in) { return g.scale(in[0], -2.5); }, {r({2, 3})});
  for (Activation a : {Activation::Identity, Activation::Sigmoid, Activation::Tanh, Activation::Relu,
                       Activation::Selu}) {
    check_op(activation_name(a).data(), [a](Graph& g, auto& in) { return g.activation(in[0], a); }, {r({4, 4})});
  }
  check_op("clamp", [](Graph& g, auto& in) { return g.clamp(in[0], -0.5, 0.7); }, {r({6, 3})});
  check_op("columns", [](Graph& g, auto& in) { return g.columns(in[0], 1, 2); }, {r({3, 4})});
  check_op("row_sum", [](Graph& g, auto& in) { return g.row_sum(in[0]); }, {r({3, 4})});
  check_op("row_l1", [](Graph& g, auto& in) { return g.row_l1(in[0]); }, {r({3, 4})});
  check_op("row_l2", [](Graph& g, auto& in) { return g.row_l2(in[0]); }, {r({3, 4})});
  check_op("row_sum_squares", [](Graph& g, auto& in) { return g.row_sum_squares(in[0]); }, {r({3, 4})});
  check_op("sum", [](Graph& g, auto& in) { return g.sum(in[0]); }, {r({3, 4})});
  check_op("mean", [](Graph& g, auto& in) { return g.mean(in[0]); }, {r({3, 4})});
  const std::vector<double> targets = {1, 0, 0, 1, 1};
  check_op("nll_with_logits", [&](Graph& g, auto& in) { return g.nll_with_logits(in[0], targets); }, {r({5, 1})});
}

INSTANTIATE_TEST_SUITE_P(Kernels, OpGradients, ::testing::Values(simd::Isa::Scalar, simd::Isa::Avx2),
                         [](const auto& info) { return std::string(simd::isa_name(info.param)); });

TEST(Graph, ScalarAndAvx2ForwardAgree) {
  if (!simd::isa_supported(simd::Isa::Avx2)) GTEST_SKIP();
  Rng rng(9);
  const Tensor a = random_tensor({37, 19}, rng), b = random_tensor({19, 23}, rng);
  auto run = [&](simd::Isa isa) {
    simd::select_isa(isa);
    Graph g;
    return g.value(g.activation(g.matmul(g.constant(a), g.constant(b)), Activation::Tanh));
  };
  const simd::Isa original = simd::kernels().isa;
  const Tensor scalar = run(simd::Isa::Scalar), avx2 = run(simd::Isa::Avx2);
  simd::select_isa(original);
  EXPECT_LT(max_abs_diff(scalar, avx2), 1e-13);
}

}  // namespace
