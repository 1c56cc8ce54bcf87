#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pwl/tensor.hpp"

namespace pwl {

enum class Activation { Identity, Sigmoid, Tanh, Relu, Selu };

std::string_view activation_name(Activation kind);
/// Parses "identity", "sigmoid", "tanh", "relu", "selu".
Activation parse_activation(std::string_view name);

/// Fixed self-normalizing constants (Klambauer et al.).
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
inline constexpr double kSeluScale = 1.0507009873554804934193349852946;

/// Logistic function, evaluated without overflow for large |x|.
double sigmoid(double x);

struct NodeId {
  static constexpr std::uint32_t kInvalid = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t index = kInvalid;

  bool valid() const { return index != kInvalid; }
  friend bool operator==(NodeId, NodeId) = default;
};

/// Gradients of a scalar loss with respect to every parameter bound into
/// the graph, keyed by the parameter tensor's address.
class GradientTable {
 public:
  bool contains(const Tensor& parameter) const;
  /// Throws ContractError if the tensor was never bound as a parameter.
  const Tensor& of(const Tensor& parameter) const;
  std::size_t size() const { return entries_.size(); }

 private:
  friend class Graph;
  std::vector<std::pair<const Tensor*, Tensor>> entries_;
};

/// Define-by-run reverse-mode tape. Every op evaluates eagerly and appends
/// one node, so node order is a topological order. Rebuilt for each batch.
///
/// Broadcasting is limited to scalar-with-tensor in add(); row-vector
/// operations are explicit (add_row_vector, mul_row_vector).
class Graph {
 public:
  NodeId constant(Tensor value);
  /// Binds a parameter tensor; it must outlive backward(). Binding the same
  /// tensor twice accumulates both uses into one gradient.
  NodeId parameter(const Tensor& value);

  const Tensor& value(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }

  /// [m x k] . [k x n]
  NodeId matmul(NodeId a, NodeId b);
  /// [m x k] . [n x k]^T, the layout of x . W^T with W stored out x in.
  NodeId matmul_transposed(NodeId a, NodeId b);
  /// Same shapes, or b a one-element scalar.
  NodeId add(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  /// a[m x n] + v[n] on every row.
  NodeId add_row_vector(NodeId a, NodeId v);
  /// a[m x n] (*) v[n] on every row.
  NodeId mul_row_vector(NodeId a, NodeId v);
  NodeId scale(NodeId a, double factor);
  NodeId activation(NodeId a, Activation kind);
  /// Elementwise saturation to [min, max]; gradient 1 on the closed
  /// interval, 0 outside. Throws ArgumentError if min > max.
  NodeId clamp(NodeId a, double min, double max);
  /// Columns [begin, begin + count) of a matrix.
  NodeId columns(NodeId a, std::size_t begin, std::size_t count);
  /// [m x n] -> [m x 1] row sums.
  NodeId row_sum(NodeId a);
  /// [m x n] -> [m x 1] sum of |a|; subgradient 0 at 0.
  NodeId row_l1(NodeId a);
  /// [m x n] -> [m x 1] Euclidean norm; gradient 0 at the zero row.
  NodeId row_l2(NodeId a);
  /// [m x n] -> [m x 1] sum of squares.
  NodeId row_sum_squares(NodeId a);
  NodeId sum(NodeId a);
  NodeId mean(NodeId a);
  /// Mean binary negative log-likelihood of sigmoid(logits) against 0/1
  /// targets, with probabilities clipped to [eps, 1 - eps]. Clipped
  /// samples contribute no gradient.
  NodeId nll_with_logits(NodeId logits, std::span<const double> targets, double eps = 1e-12);

  /// Reverse sweep from a one-element loss node. Each node is visited at
  /// most once, in reverse creation order.
  GradientTable backward(NodeId loss) const;

 private:
  enum class Op : std::uint8_t {
    Constant,
    Parameter,
    MatMul,
    MatMulTransposed,
    Add,
    AddScalar,
    Hadamard,
    AddRowVector,
    MulRowVector,
    Scale,
    Activate,
    Clamp,
    Columns,
    RowSum,
    RowL1,
    RowL2,
    RowSumSquares,
    Sum,
    Mean,
    NllWithLogits,
  };

  struct Node {
    Op op = Op::Constant;
    NodeId lhs;
    NodeId rhs;
    Tensor value;
    bool needs_grad = false;
    const Tensor* parameter = nullptr;
    Activation activation = Activation::Identity;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t offset = 0;
    std::vector<double> aux;
  };

  const Node& node(NodeId id) const;
  NodeId push(Node node);
  void propagate(const Node& n, const Tensor& grad, std::vector<Tensor>& grads) const;

  // deque: values handed out by value() stay valid while nodes are appended
  std::deque<Node> nodes_;
};

}  // namespace pwl
