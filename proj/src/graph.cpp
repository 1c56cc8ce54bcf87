#include "pwl/graph.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "pwl/error.hpp"
#include "pwl/simd/kernels.hpp"

namespace pwl {
namespace {

bool is_matrix(const Tensor& t) { return t.rank() == 2; }

void require_matrix(const Tensor& t, std::string_view op) {
  if (!is_matrix(t)) {
    throw DimensionError(std::string(op) + " needs a matrix, got " + shape_to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, std::string_view op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + " shape mismatch: " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
}

void require_row_vector(const Tensor& a, const Tensor& v, std::string_view op) {
  require_matrix(a, op);
  if (v.size() != a.cols() || v.rows() != 1) {
    throw DimensionError(std::string(op) + " needs a vector of length " + std::to_string(a.cols()) +
                         ", got " + shape_to_string(v.shape()));
  }
}

double activate(Activation kind, double x) {
  switch (kind) {
    case Activation::Identity:
      return x;
    case Activation::Sigmoid:
      return sigmoid(x);
    case Activation::Tanh:
      return std::tanh(x);
    case Activation::Relu:
      return x > 0.0 ? x : 0.0;
    case Activation::Selu:
      return x > 0.0 ? kSeluScale * x : kSeluScale * kSeluAlpha * std::expm1(x);
  }
  return x;
}

// Derivative from the input x and output y of the activation.
double activation_slope(Activation kind, double x, double y) {
  switch (kind) {
    case Activation::Identity:
      return 1.0;
    case Activation::Sigmoid:
      return y * (1.0 - y);
    case Activation::Tanh:
      return 1.0 - y * y;
    case Activation::Relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::Selu:
      return x > 0.0 ? kSeluScale : y + kSeluScale * kSeluAlpha;
  }
  return 1.0;
}

// -log(p) of the clipped probability assigned to the target, from the logit.
double clipped_nll(double z, double target, double eps) {
  // softplus(z) - t z == -[t log s(z) + (1 - t) log(1 - s(z))]
  const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  const double raw = softplus - target * z;
  return std::clamp(raw, -std::log1p(-eps), -std::log(eps));
}

Tensor& grad_slot(std::vector<Tensor>& grads, NodeId id, const Shape& shape) {
  Tensor& slot = grads[id.index];
  if (slot.empty()) slot = Tensor(shape);
  return slot;
}

}  // namespace

std::string_view activation_name(Activation kind) {
  switch (kind) {
    case Activation::Identity:
      return "identity";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Tanh:
      return "tanh";
    case Activation::Relu:
      return "relu";
    case Activation::Selu:
      return "selu";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  for (Activation kind : {Activation::Identity, Activation::Sigmoid, Activation::Tanh, Activation::Relu,
                          Activation::Selu}) {
    if (activation_name(kind) == name) return kind;
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool GradientTable::contains(const Tensor& parameter) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == &parameter; });
}

const Tensor& GradientTable::of(const Tensor& parameter) const {
  for (const auto& [key, grad] : entries_) {
    if (key == &parameter) return grad;
  }
  throw ContractError("tensor " + shape_to_string(parameter.shape()) + " was not bound as a graph parameter");
}

const Graph::Node& Graph::node(NodeId id) const {
  if (!id.valid() || id.index >= nodes_.size()) {
    throw ContractError("node id " + std::to_string(id.index) + " does not belong to this graph");
  }
  return nodes_[id.index];
}

NodeId Graph::push(Node n) {
  assert(n.value.all_finite() && "non-finite value produced by forward pass");
  if (n.lhs.valid()) n.needs_grad = n.needs_grad || nodes_[n.lhs.index].needs_grad;
  if (n.rhs.valid()) n.needs_grad = n.needs_grad || nodes_[n.rhs.index].needs_grad;
  nodes_.push_back(std::move(n));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Graph::value(NodeId id) const { return node(id).value; }

NodeId Graph::constant(Tensor value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Graph::parameter(const Tensor& value) {
  Node n;
  n.op = Op::Parameter;
  n.value = value;
  n.parameter = &value;
  n.needs_grad = true;
  return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& lhs = value(a);
  const Tensor& rhs = value(b);
  require_matrix(lhs, "matmul");
  require_matrix(rhs, "matmul");
  if (lhs.cols() != rhs.rows()) {
    throw DimensionError("matmul inner dimensions differ: " + shape_to_string(lhs.shape()) + " . " +
                         shape_to_string(rhs.shape()));
  }
  const auto& k = simd::kernels();
  const std::size_t m = lhs.rows(), inner = lhs.cols(), n_cols = rhs.cols();
  Tensor out({m, n_cols});
  for (std::size_t i = 0; i < m; ++i) {
    double* out_row = out.data() + i * n_cols;
    for (std::size_t p = 0; p < inner; ++p) k.axpy(lhs.at(i, p), rhs.data() + p * n_cols, out_row, n_cols);
  }
  return push({.op = Op::MatMul, .lhs = a, .rhs = b, .value = std::move(out)});
}

NodeId Graph::matmul_transposed(NodeId a, NodeId b) {
  const Tensor& lhs = value(a);
  const Tensor& rhs = value(b);
  require_matrix(lhs, "matmul_transposed");
  require_matrix(rhs, "matmul_transposed");
  if (lhs.cols() != rhs.cols()) {
    throw DimensionError("matmul_transposed inner dimensions differ: " + shape_to_string(lhs.shape()) +
                         " . " + shape_to_string(rhs.shape()) + "^T");
  }
  const auto& k = simd::kernels();
  const std::size_t m = lhs.rows(), inner = lhs.cols(), n_cols = rhs.rows();
  Tensor out({m, n_cols});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n_cols; ++j) {
      out.at(i, j) = k.dot(lhs.data() + i * inner, rhs.data() + j * inner, inner);
    }
  }
  return push({.op = Op::MatMulTransposed, .lhs = a, .rhs = b, .value = std::move(out)});
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& lhs = value(a);
  const Tensor& rhs = value(b);
  if (rhs.size() == 1 && lhs.shape() != rhs.shape()) {
    Tensor out = lhs;
    const double s = rhs[0];
    for (double& v : out.values()) v += s;
    return push({.op = Op::AddScalar, .lhs = a, .rhs = b, .value = std::move(out)});
  }
  require_same_shape(lhs, rhs, "add");
  Tensor out(lhs.shape());
  simd::kernels().add(lhs.data(), rhs.data(), out.data(), out.size());
  return push({.op = Op::Add, .lhs = a, .rhs = b, .value = std::move(out)});
}

NodeId Graph::hadamard(NodeId a, NodeId b) {
  const Tensor& lhs = value(a);
  const Tensor& rhs = value(b);
  require_same_shape(lhs, rhs, "hadamard");
  Tensor out(lhs.shape());
  simd::kernels().mul(lhs.data(), rhs.data(), out.data(), out.size());
  return push({.op = Op::Hadamard, .lhs = a, .rhs = b, .value = std::move(out)});
}

NodeId Graph::add_row_vector(NodeId a, NodeId v) {
  const Tensor& lhs = value(a);
  const Tensor& vec = value(v);
  require_row_vector(lhs, vec, "add_row_vector");
  const auto& k = simd::kernels();
  Tensor out(lhs.shape());
  for (std::size_t i = 0; i < lhs.rows(); ++i) {
    k.add(lhs.data() + i * lhs.cols(), vec.data(), out.data() + i * lhs.cols(), lhs.cols());
  }
  return push({.op = Op::AddRowVector, .lhs = a, .rhs = v, .value = std::move(out)});
}

NodeId Graph::mul_row_vector(NodeId a, NodeId v) {
  const Tensor& lhs = value(a);
  const Tensor& vec = value(v);
  require_row_vector(lhs, vec, "mul_row_vector");
  const auto& k = simd::kernels();
  Tensor out(lhs.shape());
  for (std::size_t i = 0; i < lhs.rows(); ++i) {
    k.mul(lhs.data() + i * lhs.cols(), vec.data(), out.data() + i * lhs.cols(), lhs.cols());
  }
  return push({.op = Op::MulRowVector, .lhs = a, .rhs = v, .value = std::move(out)});
}

NodeId Graph::scale(NodeId a, double factor) {
  const Tensor& in = value(a);
  Tensor out(in.shape());
  simd::kernels().scale(factor, in.data(), out.data(), out.size());
  return push({.op = Op::Scale, .lhs = a, .value = std::move(out), .lo = factor});
}

NodeId Graph::activation(NodeId a, Activation kind) {
  Tensor out = value(a);
  for (double& v : out.values()) v = activate(kind, v);
  return push({.op = Op::Activate, .lhs = a, .value = std::move(out), .activation = kind});
}

NodeId Graph::clamp(NodeId a, double min, double max) {
  if (!(min <= max)) {
    throw ArgumentError("clamp bounds need min <= max, got [" + std::to_string(min) + ", " +
                        std::to_string(max) + "]");
  }
  Tensor out = value(a);
  for (double& v : out.values()) v = v < min ? min : (max < v ? max : v);
  return push({.op = Op::Clamp, .lhs = a, .value = std::move(out), .lo = min, .hi = max});
}

NodeId Graph::columns(NodeId a, std::size_t begin, std::size_t count) {
  const Tensor& in = value(a);
  require_matrix(in, "columns");
  if (count == 0 || begin + count > in.cols()) {
    throw DimensionError("columns [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") out of range for " + shape_to_string(in.shape()));
  }
  Tensor out({in.rows(), count});
  for (std::size_t i = 0; i < in.rows(); ++i) {
    std::copy_n(in.data() + i * in.cols() + begin, count, out.data() + i * count);
  }
  return push({.op = Op::Columns, .lhs = a, .value = std::move(out), .offset = begin});
}

NodeId Graph::row_sum(NodeId a) {
  const Tensor& in = value(a);
  require_matrix(in, "row_sum");
  Tensor out({in.rows(), 1});
  // Sequential summation keeps row sums identical to the scalar dot route.
  for (std::size_t i = 0; i < in.rows(); ++i) {
    double acc = 0.0;
    for (double v : in.row(i)) acc += v;
    out[i] = acc;
  }
  return push({.op = Op::RowSum, .lhs = a, .value = std::move(out)});
}

NodeId Graph::row_l1(NodeId a) {
  const Tensor& in = value(a);
  require_matrix(in, "row_l1");
  Tensor out({in.rows(), 1});
  for (std::size_t i = 0; i < in.rows(); ++i) {
    double acc = 0.0;
    for (double v : in.row(i)) acc += std::abs(v);
    out[i] = acc;
  }
  return push({.op = Op::RowL1, .lhs = a, .value = std::move(out)});
}

NodeId Graph::row_l2(NodeId a) {
  const Tensor& in = value(a);
  require_matrix(in, "row_l2");
  Tensor out({in.rows(), 1});
  for (std::size_t i = 0; i < in.rows(); ++i) {
    const auto r = in.row(i);
    out[i] = std::sqrt(simd::kernels().dot(r.data(), r.data(), r.size()));
  }
  return push({.op = Op::RowL2, .lhs = a, .value = std::move(out)});
}

NodeId Graph::row_sum_squares(NodeId a) {
  const Tensor& in = value(a);
  require_matrix(in, "row_sum_squares");
  Tensor out({in.rows(), 1});
  for (std::size_t i = 0; i < in.rows(); ++i) {
    const auto r = in.row(i);
    out[i] = simd::kernels().dot(r.data(), r.data(), r.size());
  }
  return push({.op = Op::RowSumSquares, .lhs = a, .value = std::move(out)});
}

NodeId Graph::sum(NodeId a) {
  const Tensor& in = value(a);
  return push({.op = Op::Sum, .lhs = a, .value = Tensor::scalar(simd::kernels().sum(in.data(), in.size()))});
}

NodeId Graph::mean(NodeId a) {
  const Tensor& in = value(a);
  const double total = simd::kernels().sum(in.data(), in.size());
  return push({.op = Op::Mean, .lhs = a, .value = Tensor::scalar(total / static_cast<double>(in.size()))});
}

NodeId Graph::nll_with_logits(NodeId logits, std::span<const double> targets, double eps) {
  const Tensor& z = value(logits);
  if (z.size() != targets.size()) {
    throw DimensionError("nll_with_logits: " + std::to_string(z.size()) + " logits but " +
                         std::to_string(targets.size()) + " targets");
  }
  if (!(eps > 0.0 && eps < 0.5)) throw ArgumentError("nll clipping epsilon must lie in (0, 0.5)");
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (targets[i] != 0.0 && targets[i] != 1.0) {
      throw DataError("target " + std::to_string(targets[i]) + " at index " + std::to_string(i) +
                      " is not 0 or 1");
    }
    total += clipped_nll(z[i], targets[i], eps);
  }
  Node n{.op = Op::NllWithLogits,
         .lhs = logits,
         .value = Tensor::scalar(total / static_cast<double>(z.size())),
         .lo = eps};
  n.aux.assign(targets.begin(), targets.end());
  return push(std::move(n));
}

GradientTable Graph::backward(NodeId loss) const {
  const Node& root = node(loss);
  if (root.value.size() != 1) {
    throw ContractError("backward needs a one-element loss, got " + shape_to_string(root.value.shape()));
  }
  std::vector<Tensor> grads(nodes_.size());
  grads[loss.index] = Tensor(root.value.shape(), 1.0);

  GradientTable table;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (!n.needs_grad || grads[i].empty()) continue;
    if (n.op == Op::Parameter) {
      auto existing = std::find_if(table.entries_.begin(), table.entries_.end(),
                                   [&](const auto& e) { return e.first == n.parameter; });
      if (existing == table.entries_.end()) {
        table.entries_.emplace_back(n.parameter, std::move(grads[i]));
      } else {
        simd::kernels().add(existing->second.data(), grads[i].data(), existing->second.data(),
                             existing->second.size());
      }
      continue;
    }
    propagate(n, grads[i], grads);
    grads[i] = Tensor();
  }
  return table;
}

void Graph::propagate(const Node& n, const Tensor& grad, std::vector<Tensor>& grads) const {
  const auto& k = simd::kernels();
  const bool lhs_grad = n.lhs.valid() && nodes_[n.lhs.index].needs_grad;
  const bool rhs_grad = n.rhs.valid() && nodes_[n.rhs.index].needs_grad;
  const Tensor* a = n.lhs.valid() ? &nodes_[n.lhs.index].value : nullptr;
  const Tensor* b = n.rhs.valid() ? &nodes_[n.rhs.index].value : nullptr;

  switch (n.op) {
    case Op::Constant:
    case Op::Parameter:
      break;

    case Op::MatMul: {
      // C = A B: dA = dC B^T, dB = A^T dC
      const std::size_t m = a->rows(), inner = a->cols(), cols = b->cols();
      if (lhs_grad) {
        Tensor& ga = grad_slot(grads, n.lhs, a->shape());
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < inner; ++p) {
            ga.at(i, p) += k.dot(grad.data() + i * cols, b->data() + p * cols, cols);
          }
        }
      }
      if (rhs_grad) {
        Tensor& gb = grad_slot(grads, n.rhs, b->shape());
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < inner; ++p) {
            k.axpy(a->at(i, p), grad.data() + i * cols, gb.data() + p * cols, cols);
          }
        }
      }
      break;
    }

    case Op::MatMulTransposed: {
      // C = A B^T: dA = dC B, dB = dC^T A
      const std::size_t m = a->rows(), inner = a->cols(), cols = b->rows();
      if (lhs_grad) {
        Tensor& ga = grad_slot(grads, n.lhs, a->shape());
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < cols; ++j) {
            k.axpy(grad.at(i, j), b->data() + j * inner, ga.data() + i * inner, inner);
          }
        }
      }
      if (rhs_grad) {
        Tensor& gb = grad_slot(grads, n.rhs, b->shape());
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < cols; ++j) {
            k.axpy(grad.at(i, j), a->data() + i * inner, gb.data() + j * inner, inner);
          }
        }
      }
      break;
    }

    case Op::Add: {
      if (lhs_grad) {
        Tensor& ga = grad_slot(grads, n.lhs, a->shape());
        k.add(ga.data(), grad.data(), ga.data(), ga.size());
      }
      if (rhs_grad) {
        Tensor& gb = grad_slot(grads, n.rhs, b->shape());
        k.add(gb.data(), grad.data(), gb.data(), gb.size());
      }
      break;
    }

    case Op::AddScalar: {
      if (lhs_grad) {
        Tensor& ga = grad_slot(grads, n.lhs, a->shape());
        k.add(ga.data(), grad.data(), ga.data(), ga.size());
      }
      if (rhs_grad) grad_slot(grads, n.rhs, b->shape())[0] += k.sum(grad.data(), grad.size());
      break;
    }

    case Op::Hadamard: {
      if (lhs_grad) k.mul_acc(grad.data(), b->data(), grad_slot(grads, n.lhs, a->shape()).data(), grad.size());
      if (rhs_grad) k.mul_acc(grad.data(), a->data(), grad_slot(grads, n.rhs, b->shape()).data(), grad.size());
      break;
    }

    case Op::AddRowVector: {
      if (lhs_grad) {
        Tensor& ga = grad_slot(grads, n.lhs, a->shape());
        k.add(ga.data(), grad.data(), ga.data(), ga.size());
      }
      if (rhs_grad) {
        Tensor& gv = grad_slot(grads, n.rhs, b->shape());
        for (std::size_t i = 0; i < grad.rows(); ++i) {
          k.add(gv.data(), grad.data() + i * grad.cols(), gv.data(), gv.size());
        }
      }
      break;
    }

    case Op::MulRowVector: {
      const std::size_t cols = a->cols();
      if (lhs_grad) {
        Tensor& ga = grad_slot(grads, n.lhs, a->shape());
        for (std::size_t i = 0; i < a->rows(); ++i) {
          k.mul_acc(grad.data() + i * cols, b->data(), ga.data() + i * cols, cols);
        }
      }
      if (rhs_grad) {
        Tensor& gv = grad_slot(grads, n.rhs, b->shape());
        for (std::size_t i = 0; i < a->rows(); ++i) {
          k.mul_acc(grad.data() + i * cols, a->data() + i * cols, gv.data(), cols);
        }
      }
      break;
    }

    case Op::Scale: {
      if (lhs_grad) k.axpy(n.lo, grad.data(), grad_slot(grads, n.lhs, a->shape()).data(), grad.size());
      break;
    }

    case Op::Activate: {
      if (!lhs_grad) break;
      Tensor& ga = grad_slot(grads, n.lhs, a->shape());
      for (std::size_t i = 0; i < grad.size(); ++i) {
        ga[i] += grad[i] * activation_slope(n.activation, (*a)[i], n.value[i]);
      }
      break;
    }

    case Op::Clamp: {
      if (!lhs_grad) break;
      Tensor& ga = grad_slot(grads, n.lhs, a->shape());
      for (std::size_t i = 0; i < grad.size(); ++i) {
        const double x = (*a)[i];
        if (n.lo <= x && x <= n.hi) ga[i] += grad[i];
      }
      break;
    }

    case Op::Columns: {
      if (!lhs_grad) break;
      Tensor& ga = grad_slot(grads, n.lhs, a->shape());
      const std::size_t count = grad.cols();
      for (std::size_t i = 0; i < grad.rows(); ++i) {
        double* dst = ga.data() + i * a->cols() + n.offset;
        k.add(dst, grad.data() + i * count, dst, count);
      }
      break;
    }

    case Op::RowSum:
    case Op::RowL1:
    case Op::RowL2:
    case Op::RowSumSquares: {
      if (!lhs_grad) break;
      Tensor& ga = grad_slot(grads, n.lhs, a->shape());
      const std::size_t cols = a->cols();
      for (std::size_t i = 0; i < a->rows(); ++i) {
        const double g = grad[i];
        const double* x = a->data() + i * cols;
        double* dst = ga.data() + i * cols;
        switch (n.op) {
          case Op::RowSum:
            for (std::size_t j = 0; j < cols; ++j) dst[j] += g;
            break;
          case Op::RowL1:
            for (std::size_t j = 0; j < cols; ++j) dst[j] += g * static_cast<double>((x[j] > 0.0) - (x[j] < 0.0));
            break;
          case Op::RowL2:
            if (n.value[i] > 0.0) k.axpy(g / n.value[i], x, dst, cols);
            break;
          default:
            k.axpy(2.0 * g, x, dst, cols);
            break;
        }
      }
      break;
    }

    case Op::Sum: {
      if (!lhs_grad) break;
      Tensor& ga = grad_slot(grads, n.lhs, a->shape());
      for (double& v : ga.values()) v += grad[0];
      break;
    }

    case Op::Mean: {
      if (!lhs_grad) break;
      Tensor& ga = grad_slot(grads, n.lhs, a->shape());
      const double share = grad[0] / static_cast<double>(a->size());
      for (double& v : ga.values()) v += share;
      break;
    }

    case Op::NllWithLogits: {
      if (!lhs_grad) break;
      Tensor& ga = grad_slot(grads, n.lhs, a->shape());
      const double eps = n.lo;
      const double floor = -std::log1p(-eps);
      const double ceiling = -std::log(eps);
      const double share = grad[0] / static_cast<double>(a->size());
      for (std::size_t i = 0; i < a->size(); ++i) {
        const double z = (*a)[i];
        const double t = n.aux[i];
        const double raw = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - t * z;
        if (raw > floor && raw < ceiling) ga[i] += share * (sigmoid(z) - t);
      }
      break;
    }
  }
}

}  // namespace pwl
