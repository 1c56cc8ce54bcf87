#include "pwl/heads.hpp"

#include <cmath>
#include <string>

#include "pwl/error.hpp"

namespace pwl {
namespace {

NodeId finish_logit(Graph& graph, NodeId contributions, NodeId bias) {
  NodeId logit = graph.row_sum(contributions);
  if (bias.valid()) logit = graph.add(logit, bias);
  return logit;
}

std::vector<double> column_values(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

}  // namespace

void HeadConfig::validate() const {
  if (clamp && !is_reallocation(variant)) {
    throw ConfigError("clamp bounds are only valid for reallocation heads");
  }
  if (clamp && !(clamp->min <= clamp->max)) {
    throw ArgumentError("clamp needs min <= max, got [" + std::to_string(clamp->min) + ", " +
                        std::to_string(clamp->max) + "]");
  }
}

HeadNodes build_straightforward_head(Graph& graph, NodeId eta, NodeId x, NodeId bias) {
  if (graph.value(eta).shape() != graph.value(x).shape()) {
    throw DimensionError("straightforward head needs eta and x of equal shape, got " +
                         shape_to_string(graph.value(eta).shape()) + " and " +
                         shape_to_string(graph.value(x).shape()));
  }
  HeadNodes nodes;
  nodes.xi = eta;
  nodes.penalized = eta;
  nodes.contributions = graph.hadamard(eta, x);
  nodes.logit = finish_logit(graph, nodes.contributions, bias);
  nodes.probability = graph.activation(nodes.logit, Activation::Sigmoid);
  return nodes;
}

HeadNodes build_realloc_head(Graph& graph, HeadVariant variant, NodeId w, NodeId eta, NodeId x, NodeId bias,
                             const std::optional<ClampBounds>& clamp) {
  if (!is_reallocation(variant)) throw ConfigError("build_realloc_head called with the straightforward variant");
  const Tensor& features = graph.value(x);
  const std::size_t dim = features.cols();
  if (graph.value(w).size() != dim) {
    throw ConfigError("universal weight has " + std::to_string(graph.value(w).size()) + " entries for " +
                      std::to_string(dim) + " features");
  }
  const Tensor& generated = graph.value(eta);
  if (generated.rows() != features.rows() || generated.cols() != eta_width(variant, dim)) {
    throw ConfigError(std::string(variant_name(variant)) + " needs eta of shape [" +
                      std::to_string(features.rows()) + "x" + std::to_string(eta_width(variant, dim)) +
                      "], got " + shape_to_string(generated.shape()));
  }

  const bool split = variant == HeadVariant::ReallocIII || variant == HeadVariant::ReallocIV;
  const NodeId u = split ? graph.columns(eta, 0, dim) : eta;
  const NodeId v = split ? graph.columns(eta, dim, dim) : NodeId{};

  NodeId pre;
  switch (variant) {
    case HeadVariant::ReallocI:
      pre = graph.hadamard(u, x);
      break;
    case HeadVariant::ReallocII:
      pre = graph.add(u, x);
      break;
    case HeadVariant::ReallocIII:
      pre = graph.hadamard(u, graph.add(x, v));
      break;
    case HeadVariant::ReallocIV:
      pre = graph.add(graph.hadamard(u, x), v);
      break;
    case HeadVariant::Straightforward:
      break;
  }

  HeadNodes nodes;
  nodes.rho = clamp ? graph.clamp(pre, clamp->min, clamp->max) : pre;
  nodes.contributions = graph.mul_row_vector(nodes.rho, w);
  nodes.logit = finish_logit(graph, nodes.contributions, bias);
  nodes.probability = graph.activation(nodes.logit, Activation::Sigmoid);

  const NodeId weighted_u = graph.mul_row_vector(u, w);
  nodes.penalized = weighted_u;
  switch (variant) {
    case HeadVariant::ReallocI:
      nodes.xi = weighted_u;
      break;
    case HeadVariant::ReallocII:
      nodes.xi = graph.mul_row_vector(graph.constant(Tensor(features.shape(), 1.0)), w);
      nodes.offset = weighted_u;
      break;
    case HeadVariant::ReallocIII:
      nodes.xi = weighted_u;
      nodes.offset = graph.hadamard(weighted_u, v);
      break;
    case HeadVariant::ReallocIV:
      nodes.xi = weighted_u;
      nodes.offset = graph.mul_row_vector(v, w);
      break;
    case HeadVariant::Straightforward:
      break;
  }
  return nodes;
}

PwlOutput collect_output(const Graph& graph, const HeadNodes& nodes, double bias) {
  PwlOutput out;
  out.y_hat = column_values(graph.value(nodes.probability));
  out.logit = column_values(graph.value(nodes.logit));
  out.xi = graph.value(nodes.xi);
  if (nodes.offset.valid()) out.offset = graph.value(nodes.offset);
  if (nodes.rho.valid()) out.rho = graph.value(nodes.rho);
  out.contributions = graph.value(nodes.contributions);
  out.bias = bias;
  return out;
}

PwlOutput forward_straightforward(const Tensor& eta, const Tensor& x, double bias) {
  Graph graph;
  const NodeId b = graph.constant(Tensor::scalar(bias));
  return collect_output(graph, build_straightforward_head(graph, graph.constant(eta), graph.constant(x), b), bias);
}

PwlOutput forward_realloc(HeadVariant variant, const Tensor& w, const Tensor& eta, const Tensor& x, double bias,
                          const std::optional<ClampBounds>& clamp) {
  HeadConfig{variant, clamp, true}.validate();
  Graph graph;
  const NodeId b = graph.constant(Tensor::scalar(bias));
  const HeadNodes nodes =
      build_realloc_head(graph, variant, graph.constant(w), graph.constant(eta), graph.constant(x), b, clamp);
  return collect_output(graph, nodes, bias);
}

Tensor extract_contributions(const PwlOutput& output, const Tensor& x, const Tensor* w) {
  if (output.rho) {
    if (w == nullptr) throw ContractError("contributions of a reallocation head need the universal weight");
    const Tensor& rho = *output.rho;
    if (w->size() != rho.cols()) throw DimensionError("universal weight length does not match rho width");
    Tensor c(rho.shape());
    for (std::size_t i = 0; i < rho.rows(); ++i) {
      for (std::size_t j = 0; j < rho.cols(); ++j) c.at(i, j) = (*w)[j] * rho.at(i, j);
    }
    return c;
  }
  if (output.xi.shape() != x.shape()) {
    throw DimensionError("xi " + shape_to_string(output.xi.shape()) + " does not match x " +
                         shape_to_string(x.shape()));
  }
  Tensor c(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = output.xi[i] * x[i];
  return c;
}

std::vector<double> xi_angle_map(const Tensor& xi) {
  if (xi.rank() != 2 || xi.cols() != 2) {
    throw ContractError("angle map needs exactly 2 features, got " + shape_to_string(xi.shape()));
  }
  std::vector<double> angles(xi.rows());
  for (std::size_t i = 0; i < xi.rows(); ++i) angles[i] = std::atan2(xi.at(i, 1), xi.at(i, 0));
  return angles;
}

}  // namespace pwl
