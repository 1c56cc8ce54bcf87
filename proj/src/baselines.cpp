#include "pwl/baselines.hpp"

#include <string>

#include "pwl/error.hpp"

namespace pwl {
namespace {

HeadNodes linear_head(Graph& graph, NodeId features, NodeId weight, NodeId bias) {
  const Tensor& f = graph.value(features);
  HeadNodes nodes;
  nodes.contributions = graph.mul_row_vector(features, weight);
  nodes.logit = graph.add(graph.row_sum(nodes.contributions), bias);
  nodes.probability = graph.activation(nodes.logit, Activation::Sigmoid);
  nodes.xi = graph.mul_row_vector(graph.constant(Tensor(f.shape(), 1.0)), weight);
  nodes.penalized = nodes.xi;
  return nodes;
}

std::vector<double> probabilities(const Graph& graph, const HeadNodes& nodes) {
  const Tensor& p = graph.value(nodes.probability);
  return {p.values().begin(), p.values().end()};
}

}  // namespace

HeadNodes build_logistic(Graph& graph, const LogisticParams& params, NodeId x) {
  const Tensor& features = graph.value(x);
  if (features.rank() != 2 || features.cols() != params.w.size()) {
    throw DimensionError("logistic model has " + std::to_string(params.w.size()) + " weights, input is " +
                         shape_to_string(features.shape()));
  }
  return linear_head(graph, x, graph.parameter(params.w), graph.parameter(params.b));
}

HeadNodes build_deep(Graph& graph, const DeepClassifierParams& params, NodeId x) {
  const NodeId phi = build_phi(graph, params.extractor, x);
  if (graph.value(phi).cols() != params.w_prime.size()) {
    throw DimensionError("w' has " + std::to_string(params.w_prime.size()) + " entries, phi has width " +
                         std::to_string(graph.value(phi).cols()));
  }
  return linear_head(graph, phi, graph.parameter(params.w_prime), graph.parameter(params.b));
}

std::vector<double> logistic_forward(const LogisticParams& params, const Tensor& x) {
  Graph graph;
  return probabilities(graph, build_logistic(graph, params, graph.constant(x)));
}

std::vector<double> deep_forward(const DeepClassifierParams& params, const Tensor& x) {
  Graph graph;
  return probabilities(graph, build_deep(graph, params, graph.constant(x)));
}

}  // namespace pwl
