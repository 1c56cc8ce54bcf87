#include "pwl/extractor.hpp"

#include <cmath>
#include <string>

#include "pwl/error.hpp"
#include "pwl/random.hpp"

namespace pwl {

bool is_reallocation(HeadVariant variant) { return variant != HeadVariant::Straightforward; }

std::size_t eta_width(HeadVariant variant, std::size_t input_dim) {
  return (variant == HeadVariant::ReallocIII || variant == HeadVariant::ReallocIV) ? 2 * input_dim : input_dim;
}

std::string_view variant_name(HeadVariant variant) {
  switch (variant) {
    case HeadVariant::Straightforward:
      return "straightforward";
    case HeadVariant::ReallocI:
      return "realloc-I";
    case HeadVariant::ReallocII:
      return "realloc-II";
    case HeadVariant::ReallocIII:
      return "realloc-III";
    case HeadVariant::ReallocIV:
      return "realloc-IV";
  }
  return "unknown";
}

std::size_t ExtractorParams::input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }

std::size_t ExtractorParams::phi_dim(std::size_t input_dim) const {
  return layers.empty() ? input_dim : layers.back().weight.rows();
}

std::vector<LayerSpec> chain_layers(std::size_t input_dim, std::span<const std::size_t> hidden,
                                    Activation activation) {
  std::vector<LayerSpec> spec;
  std::size_t width = input_dim;
  for (std::size_t units : hidden) {
    spec.push_back({width, units, activation, true});
    width = units;
  }
  return spec;
}

void validate_layers(std::span<const LayerSpec> spec) {
  if (spec.empty()) throw ConfigError("feature extractor needs at least one layer");
  for (std::size_t l = 0; l < spec.size(); ++l) {
    if (spec[l].input_dim == 0 || spec[l].output_dim == 0) {
      throw ConfigError("layer " + std::to_string(l) + " has a zero dimension");
    }
    if (l > 0 && spec[l - 1].output_dim != spec[l].input_dim) {
      throw ConfigError("layer " + std::to_string(l) + " expects " + std::to_string(spec[l].input_dim) +
                        " inputs but layer " + std::to_string(l - 1) + " produces " +
                        std::to_string(spec[l - 1].output_dim));
    }
  }
}

double init_stddev(Activation activation, std::size_t fan_in) {
  const double gain = activation == Activation::Relu ? 2.0 : 1.0;
  return std::sqrt(gain / static_cast<double>(fan_in));
}

ExtractorParams init_params(std::span<const LayerSpec> spec, std::optional<HeadVariant> head,
                            std::uint64_t seed) {
  validate_layers(spec);
  Rng rng(seed);
  ExtractorParams params;
  for (const LayerSpec& layer : spec) {
    Tensor weight({layer.output_dim, layer.input_dim});
    const double sd = init_stddev(layer.activation, layer.input_dim);
    for (double& v : weight.values()) v = rng.normal(0.0, sd);
    std::optional<Tensor> bias;
    if (layer.has_bias) bias = Tensor({layer.output_dim});
    params.layers.push_back({std::move(weight), std::move(bias), layer.activation});
  }
  if (head) {
    const std::size_t phi = spec.back().output_dim;
    Tensor transform({eta_width(*head, spec.front().input_dim), phi});
    const double sd = init_stddev(Activation::Identity, phi);
    for (double& v : transform.values()) v = rng.normal(0.0, sd);
    params.transform = std::move(transform);
  }
  return params;
}

NodeId build_phi(Graph& graph, const ExtractorParams& params, NodeId x) {
  NodeId h = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    const std::size_t width = graph.value(h).cols();
    if (width != layer.weight.cols()) {
      throw DimensionError("layer " + std::to_string(l) + " expects " + std::to_string(layer.weight.cols()) +
                           " inputs, got " + std::to_string(width));
    }
    h = graph.matmul_transposed(h, graph.parameter(layer.weight));
    if (layer.bias) h = graph.add_row_vector(h, graph.parameter(*layer.bias));
    h = graph.activation(h, layer.activation);
  }
  return h;
}

NodeId build_eta(Graph& graph, const ExtractorParams& params, NodeId phi, HeadVariant head,
                 std::size_t input_dim) {
  if (!params.transform) throw ConfigError("extractor has no eta transform");
  const Tensor& transform = *params.transform;
  if (transform.rows() != eta_width(head, input_dim)) {
    throw ConfigError("transform has " + std::to_string(transform.rows()) + " rows but " +
                      std::string(variant_name(head)) + " with " + std::to_string(input_dim) +
                      " features needs " + std::to_string(eta_width(head, input_dim)));
  }
  if (graph.value(phi).cols() != transform.cols()) {
    throw DimensionError("transform expects phi width " + std::to_string(transform.cols()) + ", got " +
                         std::to_string(graph.value(phi).cols()));
  }
  return graph.matmul_transposed(phi, graph.parameter(transform));
}

Tensor forward_phi(const ExtractorParams& params, const Tensor& x) {
  Graph graph;
  return graph.value(build_phi(graph, params, graph.constant(x)));
}

Tensor forward_eta(const ExtractorParams& params, const Tensor& phi, HeadVariant head, std::size_t input_dim) {
  Graph graph;
  return graph.value(build_eta(graph, params, graph.constant(phi), head, input_dim));
}

}  // namespace pwl
