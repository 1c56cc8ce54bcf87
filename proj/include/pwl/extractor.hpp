#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pwl/graph.hpp"
#include "pwl/head_variant.hpp"
#include "pwl/tensor.hpp"

namespace pwl {

struct LayerSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Activation activation = Activation::Tanh;
  bool has_bias = true;
};

/// Hidden layer f(W x + b); weight is stored [output_dim x input_dim].
struct DenseLayer {
  Tensor weight;
  std::optional<Tensor> bias;
  Activation activation = Activation::Tanh;
};

/// Hidden stack producing phi, plus the bias-free transform eta = W~ phi.
/// The transform is absent for the deep baseline.
struct ExtractorParams {
  std::vector<DenseLayer> layers;
  std::optional<Tensor> transform;

  /// Input width expected by the first layer (0 for an empty stack).
  std::size_t input_dim() const;
  /// Width of phi; equals the input width for an empty stack.
  std::size_t phi_dim(std::size_t input_dim) const;
};

/// Hidden specs `input_dim -> hidden[0] -> ... -> hidden.back()`.
std::vector<LayerSpec> chain_layers(std::size_t input_dim, std::span<const std::size_t> hidden,
                                    Activation activation);

/// Throws ConfigError on an empty stack or broken dimension chaining.
void validate_layers(std::span<const LayerSpec> spec);

/// Standard deviation of the initial weights for a layer: sqrt(2/fan_in)
/// for relu, sqrt(1/fan_in) otherwise (selu gets the LeCun scale it needs
/// to self-normalize).
double init_stddev(Activation activation, std::size_t fan_in);

/// Gaussian fan-in initialization, zero biases. The transform (present when
/// `head` is set) has eta_width(head, D) rows and LeCun scaling. The result
/// depends only on (spec, head, seed).
ExtractorParams init_params(std::span<const LayerSpec> spec, std::optional<HeadVariant> head,
                            std::uint64_t seed);

/// phi(x) for a batch x[N x D] on a graph.
NodeId build_phi(Graph& graph, const ExtractorParams& params, NodeId x);

/// eta = phi . W~^T for a batch phi[N x D']; K must equal eta_width(head, D).
NodeId build_eta(Graph& graph, const ExtractorParams& params, NodeId phi, HeadVariant head,
                 std::size_t input_dim);

Tensor forward_phi(const ExtractorParams& params, const Tensor& x);
Tensor forward_eta(const ExtractorParams& params, const Tensor& phi, HeadVariant head, std::size_t input_dim);

}  // namespace pwl
