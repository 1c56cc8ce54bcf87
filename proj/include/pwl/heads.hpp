#pragma once

#include <optional>
#include <vector>

#include "pwl/graph.hpp"
#include "pwl/head_variant.hpp"
#include "pwl/tensor.hpp"

namespace pwl {

/// Saturation applied to the reallocated features; defaults to [0, 1].
struct ClampBounds {
  double min = 0.0;
  double max = 1.0;
};

struct HeadConfig {
  HeadVariant variant = HeadVariant::ReallocI;
  std::optional<ClampBounds> clamp;
  bool has_output_bias = true;

  /// Clamp only for reallocation variants, with min <= max.
  void validate() const;
};

/// Graph nodes produced by a head. Invalid ids mark quantities the head
/// does not define (rho for the straightforward head, offset for type I).
struct HeadNodes {
  NodeId logit;          // [N x 1]
  NodeId probability;    // [N x 1]
  NodeId xi;             // [N x D] multiplicative per-sample weight
  NodeId offset;         // [N x D] input-dependent additive part of the logit
  NodeId rho;            // [N x D] reallocated features
  NodeId contributions;  // [N x D]; row sums plus bias give the logit
  NodeId penalized;      // [N x D] quantity the xi regularizer acts on
};

/// Per-sample view of a head's forward pass.
///
/// For the reallocation variants xi and offset decompose the logit as
/// sum(xi (*) x) + sum(offset) + b (exact without a clamp):
///   I:   xi = w (*) u
///   II:  xi = w,        offset = w (*) u
///   III: xi = w (*) u,  offset = w (*) u (*) v
///   IV:  xi = w (*) u,  offset = w (*) v
/// The type II pair can also be read the other way round (w (*) u as the
/// generated weight, w (*) x as the bias term); both are available here.
/// contributions = w (*) rho is exact for every variant, clamp included.
struct PwlOutput {
  std::vector<double> y_hat;
  std::vector<double> logit;
  Tensor xi;
  std::optional<Tensor> offset;
  std::optional<Tensor> rho;
  Tensor contributions;
  double bias = 0.0;
};

/// xi = eta; logit = sum(eta (*) x) + b.
HeadNodes build_straightforward_head(Graph& graph, NodeId eta, NodeId x, NodeId bias);

/// Reallocation head over the universal weight w[D]. For III/IV eta is
/// [N x 2D] and splits into (u, v) column halves.
HeadNodes build_realloc_head(Graph& graph, HeadVariant variant, NodeId w, NodeId eta, NodeId x, NodeId bias,
                             const std::optional<ClampBounds>& clamp);

/// Reads the values of `nodes` out of a finished forward pass.
PwlOutput collect_output(const Graph& graph, const HeadNodes& nodes, double bias);

PwlOutput forward_straightforward(const Tensor& eta, const Tensor& x, double bias = 0.0);
PwlOutput forward_realloc(HeadVariant variant, const Tensor& w, const Tensor& eta, const Tensor& x,
                          double bias = 0.0, const std::optional<ClampBounds>& clamp = std::nullopt);

/// Additive per-feature terms: w (*) rho when rho is present (w must be
/// given), else xi (*) x.
Tensor extract_contributions(const PwlOutput& output, const Tensor& x, const Tensor* w);

/// atan2(xi_2, xi_1) per sample; xi must have exactly two columns.
std::vector<double> xi_angle_map(const Tensor& xi);

}  // namespace pwl
