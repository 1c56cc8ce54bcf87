#pragma once

#include <vector>

#include "pwl/extractor.hpp"
#include "pwl/heads.hpp"

namespace pwl {

/// sigma(w . x + b)
struct LogisticParams {
  Tensor w;
  Tensor b = Tensor::scalar(0.0);
};

/// sigma(w' . phi(x) + b); the extractor carries no eta transform.
struct DeepClassifierParams {
  ExtractorParams extractor;
  Tensor w_prime;
  Tensor b = Tensor::scalar(0.0);
};

/// Logistic regression expressed as a head: xi = w for every sample,
/// contributions w (*) x. Shares the row-sum logit path of the
/// reallocation heads.
HeadNodes build_logistic(Graph& graph, const LogisticParams& params, NodeId x);

/// Deep classifier; xi and contributions refer to phi, not to x, and the
/// regularizer acts on w'.
HeadNodes build_deep(Graph& graph, const DeepClassifierParams& params, NodeId x);

std::vector<double> logistic_forward(const LogisticParams& params, const Tensor& x);
std::vector<double> deep_forward(const DeepClassifierParams& params, const Tensor& x);

}  // namespace pwl
