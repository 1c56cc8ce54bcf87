#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pwl/baselines.hpp"
#include "pwl/extractor.hpp"
#include "pwl/heads.hpp"

namespace pwl {

enum class ModelKind {
  Logistic,
  Deep,
  PwlStraightforward,
  PwlReallocI,
  PwlReallocII,
  PwlReallocIII,
  PwlReallocIV,
};

inline constexpr ModelKind kAllModelKinds[] = {
    ModelKind::Logistic,    ModelKind::Deep,          ModelKind::PwlStraightforward, ModelKind::PwlReallocI,
    ModelKind::PwlReallocII, ModelKind::PwlReallocIII, ModelKind::PwlReallocIV,
};

/// "logistic", "deep", "pwl-straightforward", "pwl-realloc-I" ... "pwl-realloc-IV".
std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
std::optional<HeadVariant> head_variant_of(ModelKind kind);

/// Meta-learned point-wise linear classifier.
struct PwlParams {
  ExtractorParams extractor;
  HeadConfig head;
  Tensor w;               // universal weight; empty for the straightforward head
  std::optional<Tensor> b;  // absent when the head has no output bias
};

HeadNodes build_pwl(Graph& graph, const PwlParams& params, NodeId x);

/// Architecture of a model. `hidden` and `activation` are ignored for
/// logistic regression; `clamp` applies to reallocation heads only.
struct ModelSpec {
  ModelKind kind = ModelKind::PwlReallocI;
  std::size_t input_dim = 2;
  std::vector<std::size_t> hidden = {64, 64};
  Activation activation = Activation::Tanh;
  std::optional<ClampBounds> clamp;
  bool output_bias = true;

  void validate() const;
};

struct ParameterRef {
  std::string name;
  Tensor* tensor;
};

struct ConstParameterRef {
  std::string name;
  const Tensor* tensor;
};

class Model {
 public:
  using Params = std::variant<LogisticParams, DeepClassifierParams, PwlParams>;

  /// Freshly initialized model; parameters depend only on (spec, seed).
  static Model create(const ModelSpec& spec, std::uint64_t seed);

  /// Wraps existing parameters; throws ConfigError when they do not match.
  Model(ModelSpec spec, Params params);

  const ModelSpec& spec() const { return spec_; }
  ModelKind kind() const { return spec_.kind; }
  std::size_t input_dim() const { return spec_.input_dim; }
  const Params& params() const { return params_; }

  /// False for the deep baseline, whose weights refer to phi.
  bool explains_inputs() const { return spec_.kind != ModelKind::Deep; }

  HeadNodes forward(Graph& graph, NodeId x) const;

  /// Single forward pass over a batch with every per-sample quantity.
  PwlOutput run(const Tensor& x) const;
  /// Probabilities only.
  std::vector<double> predict(const Tensor& x) const;

  double output_bias() const;
  /// Universal weight of a reallocation head, or the logistic weight.
  const Tensor* universal_weight() const;

  /// Set once fit() completes; explanations require a trained model.
  bool trained() const { return trained_; }
  void set_trained(bool trained) { trained_ = trained; }

  /// Trainable tensors in a fixed order with stable names.
  std::vector<ParameterRef> parameters();
  std::vector<ConstParameterRef> parameters() const;

 private:
  void check_consistency() const;

  ModelSpec spec_;
  Params params_;
  bool trained_ = false;
};

}  // namespace pwl
