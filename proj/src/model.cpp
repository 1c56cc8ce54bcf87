#include "pwl/model.hpp"

#include <cmath>

#include "pwl/error.hpp"
#include "pwl/random.hpp"

namespace pwl {
namespace {

constexpr std::uint64_t kHeadSeedSalt = 0x9E3779B97F4A7C15ULL;

Tensor gaussian_vector(std::size_t n, double sd, Rng& rng) {
  Tensor t({n});
  for (double& v : t.values()) v = rng.normal(0.0, sd);
  return t;
}

template <class Ref, class Extractor>
void append_extractor(std::vector<Ref>& out, Extractor& extractor) {
  for (std::size_t l = 0; l < extractor.layers.size(); ++l) {
    auto& layer = extractor.layers[l];
    out.push_back({"layer" + std::to_string(l) + ".weight", &layer.weight});
    if (layer.bias) out.push_back({"layer" + std::to_string(l) + ".bias", &*layer.bias});
  }
  if (extractor.transform) out.push_back({"transform.weight", &*extractor.transform});
}

template <class Ref, class P>
std::vector<Ref> collect_parameters(P& params) {
  std::vector<Ref> out;
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticParams>) {
          out.push_back({"logistic.w", &p.w});
          out.push_back({"logistic.b", &p.b});
        } else if constexpr (std::is_same_v<T, DeepClassifierParams>) {
          append_extractor(out, p.extractor);
          out.push_back({"deep.w_prime", &p.w_prime});
          out.push_back({"deep.b", &p.b});
        } else {
          append_extractor(out, p.extractor);
          if (!p.w.empty()) out.push_back({"head.w", &p.w});
          if (p.b) out.push_back({"head.b", &*p.b});
        }
      },
      params);
  return out;
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Logistic:
      return "logistic";
    case ModelKind::Deep:
      return "deep";
    case ModelKind::PwlStraightforward:
      return "pwl-straightforward";
    case ModelKind::PwlReallocI:
      return "pwl-realloc-I";
    case ModelKind::PwlReallocII:
      return "pwl-realloc-II";
    case ModelKind::PwlReallocIII:
      return "pwl-realloc-III";
    case ModelKind::PwlReallocIV:
      return "pwl-realloc-IV";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (ModelKind kind : kAllModelKinds) {
    if (model_kind_name(kind) == name) return kind;
  }
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

std::optional<HeadVariant> head_variant_of(ModelKind kind) {
  switch (kind) {
    case ModelKind::PwlStraightforward:
      return HeadVariant::Straightforward;
    case ModelKind::PwlReallocI:
      return HeadVariant::ReallocI;
    case ModelKind::PwlReallocII:
      return HeadVariant::ReallocII;
    case ModelKind::PwlReallocIII:
      return HeadVariant::ReallocIII;
    case ModelKind::PwlReallocIV:
      return HeadVariant::ReallocIV;
    default:
      return std::nullopt;
  }
}

HeadNodes build_pwl(Graph& graph, const PwlParams& params, NodeId x) {
  const std::size_t dim = graph.value(x).cols();
  const NodeId phi = build_phi(graph, params.extractor, x);
  const NodeId eta = build_eta(graph, params.extractor, phi, params.head.variant, dim);
  const NodeId bias = params.b ? graph.parameter(*params.b) : NodeId{};
  if (params.head.variant == HeadVariant::Straightforward) {
    return build_straightforward_head(graph, eta, x, bias);
  }
  return build_realloc_head(graph, params.head.variant, graph.parameter(params.w), eta, x, bias,
                            params.head.clamp);
}

void ModelSpec::validate() const {
  if (input_dim == 0) throw ConfigError("model input_dim must be positive");
  if (kind != ModelKind::Logistic) {
    if (hidden.empty()) throw ConfigError(std::string(model_kind_name(kind)) + " needs at least one hidden layer");
    for (std::size_t units : hidden) {
      if (units == 0) throw ConfigError("hidden layer widths must be positive");
    }
  }
  if (const auto variant = head_variant_of(kind)) {
    HeadConfig{*variant, clamp, output_bias}.validate();
  } else {
    if (clamp) throw ConfigError("clamp bounds are only valid for reallocation heads");
    if (!output_bias) throw ConfigError("baseline models always carry an output bias");
  }
}

Model Model::create(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng head_rng(seed ^ kHeadSeedSalt);
  const std::size_t dim = spec.input_dim;
  switch (spec.kind) {
    case ModelKind::Logistic:
      return Model(spec, LogisticParams{gaussian_vector(dim, 1.0 / std::sqrt(double(dim)), head_rng),
                                        Tensor::scalar(0.0)});
    case ModelKind::Deep: {
      const auto layers = chain_layers(dim, spec.hidden, spec.activation);
      ExtractorParams extractor = init_params(layers, std::nullopt, seed);
      const std::size_t phi = spec.hidden.back();
      Tensor w_prime = gaussian_vector(phi, 1.0 / std::sqrt(double(phi)), head_rng);
      return Model(spec, DeepClassifierParams{std::move(extractor), std::move(w_prime), Tensor::scalar(0.0)});
    }
    default: {
      const HeadVariant variant = *head_variant_of(spec.kind);
      const auto layers = chain_layers(dim, spec.hidden, spec.activation);
      PwlParams params;
      params.extractor = init_params(layers, variant, seed);
      params.head = HeadConfig{variant, spec.clamp, spec.output_bias};
      if (is_reallocation(variant)) params.w = Tensor({dim}, 1.0);
      if (spec.output_bias) params.b = Tensor::scalar(0.0);
      return Model(spec, std::move(params));
    }
  }
}

Model::Model(ModelSpec spec, Params params) : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  check_consistency();
}

void Model::check_consistency() const {
  const std::size_t dim = spec_.input_dim;
  auto fail = [&](const std::string& why) {
    throw ConfigError(std::string(model_kind_name(spec_.kind)) + " parameters inconsistent: " + why);
  };
  auto check_extractor = [&](const ExtractorParams& e) {
    if (e.layers.empty()) return;
    if (e.input_dim() != dim) fail("first layer takes " + std::to_string(e.input_dim()) + " inputs");
    for (std::size_t l = 1; l < e.layers.size(); ++l) {
      if (e.layers[l].weight.cols() != e.layers[l - 1].weight.rows()) fail("layer chain broken at " + std::to_string(l));
    }
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticParams>) {
          if (spec_.kind != ModelKind::Logistic) fail("logistic parameters");
          if (p.w.size() != dim) fail("weight length " + std::to_string(p.w.size()));
        } else if constexpr (std::is_same_v<T, DeepClassifierParams>) {
          if (spec_.kind != ModelKind::Deep) fail("deep parameters");
          check_extractor(p.extractor);
          if (p.w_prime.size() != p.extractor.phi_dim(dim)) fail("w' length does not match phi width");
        } else {
          const auto variant = head_variant_of(spec_.kind);
          if (!variant || *variant != p.head.variant) fail("head variant");
          check_extractor(p.extractor);
          if (!p.extractor.transform) fail("missing eta transform");
          if (p.extractor.transform->rows() != eta_width(*variant, dim) ||
              p.extractor.transform->cols() != p.extractor.phi_dim(dim)) {
            fail("transform shape " + shape_to_string(p.extractor.transform->shape()));
          }
          if (is_reallocation(*variant) && p.w.size() != dim) fail("universal weight length");
          if (!is_reallocation(*variant) && !p.w.empty()) fail("straightforward head has a universal weight");
          if (p.b.has_value() != spec_.output_bias) fail("output bias presence");
        }
      },
      params_);
}

HeadNodes Model::forward(Graph& graph, NodeId x) const {
  const Tensor& input = graph.value(x);
  if (input.rank() != 2 || input.cols() != spec_.input_dim) {
    throw DimensionError(std::string(model_kind_name(spec_.kind)) + " expects " + std::to_string(spec_.input_dim) +
                         " features, got input " + shape_to_string(input.shape()));
  }
  return std::visit(
      [&](const auto& p) -> HeadNodes {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticParams>) {
          return build_logistic(graph, p, x);
        } else if constexpr (std::is_same_v<T, DeepClassifierParams>) {
          return build_deep(graph, p, x);
        } else {
          return build_pwl(graph, p, x);
        }
      },
      params_);
}

PwlOutput Model::run(const Tensor& x) const {
  Graph graph;
  const HeadNodes nodes = forward(graph, graph.constant(x));
  return collect_output(graph, nodes, output_bias());
}

std::vector<double> Model::predict(const Tensor& x) const {
  Graph graph;
  const HeadNodes nodes = forward(graph, graph.constant(x));
  const Tensor& p = graph.value(nodes.probability);
  return {p.values().begin(), p.values().end()};
}

double Model::output_bias() const {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PwlParams>) {
          return p.b ? p.b->item() : 0.0;
        } else {
          return p.b.item();
        }
      },
      params_);
}

const Tensor* Model::universal_weight() const {
  if (const auto* logistic = std::get_if<LogisticParams>(&params_)) return &logistic->w;
  if (const auto* pwl = std::get_if<PwlParams>(&params_)) return pwl->w.empty() ? nullptr : &pwl->w;
  return nullptr;
}

std::vector<ParameterRef> Model::parameters() { return collect_parameters<ParameterRef>(params_); }

std::vector<ConstParameterRef> Model::parameters() const {
  return collect_parameters<ConstParameterRef>(params_);
}

}  // namespace pwl
