#include "pwl/run_config.hpp"

#include <cmath>
#include <type_traits>

#include "config_json.hpp"
#include "pwl/csv.hpp"
#include "pwl/error.hpp"

namespace pwl {

namespace detail {

ObjectReader::ObjectReader(const Json& object, std::string path) : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) throw ConfigError((path_.empty() ? "config" : path_) + " must be an object");
}

const Json* ObjectReader::find(const std::string& key) {
  seen_.insert(key);
  const auto it = object_.find(key);
  return it == object_.end() ? nullptr : &*it;
}

template <typename T>
void ObjectReader::read(const std::string& key, T& out) {
  const Json* value = find(key);
  if (value == nullptr) return;
  auto fail = [&](const char* expected) { throw ConfigError(field(key) + " must be " + expected); };
  if constexpr (std::is_same_v<T, bool>) {
    if (!value->is_boolean()) fail("true or false");
    out = value->get<bool>();
  } else if constexpr (std::is_same_v<T, std::size_t>) {
    if (!value->is_number_unsigned()) fail("a non-negative integer");
    out = value->get<std::size_t>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!value->is_number()) fail("a number");
    out = value->get<double>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!value->is_string()) fail("a string");
    out = value->get<std::string>();
  } else if constexpr (std::is_same_v<T, std::optional<std::string>>) {
    if (value->is_null()) {
      out.reset();
    } else if (value->is_string()) {
      out = value->get<std::string>();
    } else {
      fail("a string or null");
    }
  } else {
    static_assert(sizeof(T) == 0, "unsupported config field type");
  }
}

template void ObjectReader::read<bool>(const std::string&, bool&);
template void ObjectReader::read<std::size_t>(const std::string&, std::size_t&);
template void ObjectReader::read<double>(const std::string&, double&);
template void ObjectReader::read<std::string>(const std::string&, std::string&);
template void ObjectReader::read<std::optional<std::string>>(const std::string&, std::optional<std::string>&);

void ObjectReader::finish() const {
  for (const auto& [key, value] : object_.items()) {
    if (!seen_.contains(key)) throw ConfigError("unknown config key " + field(key));
  }
}

Json model_spec_to_json(const ModelSpec& spec) {
  Json j;
  j["kind"] = std::string(model_kind_name(spec.kind));
  j["input_dim"] = spec.input_dim;
  j["hidden"] = spec.hidden;
  j["activation"] = std::string(activation_name(spec.activation));
  if (spec.clamp) {
    j["clamp"] = Json{{"min", spec.clamp->min}, {"max", spec.clamp->max}};
  } else {
    j["clamp"] = nullptr;
  }
  j["output_bias"] = spec.output_bias;
  return j;
}

void read_model_spec(ObjectReader& reader, ModelSpec& spec) {
  if (const Json* kind = reader.find("kind")) {
    if (!kind->is_string()) throw ConfigError(reader.field("kind") + " must be a string");
    try {
      spec.kind = parse_model_kind(kind->get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(reader.field("kind") + ": " + e.what());
    }
  }
  reader.read("input_dim", spec.input_dim);
  if (const Json* hidden = reader.find("hidden")) {
    if (!hidden->is_array()) throw ConfigError(reader.field("hidden") + " must be an array of layer widths");
    spec.hidden.clear();
    for (const Json& width : *hidden) {
      if (!width.is_number_unsigned()) throw ConfigError(reader.field("hidden") + " widths must be integers");
      spec.hidden.push_back(width.get<std::size_t>());
    }
  }
  if (const Json* activation = reader.find("activation")) {
    if (!activation->is_string()) throw ConfigError(reader.field("activation") + " must be a string");
    try {
      spec.activation = parse_activation(activation->get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(reader.field("activation") + ": " + e.what());
    }
  }
  if (const Json* clamp = reader.find("clamp")) {
    if (clamp->is_null() || (clamp->is_boolean() && !clamp->get<bool>())) {
      spec.clamp.reset();
    } else if (clamp->is_boolean()) {
      spec.clamp = ClampBounds{};
    } else {
      ObjectReader bounds(*clamp, reader.field("clamp"));
      ClampBounds b;
      bounds.read("min", b.min);
      bounds.read("max", b.max);
      bounds.finish();
      spec.clamp = b;
    }
  }
  reader.read("output_bias", spec.output_bias);
}

Json train_config_to_json(const TrainConfig& c) {
  Json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["optimizer"] = c.optimizer == OptimizerKind::Adam ? "adam" : "sgd";
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["epsilon"] = c.epsilon;
  j["lambda"] = c.lambda;
  j["alpha"] = c.alpha;
  j["l2_mode"] = c.l2_mode == L2Mode::Norm ? "norm" : "squared";
  j["seed"] = c.seed;
  j["shuffle"] = c.shuffle;
  return j;
}

TrainConfig train_config_from_json(const Json& object, const std::string& path) {
  ObjectReader r(object, path);
  TrainConfig c;
  r.read("epochs", c.epochs);
  r.read("batch_size", c.batch_size);
  r.read("learning_rate", c.learning_rate);
  std::string optimizer = c.optimizer == OptimizerKind::Adam ? "adam" : "sgd";
  r.read("optimizer", optimizer);
  if (optimizer == "adam") {
    c.optimizer = OptimizerKind::Adam;
  } else if (optimizer == "sgd") {
    c.optimizer = OptimizerKind::Sgd;
  } else {
    throw ConfigError(r.field("optimizer") + " must be \"adam\" or \"sgd\", got \"" + optimizer + "\"");
  }
  r.read("beta1", c.beta1);
  r.read("beta2", c.beta2);
  r.read("epsilon", c.epsilon);
  r.read("lambda", c.lambda);
  r.read("alpha", c.alpha);
  std::string l2 = "norm";
  r.read("l2_mode", l2);
  if (l2 == "norm") {
    c.l2_mode = L2Mode::Norm;
  } else if (l2 == "squared") {
    c.l2_mode = L2Mode::Squared;
  } else {
    throw ConfigError(r.field("l2_mode") + " must be \"norm\" or \"squared\", got \"" + l2 + "\"");
  }
  std::size_t seed = c.seed;
  r.read("seed", seed);
  c.seed = seed;
  r.read("shuffle", c.shuffle);
  r.finish();
  return c;
}

}  // namespace detail

using detail::Json;
using detail::ObjectReader;

namespace {

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(what + " is not valid JSON: " + e.what());
  }
}

/// `a.b.c=value`; value is JSON when it parses as JSON, else a string.
void apply_override(Json& root, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  Json* node = &root;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = key.find('.', begin);
    const std::string part = key.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    Json& child = (*node)[part];
    if (child.is_null()) child = Json::object();
    node = &child;
    begin = dot + 1;
  }
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) { throw ConfigError(field + " " + why); };
  if (data.source != "circles" && data.source != "moons" && data.source != "csv") {
    fail("data.source", "must be \"circles\", \"moons\" or \"csv\", got \"" + data.source + "\"");
  }
  if (data.source == "csv") {
    if (data.path.empty()) fail("data.path", "is required for csv data");
    if (data.label_column.empty()) fail("data.label_column", "must not be empty");
    if (data.category_cap == 0) fail("data.category_cap", "must be positive");
  } else {
    if (data.n < 2) fail("data.n", "must be at least 2");
    if (!(data.noise >= 0.0) || !std::isfinite(data.noise)) fail("data.noise", "must be non-negative");
    if (data.source == "circles" && !(data.factor > 0.0 && data.factor < 1.0)) {
      fail("data.factor", "must lie in (0, 1)");
    }
  }
  if (!(data.test_fraction > 0.0 && data.test_fraction < 1.0)) fail("data.test_fraction", "must lie in (0, 1)");
  if (output_dir.empty()) fail("output_dir", "must not be empty");

  ModelSpec probe = model;
  probe.input_dim = 1;
  try {
    probe.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  train.validate();
}

RunConfig parse_run_config(std::string_view text, const std::vector<std::string>& overrides) {
  Json root = parse_json(text, "config");
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  for (const std::string& o : overrides) apply_override(root, o);

  RunConfig config;
  ObjectReader top(root, "");
  if (const Json* data = top.find("data")) {
    ObjectReader r(*data, "data");
    DataConfig& d = config.data;
    r.read("source", d.source);
    r.read("n", d.n);
    r.read("noise", d.noise);
    r.read("factor", d.factor);
    std::size_t seed = d.seed;
    r.read("seed", seed);
    d.seed = seed;
    r.read("path", d.path);
    r.read("label_column", d.label_column);
    r.read("positive_label", d.positive_label);
    r.read("category_cap", d.category_cap);
    r.read("test_fraction", d.test_fraction);
    r.read("standardize", d.standardize);
    r.finish();
  }
  if (const Json* model = top.find("model")) {
    ObjectReader r(*model, "model");
    detail::read_model_spec(r, config.model);
    std::size_t seed = config.model_seed;
    r.read("seed", seed);
    config.model_seed = seed;
    r.finish();
  }
  if (const Json* train = top.find("train")) config.train = detail::train_config_from_json(*train, "train");
  top.read("output_dir", config.output_dir);
  top.finish();
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  return parse_run_config(read_text_file(path), overrides);
}

std::string run_config_to_json(const RunConfig& config) {
  Json root;
  const DataConfig& d = config.data;
  root["data"] = Json{{"source", d.source},
                      {"n", d.n},
                      {"noise", d.noise},
                      {"factor", d.factor},
                      {"seed", d.seed},
                      {"path", d.path},
                      {"label_column", d.label_column},
                      {"positive_label", d.positive_label ? Json(*d.positive_label) : Json(nullptr)},
                      {"category_cap", d.category_cap},
                      {"test_fraction", d.test_fraction},
                      {"standardize", d.standardize}};
  Json model = detail::model_spec_to_json(config.model);
  model.erase("input_dim");
  model["seed"] = config.model_seed;
  root["model"] = std::move(model);
  root["train"] = detail::train_config_to_json(config.train);
  root["output_dir"] = config.output_dir;
  return root.dump(2) + "\n";
}

}  // namespace pwl
