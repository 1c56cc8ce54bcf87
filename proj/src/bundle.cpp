#include "pwl/bundle.hpp"

#include <bit>
#include <cstring>

#include "config_json.hpp"
#include "pwl/csv.hpp"
#include "pwl/error.hpp"

namespace pwl {

namespace {

using detail::Json;
using detail::ObjectReader;

constexpr char kMagic[4] = {'P', 'W', 'L', 'B'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw IoError("model bundle is truncated");
    const std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t u64(int width) {
    const std::string_view raw = take(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = width - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(raw[static_cast<std::size_t>(i)]);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64(8)); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

Json shape_json(const Tensor& t) { return Json(t.shape()); }

std::vector<std::size_t> read_shape(const Json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || j.size() > 2) throw IoError("bundle tensor '" + name + "' has a bad shape");
  std::vector<std::size_t> shape;
  for (const Json& d : j) {
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) {
      throw IoError("bundle tensor '" + name + "' has a bad shape");
    }
    shape.push_back(d.get<std::size_t>());
  }
  return shape;
}

}  // namespace

std::string serialize_bundle(const ModelBundle& bundle) {
  const Model& model = bundle.model;
  std::vector<std::pair<std::string, const Tensor*>> tensors;
  for (const ConstParameterRef& p : model.parameters()) tensors.emplace_back(p.name, p.tensor);
  Tensor mean, stddev;
  if (bundle.standardization) {
    mean = Tensor::vector(bundle.standardization->mean);
    stddev = Tensor::vector(bundle.standardization->stddev);
    tensors.emplace_back("standardization.mean", &mean);
    tensors.emplace_back("standardization.stddev", &stddev);
  }

  Json header;
  header["kind"] = std::string(model_kind_name(model.kind()));
  header["spec"] = detail::model_spec_to_json(model.spec());
  header["trained"] = model.trained();
  header["feature_names"] = bundle.feature_names;
  if (bundle.standardization) {
    header["standardization"] = Json{{"constant", bundle.standardization->constant}};
  } else {
    header["standardization"] = nullptr;
  }
  header["train_config"] =
      bundle.train_config ? detail::train_config_to_json(*bundle.train_config) : Json(nullptr);
  header["seed"] = bundle.seed;
  header["metrics"] = Json::object();
  for (const auto& [key, value] : bundle.metrics) header["metrics"][key] = value;
  Json table = Json::array();
  for (const auto& [name, tensor] : tensors) table.push_back(Json{{"name", name}, {"shape", shape_json(*tensor)}});
  header["tensors"] = std::move(table);

  const std::string text = header.dump();
  std::string out(kMagic, 4);
  put_u32(out, ModelBundle::kFormatVersion);
  put_u64(out, text.size());
  out += text;
  for (const auto& [name, tensor] : tensors) {
    for (double v : tensor->values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

ModelBundle deserialize_bundle(std::string_view bytes) {
  ByteReader in(bytes);
  if (in.take(4) != std::string_view(kMagic, 4)) throw IoError("not a model bundle (bad magic)");
  const auto version = static_cast<std::uint32_t>(in.u64(4));
  if (version != ModelBundle::kFormatVersion) {
    throw IoError("unsupported model bundle version " + std::to_string(version) + " (this build reads version " +
                  std::to_string(ModelBundle::kFormatVersion) + ")");
  }
  const std::uint64_t header_size = in.u64(8);
  if (header_size > bytes.size()) throw IoError("model bundle is truncated");
  Json header = Json::parse(in.take(static_cast<std::size_t>(header_size)), nullptr, false);
  if (header.is_discarded() || !header.is_object()) throw IoError("model bundle header is not valid JSON");

  try {
    ObjectReader top(header, "bundle");
    const Json* spec_json = top.find("spec");
    if (spec_json == nullptr) throw ConfigError("bundle.spec is missing");
    ModelSpec spec;
    ObjectReader spec_reader(*spec_json, "bundle.spec");
    detail::read_model_spec(spec_reader, spec);
    spec_reader.finish();
    std::string kind;
    top.read("kind", kind);
    if (kind != model_kind_name(spec.kind)) throw ConfigError("bundle kind does not match its spec");
    bool trained = false;
    top.read("trained", trained);

    std::vector<std::string> names;
    if (const Json* f = top.find("feature_names")) {
      if (!f->is_array()) throw ConfigError("bundle.feature_names must be an array");
      for (const Json& n : *f) {
        if (!n.is_string()) throw ConfigError("bundle.feature_names must hold strings");
        names.push_back(n.get<std::string>());
      }
    }
    std::optional<std::vector<bool>> constant;
    if (const Json* s = top.find("standardization"); s != nullptr && !s->is_null()) {
      ObjectReader r(*s, "bundle.standardization");
      const Json* c = r.find("constant");
      if (c == nullptr || !c->is_array()) throw ConfigError("bundle.standardization.constant must be an array");
      constant.emplace();
      for (const Json& v : *c) {
        if (!v.is_boolean()) throw ConfigError("bundle.standardization.constant must hold booleans");
        constant->push_back(v.get<bool>());
      }
      r.finish();
    }
    std::optional<TrainConfig> train_config;
    if (const Json* t = top.find("train_config"); t != nullptr && !t->is_null()) {
      train_config = detail::train_config_from_json(*t, "bundle.train_config");
    }
    std::size_t seed = 0;
    top.read("seed", seed);
    std::map<std::string, double> metrics;
    if (const Json* m = top.find("metrics")) {
      if (!m->is_object()) throw ConfigError("bundle.metrics must be an object");
      for (const auto& [key, value] : m->items()) {
        if (!value.is_number()) throw ConfigError("bundle.metrics." + key + " must be a number");
        metrics[key] = value.get<double>();
      }
    }
    const Json* table = top.find("tensors");
    if (table == nullptr || !table->is_array()) throw ConfigError("bundle.tensors must be an array");
    top.finish();

    std::map<std::string, Tensor> loaded;
    std::vector<std::string> order;
    for (const Json& entry : *table) {
      ObjectReader r(entry, "bundle.tensors[]");
      std::string name;
      r.read("name", name);
      const Json* shape = r.find("shape");
      r.finish();
      if (shape == nullptr) throw ConfigError("bundle tensor '" + name + "' has no shape");
      Tensor t(read_shape(*shape, name));
      for (double& v : t.values()) v = in.f64();
      if (!loaded.emplace(name, std::move(t)).second) throw IoError("bundle repeats tensor '" + name + "'");
      order.push_back(name);
    }
    if (!in.done()) throw IoError("model bundle has trailing bytes");

    Model model = Model::create(spec, 0);
    std::size_t matched = 0;
    for (const ParameterRef& p : model.parameters()) {
      const auto it = loaded.find(p.name);
      if (it == loaded.end()) throw IoError("bundle is missing parameter '" + p.name + "'");
      if (it->second.shape() != p.tensor->shape()) {
        throw IoError("bundle parameter '" + p.name + "' has shape " + shape_to_string(it->second.shape()) +
                      ", model expects " + shape_to_string(p.tensor->shape()));
      }
      *p.tensor = it->second;
      ++matched;
    }
    model.set_trained(trained);

    std::optional<Standardization> stats;
    if (constant) {
      const auto mean = loaded.find("standardization.mean");
      const auto sd = loaded.find("standardization.stddev");
      if (mean == loaded.end() || sd == loaded.end()) throw IoError("bundle standardization tensors are missing");
      const std::size_t d = spec.input_dim;
      if (mean->second.size() != d || sd->second.size() != d || constant->size() != d) {
        throw IoError("bundle standardization does not match the model width");
      }
      stats = Standardization{{mean->second.values().begin(), mean->second.values().end()},
                              {sd->second.values().begin(), sd->second.values().end()},
                              *constant};
      matched += 2;
    }
    if (matched != loaded.size()) throw IoError("bundle holds unexpected tensors");
    if (!names.empty() && names.size() != spec.input_dim) {
      throw IoError("bundle lists " + std::to_string(names.size()) + " feature names for a model of width " +
                    std::to_string(spec.input_dim));
    }

    return ModelBundle{std::move(model), std::move(names), std::move(stats), std::move(train_config), seed,
                       std::move(metrics)};
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(std::string("malformed model bundle: ") + e.what());
  }
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
  write_file_atomic(path, serialize_bundle(bundle));
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  try {
    return deserialize_bundle(read_text_file(path));
  } catch (const IoError& e) {
    if (std::string_view(e.what()).find(path.string()) != std::string_view::npos) throw;
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace pwl
