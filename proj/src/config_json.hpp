#pragma once

#include <set>
#include <string>

#include "json.hpp"
#include "pwl/model.hpp"
#include "pwl/training.hpp"

namespace pwl::detail {

using Json = nlohmann::ordered_json;

/// Strict reader over one JSON object: typed lookups by key, and finish()
/// rejects any key that was never looked up.
class ObjectReader {
 public:
  ObjectReader(const Json& object, std::string path);

  const Json* find(const std::string& key);
  /// Reads `key` into `out` when present; leaves `out` untouched otherwise.
  template <typename T>
  void read(const std::string& key, T& out);
  void finish() const;

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const Json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

Json model_spec_to_json(const ModelSpec& spec);
/// Reads the model keys of `reader` (kind, input_dim, hidden, activation,
/// clamp, output_bias) into `spec`.
void read_model_spec(ObjectReader& reader, ModelSpec& spec);

Json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& object, const std::string& path);

}  // namespace pwl::detail
