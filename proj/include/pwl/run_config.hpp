#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pwl/model.hpp"
#include "pwl/training.hpp"

namespace pwl {

struct DataConfig {
  std::string source = "circles";  // circles | moons | csv
  std::size_t n = 1000;
  double noise = 0.05;
  double factor = 0.5;
  std::uint64_t seed = 0;  // generator and split
  std::string path;        // csv only
  std::string label_column = "label";
  std::optional<std::string> positive_label;
  std::size_t category_cap = 20;
  double test_fraction = 0.3;
  bool standardize = true;
};

/// One experiment. The model's input width comes from the data at train
/// time; `model.input_dim` is ignored here.
struct RunConfig {
  DataConfig data;
  ModelSpec model;
  std::uint64_t model_seed = 0;
  TrainConfig train;
  std::string output_dir = "run";

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Parses a JSON config. Missing keys keep their defaults; unknown keys
/// and wrongly typed values are rejected. Each override is `dotted.key=value`
/// where value is JSON (bare words are taken as strings) and is applied
/// before parsing. The result is validated.
RunConfig parse_run_config(std::string_view text, const std::vector<std::string>& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Every field, fixed key order; parses back to an equal config.
std::string run_config_to_json(const RunConfig& config);

}  // namespace pwl
