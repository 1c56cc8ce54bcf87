#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pwl/data.hpp"
#include "pwl/model.hpp"
#include "pwl/training.hpp"

namespace pwl {

/// Trained model plus everything needed to apply it to raw data.
///
/// File layout: "PWLB", u32 format version, u64 header length, a JSON
/// header of that many bytes, then the float64 payload. Integers and
/// doubles are little-endian. The header lists each payload tensor by
/// name and shape, in payload order.
struct ModelBundle {
  static constexpr std::uint32_t kFormatVersion = 1;

  Model model;
  std::vector<std::string> feature_names;
  std::optional<Standardization> standardization;
  std::optional<TrainConfig> train_config;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;  // e.g. train_accuracy, test_accuracy
};

std::string serialize_bundle(const ModelBundle& bundle);
/// Throws IoError on truncated or malformed bytes and on an unknown format
/// version; nothing is returned unless every part loaded.
ModelBundle deserialize_bundle(std::string_view bytes);

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace pwl
