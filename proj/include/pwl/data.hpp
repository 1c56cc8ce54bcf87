#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pwl/tensor.hpp"

namespace pwl {

/// Per-column z-scoring statistics (population standard deviation).
struct Standardization {
  std::vector<double> mean;
  std::vector<double> stddev;
  /// Columns whose standard deviation was zero; their stddev is stored as 1.
  std::vector<bool> constant;
};

struct Dataset {
  Tensor x;                  // [N x D]
  std::vector<int> labels;   // N values in {0, 1}
  std::vector<std::string> feature_names;
  std::optional<Standardization> standardization;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return x.cols(); }
  std::vector<double> targets() const { return {labels.begin(), labels.end()}; }

  /// Row subset in the given order; keeps names and standardization.
  Dataset subset(const std::vector<std::size_t>& rows) const;

  /// Throws DataError/SchemaError unless shapes, labels and names agree
  /// and every value is finite.
  void validate() const;
};

/// ceil(n/2) points on the unit circle (label 0) and floor(n/2) on the
/// circle of radius `factor` (label 1), uniform angles, isotropic gaussian
/// noise. Throws ArgumentError unless n >= 2 and 0 < factor < 1.
Dataset make_circles(std::size_t n, double factor, double noise_sd, std::uint64_t seed);

/// Point of the upper (label 0) or lower (label 1) moon at angle theta.
std::pair<double, double> moon_point(bool upper, double theta);

/// ceil(n/2) upper-moon and floor(n/2) lower-moon points, theta uniform in
/// [0, pi], gaussian noise.
Dataset make_moons(std::size_t n, double noise_sd, std::uint64_t seed);

struct CsvOptions {
  std::string label_column = "label";
  /// When set, label = (cell == positive_label); otherwise cells must read
  /// as 0 or 1.
  std::optional<std::string> positive_label;
  /// Categorical columns with more distinct values are dropped.
  std::size_t category_cap = 20;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rejected_rows = 0;
  std::vector<std::string> one_hot_columns;
  std::vector<std::string> dropped_columns;
  std::vector<std::string> warnings;
};

/// Builds a dataset from CSV text with a header row. A column is numeric
/// when at least half its cells parse as finite numbers; rows with an
/// unparseable numeric cell are rejected and counted. Other columns are
/// one-hot encoded as "name=value" in sorted value order.
Dataset parse_csv_dataset(std::string_view text, const CsvOptions& options, LoadReport* report = nullptr);
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options, LoadReport* report = nullptr);

/// Rebuilds exactly `feature_names` (plain numeric columns and one-hot
/// "name=value" indicators) from CSV text, in that order. Every row must
/// parse; a missing column raises a SchemaError listing the expected and
/// found columns. Labels are read when the label column is present and
/// `has_labels` reports it; otherwise labels are all 0.
Dataset parse_csv_features(std::string_view text, const std::vector<std::string>& feature_names,
                           const CsvOptions& options, bool* has_labels = nullptr);

/// Feature columns then "label", values in shortest round-trip form.
std::string dataset_to_csv(const Dataset& data);

Standardization fit_standardization(const Tensor& x);
/// z-scores with the given statistics and records them on the result.
Dataset apply_standardization(const Dataset& data, const Standardization& stats);
/// Fits statistics on `data` and applies them. A dataset that already
/// carries statistics is returned unchanged.
Dataset standardize(const Dataset& data);
/// Maps standardized features back to raw units.
Dataset unstandardize(const Dataset& data);

/// Stratified, seed-deterministic split; each class contributes
/// round(count * test_fraction) rows to the test part. Throws DataError if
/// either part would miss a class.
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed);

}  // namespace pwl
