#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pwl/data.hpp"
#include "pwl/model.hpp"

namespace pwl {

/// Per-sample explanation of a point-wise linear prediction. Features are
/// in the model's input space (standardized when the model was trained on
/// standardized data).
struct ExplanationRecord {
  std::size_t sample_id = 0;
  double y_hat = 0.0;
  double logit = 0.0;
  int label = 0;
  std::vector<double> xi;
  std::vector<double> contributions;  // sum + bias == logit
  double bias = 0.0;
  std::optional<std::vector<double>> rho;
};

/// One forward pass over `data`, one record per row. Throws ContractError
/// for untrained models and for the deep baseline (its weights act on phi,
/// not on the inputs), SchemaError on a feature count mismatch.
std::vector<ExplanationRecord> explain_batch(const Model& model, const Dataset& data);

struct FeatureImportance {
  std::size_t index = 0;
  std::string name;
  double mean_abs = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population
};

/// Features ranked by mean |contribution|, ties by ascending index.
/// Names default to "feature<k>" (1-based) when `names` is empty.
std::vector<FeatureImportance> global_importance(const std::vector<ExplanationRecord>& records,
                                                 const std::vector<std::string>& names = {});

struct GridRanges {
  double xmin = -1.5;
  double xmax = 1.5;
  double ymin = -1.5;
  double ymax = 1.5;

  /// Throws ArgumentError unless both ranges are finite with min < max.
  void validate() const;
};

/// Row-major cell values: y outer, x inner, with
/// x_i = xmin + i * (xmax - xmin) / (resolution - 1).
struct Grid {
  GridRanges ranges;
  std::size_t resolution = 0;
  std::vector<double> values;

  double x_at(std::size_t i) const;
  double y_at(std::size_t j) const;
};

/// [resolution^2 x 2] cell coordinates in grid order.
Tensor grid_points(const GridRanges& ranges, std::size_t resolution);

/// Predicted probability per cell. Coordinates are raw units when `stats`
/// is given (they are standardized before the model sees them). Requires
/// a two-feature model and resolution >= 2; ContractError otherwise.
Grid boundary_grid(const Model& model, const GridRanges& ranges, std::size_t resolution,
                   const Standardization* stats = nullptr);

/// atan2(xi_2, xi_1) per cell, in radians.
Grid angle_grid(const Model& model, const GridRanges& ranges, std::size_t resolution,
                const Standardization* stats = nullptr);

struct RhoScatter {
  Tensor rho;  // [N x 2], clamp applied
  std::vector<int> labels;
};

/// Reallocated features of every sample; reallocation heads with two
/// features only.
RhoScatter rho_scatter(const Model& model, const Dataset& data);

/// `sample_id,y_hat,label,xi_<f>...,c_<f>...,bias`, shortest round-trip
/// number text.
std::string explanations_to_csv(const std::vector<ExplanationRecord>& records,
                                const std::vector<std::string>& feature_names);

std::string importance_to_csv(const std::vector<FeatureImportance>& ranking);

/// Header `x,y,<value_name>`, 9 significant digits.
std::string grid_to_csv(const Grid& grid, const std::string& value_name);
/// {"xmin":..,"xmax":..,"ymin":..,"ymax":..,"resolution":..,"values":[[row y0],[row y1],...]}
std::string grid_to_json(const Grid& grid);

/// `sample_id,rho_1,rho_2,label`, 9 significant digits.
std::string rho_scatter_to_csv(const RhoScatter& scatter);

}  // namespace pwl
