#include "pwl/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pwl/csv.hpp"
#include "pwl/error.hpp"

namespace pwl {

namespace {

constexpr int kGridDigits = 9;

void require_explainable(const Model& model) {
  if (!model.trained()) throw ContractError("cannot explain an untrained model");
  if (!model.explains_inputs()) {
    throw ContractError(std::string(model_kind_name(model.kind())) + " has no per-feature weights on the inputs");
  }
}

void require_features(const Model& model, const Dataset& data) {
  if (data.dim() != model.input_dim()) {
    throw SchemaError("model expects " + std::to_string(model.input_dim()) + " features, data has " +
                      std::to_string(data.dim()));
  }
}

void require_grid(const Model& model, std::size_t resolution) {
  if (model.input_dim() != 2) {
    throw ContractError("grids need a 2-feature model, got " + std::to_string(model.input_dim()));
  }
  if (resolution < 2) throw ContractError("grid resolution must be at least 2");
}

Tensor to_model_space(Tensor points, const Standardization* stats) {
  if (stats == nullptr) return points;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < points.cols(); ++j) {
      points.at(i, j) = (points.at(i, j) - stats->mean[j]) / stats->stddev[j];
    }
  }
  return points;
}

std::vector<double> row_vector(const Tensor& t, std::size_t r) {
  const auto row = t.row(r);
  return {row.begin(), row.end()};
}

}  // namespace

std::vector<ExplanationRecord> explain_batch(const Model& model, const Dataset& data) {
  require_explainable(model);
  require_features(model, data);
  const PwlOutput out = model.run(data.x);
  std::vector<ExplanationRecord> records(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) {
    ExplanationRecord& r = records[n];
    r.sample_id = n;
    r.y_hat = out.y_hat[n];
    r.logit = out.logit[n];
    r.label = data.labels[n];
    r.xi = row_vector(out.xi, n);
    r.contributions = row_vector(out.contributions, n);
    r.bias = out.bias;
    if (out.rho) r.rho = row_vector(*out.rho, n);
  }
  return records;
}

std::vector<FeatureImportance> global_importance(const std::vector<ExplanationRecord>& records,
                                                 const std::vector<std::string>& names) {
  if (records.empty()) throw ArgumentError("global importance needs at least one record");
  const std::size_t d = records.front().contributions.size();
  if (!names.empty() && names.size() != d) throw ArgumentError("feature name count does not match records");
  std::vector<FeatureImportance> ranking(d);
  const double n = static_cast<double>(records.size());
  for (std::size_t j = 0; j < d; ++j) {
    FeatureImportance& f = ranking[j];
    f.index = j;
    f.name = names.empty() ? "feature" + std::to_string(j + 1) : names[j];
    double sum = 0.0, sum_abs = 0.0;
    for (const ExplanationRecord& r : records) {
      if (r.contributions.size() != d) throw ArgumentError("records disagree on feature count");
      sum += r.contributions[j];
      sum_abs += std::abs(r.contributions[j]);
    }
    f.mean = sum / n;
    f.mean_abs = sum_abs / n;
    double ss = 0.0;
    for (const ExplanationRecord& r : records) ss += (r.contributions[j] - f.mean) * (r.contributions[j] - f.mean);
    f.stddev = std::sqrt(ss / n);
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const FeatureImportance& a, const FeatureImportance& b) { return a.mean_abs > b.mean_abs; });
  return ranking;
}

void GridRanges::validate() const {
  if (!std::isfinite(xmin) || !std::isfinite(xmax) || !std::isfinite(ymin) || !std::isfinite(ymax)) {
    throw ArgumentError("grid ranges must be finite");
  }
  if (!(xmin < xmax) || !(ymin < ymax)) throw ArgumentError("grid ranges need min < max on both axes");
}

double Grid::x_at(std::size_t i) const {
  return ranges.xmin + static_cast<double>(i) * (ranges.xmax - ranges.xmin) / static_cast<double>(resolution - 1);
}

double Grid::y_at(std::size_t j) const {
  return ranges.ymin + static_cast<double>(j) * (ranges.ymax - ranges.ymin) / static_cast<double>(resolution - 1);
}

Tensor grid_points(const GridRanges& ranges, std::size_t resolution) {
  ranges.validate();
  if (resolution < 2) throw ArgumentError("grid resolution must be at least 2");
  Grid g{ranges, resolution, {}};
  Tensor points({resolution * resolution, 2});
  for (std::size_t j = 0; j < resolution; ++j) {
    for (std::size_t i = 0; i < resolution; ++i) {
      points.at(j * resolution + i, 0) = g.x_at(i);
      points.at(j * resolution + i, 1) = g.y_at(j);
    }
  }
  return points;
}

Grid boundary_grid(const Model& model, const GridRanges& ranges, std::size_t resolution,
                   const Standardization* stats) {
  require_grid(model, resolution);
  const Tensor points = to_model_space(grid_points(ranges, resolution), stats);
  return Grid{ranges, resolution, model.predict(points)};
}

Grid angle_grid(const Model& model, const GridRanges& ranges, std::size_t resolution, const Standardization* stats) {
  require_grid(model, resolution);
  if (!model.explains_inputs()) throw ContractError("angle map needs per-feature weights on the inputs");
  const Tensor points = to_model_space(grid_points(ranges, resolution), stats);
  return Grid{ranges, resolution, xi_angle_map(model.run(points).xi)};
}

RhoScatter rho_scatter(const Model& model, const Dataset& data) {
  if (!head_variant_of(model.kind()) || !is_reallocation(*head_variant_of(model.kind()))) {
    throw ContractError(std::string(model_kind_name(model.kind())) + " has no reallocated features");
  }
  if (model.input_dim() != 2) throw ContractError("rho scatter needs a 2-feature model");
  require_features(model, data);
  PwlOutput out = model.run(data.x);
  return RhoScatter{std::move(*out.rho), data.labels};
}

std::string explanations_to_csv(const std::vector<ExplanationRecord>& records,
                                const std::vector<std::string>& feature_names) {
  csv::Row header = {"sample_id", "y_hat", "label"};
  for (const std::string& f : feature_names) header.push_back("xi_" + f);
  for (const std::string& f : feature_names) header.push_back("c_" + f);
  header.push_back("bias");
  std::string out = csv::join(header) + "\n";
  for (const ExplanationRecord& r : records) {
    if (r.xi.size() != feature_names.size()) throw ArgumentError("feature name count does not match records");
    csv::Row row = {std::to_string(r.sample_id), format_exact(r.y_hat), std::to_string(r.label)};
    for (double v : r.xi) row.push_back(format_exact(v));
    for (double v : r.contributions) row.push_back(format_exact(v));
    row.push_back(format_exact(r.bias));
    out += csv::join(row) + "\n";
  }
  return out;
}

std::string importance_to_csv(const std::vector<FeatureImportance>& ranking) {
  std::string out = "rank,feature,mean_abs_c,mean_c,sd_c\n";
  for (std::size_t k = 0; k < ranking.size(); ++k) {
    const FeatureImportance& f = ranking[k];
    out += csv::join({std::to_string(k + 1), f.name, format_exact(f.mean_abs), format_exact(f.mean),
                      format_exact(f.stddev)}) +
           "\n";
  }
  return out;
}

std::string grid_to_csv(const Grid& grid, const std::string& value_name) {
  std::string out = "x,y," + value_name + "\n";
  for (std::size_t j = 0; j < grid.resolution; ++j) {
    for (std::size_t i = 0; i < grid.resolution; ++i) {
      out += format_significant(grid.x_at(i), kGridDigits) + "," + format_significant(grid.y_at(j), kGridDigits) +
             "," + format_significant(grid.values[j * grid.resolution + i], kGridDigits) + "\n";
    }
  }
  return out;
}

std::string grid_to_json(const Grid& grid) {
  auto num = [](double v) { return format_significant(v, kGridDigits); };
  std::string out = "{\"xmin\":" + num(grid.ranges.xmin) + ",\"xmax\":" + num(grid.ranges.xmax) +
                    ",\"ymin\":" + num(grid.ranges.ymin) + ",\"ymax\":" + num(grid.ranges.ymax) +
                    ",\"resolution\":" + std::to_string(grid.resolution) + ",\"values\":[";
  for (std::size_t j = 0; j < grid.resolution; ++j) {
    out += j ? ",[" : "[";
    for (std::size_t i = 0; i < grid.resolution; ++i) {
      if (i) out += ",";
      out += num(grid.values[j * grid.resolution + i]);
    }
    out += "]";
  }
  out += "]}\n";
  return out;
}

std::string rho_scatter_to_csv(const RhoScatter& scatter) {
  std::string out = "sample_id,rho_1,rho_2,label\n";
  for (std::size_t n = 0; n < scatter.labels.size(); ++n) {
    out += std::to_string(n) + "," + format_significant(scatter.rho.at(n, 0), kGridDigits) + "," +
           format_significant(scatter.rho.at(n, 1), kGridDigits) + "," + std::to_string(scatter.labels[n]) + "\n";
  }
  return out;
}

}  // namespace pwl
