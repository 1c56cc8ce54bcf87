#include "pwl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "pwl/csv.hpp"
#include "pwl/error.hpp"
#include "pwl/random.hpp"

namespace pwl {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (cell.starts_with('+')) cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

int parse_label(std::string_view raw, const CsvOptions& options, std::size_t row) {
  const std::string_view cell = trim(raw);
  if (options.positive_label) return cell == *options.positive_label ? 1 : 0;
  const auto value = parse_number(cell);
  if (!value || (*value != 0.0 && *value != 1.0)) {
    throw DataError("label '" + std::string(cell) + "' on data row " + std::to_string(row + 1) +
                    " is not 0 or 1 (set a positive label to map other values)");
  }
  return static_cast<int>(*value);
}

std::string list_names(const std::vector<std::string>& names) {
  std::string out;
  for (const std::string& n : names) out += (out.empty() ? "" : ", ") + n;
  return "[" + out + "]";
}

Dataset from_points(std::vector<double> values, std::vector<int> labels) {
  Dataset d;
  const std::size_t n = labels.size();
  d.x = Tensor({n, 2}, std::move(values));
  d.labels = std::move(labels);
  d.feature_names = {"x1", "x2"};
  return d;
}

}  // namespace

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.x = x.gather_rows(rows);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(labels.at(r));
  out.feature_names = feature_names;
  out.standardization = standardization;
  return out;
}

void Dataset::validate() const {
  if (x.rank() != 2) throw DataError("feature matrix must be 2-D");
  if (x.rows() != labels.size()) {
    throw DataError(std::to_string(x.rows()) + " feature rows but " + std::to_string(labels.size()) + " labels");
  }
  if (feature_names.size() != x.cols()) {
    throw SchemaError(std::to_string(feature_names.size()) + " feature names for " + std::to_string(x.cols()) +
                      " columns");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw DataError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) + " is not 0 or 1");
    }
  }
  if (!x.all_finite()) throw DataError("feature matrix contains non-finite values");
}

Dataset make_circles(std::size_t n, double factor, double noise_sd, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("make_circles needs n >= 2");
  if (!(factor > 0.0 && factor < 1.0)) throw ArgumentError("make_circles factor must lie in (0, 1)");
  if (!(noise_sd >= 0.0)) throw ArgumentError("noise standard deviation must be non-negative");
  Rng rng(seed);
  const std::size_t outer = (n + 1) / 2;
  std::vector<double> values;
  std::vector<int> labels;
  values.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool is_outer = i < outer;
    const double radius = is_outer ? 1.0 : factor;
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    double px = radius * std::cos(angle);
    double py = radius * std::sin(angle);
    if (noise_sd > 0.0) {
      px += rng.normal(0.0, noise_sd);
      py += rng.normal(0.0, noise_sd);
    }
    values.push_back(px);
    values.push_back(py);
    labels.push_back(is_outer ? 0 : 1);
  }
  return from_points(std::move(values), std::move(labels));
}

std::pair<double, double> moon_point(bool upper, double theta) {
  if (upper) return {std::cos(theta), std::sin(theta)};
  return {1.0 - std::cos(theta), 0.5 - std::sin(theta)};
}

Dataset make_moons(std::size_t n, double noise_sd, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("make_moons needs n >= 2");
  if (!(noise_sd >= 0.0)) throw ArgumentError("noise standard deviation must be non-negative");
  Rng rng(seed);
  const std::size_t upper_count = (n + 1) / 2;
  std::vector<double> values;
  std::vector<int> labels;
  values.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool upper = i < upper_count;
    auto [px, py] = moon_point(upper, rng.uniform(0.0, std::numbers::pi));
    if (noise_sd > 0.0) {
      px += rng.normal(0.0, noise_sd);
      py += rng.normal(0.0, noise_sd);
    }
    values.push_back(px);
    values.push_back(py);
    labels.push_back(upper ? 0 : 1);
  }
  return from_points(std::move(values), std::move(labels));
}

Dataset parse_csv_dataset(std::string_view text, const CsvOptions& options, LoadReport* report) {
  std::vector<csv::Row> rows = csv::parse(text);
  std::erase_if(rows, [](const csv::Row& r) { return r.size() == 1 && trim(r[0]).empty(); });
  if (rows.empty()) throw SchemaError("CSV has no header row");
  const csv::Row header = rows.front();
  rows.erase(rows.begin());

  LoadReport local;
  LoadReport& rep = report ? *report : local;
  rep = LoadReport{};
  rep.rows_read = rows.size();

  const auto label_it = std::find(header.begin(), header.end(), options.label_column);
  if (label_it == header.end()) throw SchemaError("label column '" + options.label_column + "' not found in header");
  const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());

  std::vector<bool> row_ok(rows.size(), true);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) row_ok[r] = false;
  }

  std::vector<int> labels(rows.size(), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!row_ok[r]) continue;
    labels[r] = parse_label(rows[r][label_col], options, r);
  }

  struct Column {
    std::size_t source;
    std::optional<std::string> category;  // set for one-hot indicator columns
    std::string name;
  };
  std::vector<Column> columns;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col) continue;
    std::size_t numeric = 0, present = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!row_ok[r]) continue;
      ++present;
      if (parse_number(rows[r][c])) ++numeric;
    }
    if (2 * numeric >= present) {
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (row_ok[r] && !parse_number(rows[r][c])) row_ok[r] = false;
      }
      columns.push_back({c, std::nullopt, header[c]});
      continue;
    }
    std::set<std::string> values;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (row_ok[r]) values.insert(std::string(trim(rows[r][c])));
    }
    if (values.size() > options.category_cap) {
      rep.dropped_columns.push_back(header[c]);
      rep.warnings.push_back("column '" + header[c] + "' has " + std::to_string(values.size()) +
                             " categories (cap " + std::to_string(options.category_cap) + "); dropped");
      continue;
    }
    rep.one_hot_columns.push_back(header[c]);
    for (const std::string& v : values) columns.push_back({c, v, header[c] + "=" + v});
  }
  if (columns.empty()) throw SchemaError("CSV has no usable feature columns");

  std::vector<double> values;
  std::vector<int> kept_labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!row_ok[r]) {
      ++rep.rejected_rows;
      continue;
    }
    for (const Column& col : columns) {
      const std::string& cell = rows[r][col.source];
      values.push_back(col.category ? (trim(cell) == *col.category ? 1.0 : 0.0) : *parse_number(cell));
    }
    kept_labels.push_back(labels[r]);
  }
  if (kept_labels.empty()) throw DataError("every CSV row was rejected");
  if (rep.rejected_rows > 0) {
    rep.warnings.push_back(std::to_string(rep.rejected_rows) + " row(s) rejected for unparseable or missing cells");
  }

  Dataset d;
  d.x = Tensor({kept_labels.size(), columns.size()}, std::move(values));
  d.labels = std::move(kept_labels);
  for (const Column& col : columns) d.feature_names.push_back(col.name);
  return d;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options, LoadReport* report) {
  return parse_csv_dataset(read_text_file(path), options, report);
}

Dataset parse_csv_features(std::string_view text, const std::vector<std::string>& feature_names,
                           const CsvOptions& options, bool* has_labels) {
  std::vector<csv::Row> rows = csv::parse(text);
  std::erase_if(rows, [](const csv::Row& r) { return r.size() == 1 && trim(r[0]).empty(); });
  if (rows.empty()) throw SchemaError("CSV has no header row");
  const csv::Row header = rows.front();
  rows.erase(rows.begin());
  if (rows.empty()) throw DataError("CSV has no data rows");

  auto find = [&](std::string_view name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  struct Column {
    std::size_t source;
    std::optional<std::string> category;
  };
  std::vector<Column> columns;
  std::vector<std::string> missing;
  for (const std::string& name : feature_names) {
    if (const auto c = find(name)) {
      columns.push_back({*c, std::nullopt});
      continue;
    }
    const std::size_t eq = name.find('=');
    const auto c = eq == std::string::npos ? std::nullopt : find(std::string_view(name).substr(0, eq));
    if (c) {
      columns.push_back({*c, name.substr(eq + 1)});
    } else {
      missing.push_back(name);
    }
  }
  if (!missing.empty()) {
    throw SchemaError("expected feature columns " + list_names(feature_names) + ", found " + list_names(header) +
                      "; missing " + list_names(missing));
  }

  const auto label_col = find(options.label_column);
  if (has_labels) *has_labels = label_col.has_value();
  std::vector<double> values;
  values.reserve(rows.size() * columns.size());
  std::vector<int> labels(rows.size(), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw DataError("data row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                      " cells, header has " + std::to_string(header.size()));
    }
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const std::string& cell = rows[r][columns[k].source];
      if (columns[k].category) {
        values.push_back(trim(cell) == *columns[k].category ? 1.0 : 0.0);
        continue;
      }
      const auto value = parse_number(cell);
      if (!value) {
        throw DataError("cell '" + cell + "' in column '" + feature_names[k] + "' on data row " +
                        std::to_string(r + 1) + " is not a finite number");
      }
      values.push_back(*value);
    }
    if (label_col) labels[r] = parse_label(rows[r][*label_col], options, r);
  }

  Dataset d;
  d.x = Tensor({rows.size(), columns.size()}, std::move(values));
  d.labels = std::move(labels);
  d.feature_names = feature_names;
  return d;
}

std::string dataset_to_csv(const Dataset& data) {
  data.validate();
  csv::Row header = data.feature_names;
  header.push_back("label");
  std::string out = csv::join(header) + "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.x.row(i)) {
      out += format_exact(v);
      out += ',';
    }
    out += std::to_string(data.labels[i]);
    out += '\n';
  }
  return out;
}

Standardization fit_standardization(const Tensor& x) {
  if (x.rank() != 2 || x.rows() < 2) throw DataError("standardization needs at least 2 rows");
  const std::size_t n = x.rows(), d = x.cols();
  Standardization stats{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), std::vector<bool>(d, false)};
  for (std::size_t j = 0; j < d; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += x.at(i, j);
    const double mean = total / static_cast<double>(n);
    double squares = 0.0;
    for (std::size_t i = 0; i < n; ++i) squares += (x.at(i, j) - mean) * (x.at(i, j) - mean);
    const double sd = std::sqrt(squares / static_cast<double>(n));
    stats.mean[j] = mean;
    if (sd > 0.0) {
      stats.stddev[j] = sd;
    } else {
      stats.stddev[j] = 1.0;
      stats.constant[j] = true;
    }
  }
  return stats;
}

Dataset apply_standardization(const Dataset& data, const Standardization& stats) {
  if (stats.mean.size() != data.dim() || stats.stddev.size() != data.dim()) {
    throw SchemaError("standardization has " + std::to_string(stats.mean.size()) + " columns, data has " +
                      std::to_string(data.dim()));
  }
  Dataset out = data;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto row = out.x.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - stats.mean[j]) / stats.stddev[j];
  }
  out.standardization = stats;
  return out;
}

Dataset standardize(const Dataset& data) {
  if (data.standardization) return data;
  return apply_standardization(data, fit_standardization(data.x));
}

Dataset unstandardize(const Dataset& data) {
  if (!data.standardization) return data;
  const Standardization& stats = *data.standardization;
  Dataset out = data;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto row = out.x.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = row[j] * stats.stddev[j] + stats.mean[j];
  }
  out.standardization.reset();
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("test_fraction must lie in (0, 1)");
  Rng rng(seed);
  std::vector<std::size_t> train_rows, test_rows;
  for (int label : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == label) members.push_back(i);
    }
    rng.shuffle(members);
    const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
    if (n_test == 0 || n_test == members.size()) {
      throw DataError("split leaves class " + std::to_string(label) + " empty in the " +
                      (n_test == 0 ? "test" : "train") + " part (" + std::to_string(members.size()) + " samples)");
    }
    test_rows.insert(test_rows.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    train_rows.insert(train_rows.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {data.subset(train_rows), data.subset(test_rows)};
}

}  // namespace pwl
