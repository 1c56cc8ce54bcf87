#include "pwl/commands.hpp"

#include <charconv>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pwl/bundle.hpp"
#include "pwl/csv.hpp"
#include "pwl/data.hpp"
#include "pwl/error.hpp"
#include "pwl/explain.hpp"
#include "pwl/run_config.hpp"
#include "pwl/training.hpp"

namespace pwl::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

Json metrics_json(const Metrics& m) {
  Json j;
  j["accuracy"] = m.accuracy;
  j["auc"] = m.auc ? Json(*m.auc) : Json(nullptr);
  j["nll"] = m.mean_nll;
  return j;
}

GridRanges parse_range(const std::string& text) {
  std::vector<double> v;
  std::string_view rest = text;
  while (true) {
    const std::size_t comma = rest.find(',');
    const std::string_view part = rest.substr(0, comma);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw ArgumentError("--range expects xmin,xmax,ymin,ymax, got '" + text + "'");
    }
    v.push_back(value);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (v.size() != 4) throw ArgumentError("--range expects 4 numbers xmin,xmax,ymin,ymax, got '" + text + "'");
  GridRanges r{v[0], v[1], v[2], v[3]};
  r.validate();
  return r;
}

/// Raw CSV rows aligned to the bundle's features, standardized with the
/// bundle's statistics.
Dataset load_for_bundle(const ModelBundle& bundle, const fs::path& input, bool* has_labels) {
  std::vector<std::string> names = bundle.feature_names;
  if (names.empty()) {
    for (std::size_t j = 0; j < bundle.model.input_dim(); ++j) names.push_back("x" + std::to_string(j + 1));
  }
  Dataset raw = parse_csv_features(read_text_file(input), names, CsvOptions{}, has_labels);
  return bundle.standardization ? apply_standardization(raw, *bundle.standardization) : raw;
}

Dataset load_source(const DataConfig& d) {
  if (d.source == "circles") return make_circles(d.n, d.factor, d.noise, d.seed);
  if (d.source == "moons") return make_moons(d.n, d.noise, d.seed);
  CsvOptions options;
  options.label_column = d.label_column;
  options.positive_label = d.positive_label;
  options.category_cap = d.category_cap;
  LoadReport report;
  Dataset data = load_csv(d.path, options, &report);
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
  return data;
}

void write_grid(const Grid& grid, const fs::path& out, const std::string& value_name) {
  write_file_atomic(out, out.extension() == ".json" ? grid_to_json(grid) : grid_to_csv(grid, value_name));
}

int cmd_generate(const std::string& generator, std::size_t n, double noise, double factor, std::uint64_t seed,
                 const fs::path& out) {
  Dataset d;
  if (generator == "circles") {
    d = make_circles(n, factor, noise, seed);
  } else if (generator == "moons") {
    d = make_moons(n, noise, seed);
  } else {
    throw ArgumentError("unknown generator '" + generator + "' (expected circles or moons)");
  }
  write_file_atomic(out, dataset_to_csv(d));
  std::cout << "wrote " << d.size() << " samples to " << out.string() << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& sets,
              const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out) {
  std::vector<std::string> overrides = sets;
  if (seed) {
    for (const char* key : {"data.seed", "model.seed", "train.seed"}) {
      overrides.push_back(std::string(key) + "=" + std::to_string(*seed));
    }
  }
  if (out) overrides.push_back("output_dir=" + Json(*out).dump());
  const RunConfig config =
      config_path.empty() ? parse_run_config("{}", overrides) : load_run_config(config_path, overrides);

  const Dataset data = load_source(config.data);
  auto [train_raw, test_raw] = split(data, config.data.test_fraction, config.data.seed);
  std::optional<Standardization> stats;
  Dataset train = train_raw, test = test_raw;
  if (config.data.standardize) {
    stats = fit_standardization(train_raw.x);
    train = apply_standardization(train_raw, *stats);
    test = apply_standardization(test_raw, *stats);
  }

  ModelSpec spec = config.model;
  spec.input_dim = data.dim();
  Model model = Model::create(spec, config.model_seed);
  const TrainReport report = fit(model, train, config.train, &test);

  const Metrics train_metrics = evaluate(model, train);
  const Metrics test_metrics = evaluate(model, test);
  ModelBundle bundle{model, data.feature_names, stats, config.train, config.model_seed, {}};
  auto record = [&](const std::string& prefix, const Metrics& m) {
    bundle.metrics[prefix + "_accuracy"] = m.accuracy;
    if (m.auc) bundle.metrics[prefix + "_auc"] = *m.auc;
    bundle.metrics[prefix + "_nll"] = m.mean_nll;
  };
  record("train", train_metrics);
  record("test", test_metrics);

  Json metrics;
  metrics["model"] = std::string(model_kind_name(spec.kind));
  metrics["epochs"] = config.train.epochs;
  metrics["train"] = metrics_json(train_metrics);
  metrics["test"] = metrics_json(test_metrics);
  std::ostringstream jsonl;
  write_report_jsonl(report, jsonl);

  const fs::path dir = config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_file_atomic(dir / "config.json", run_config_to_json(config));
  write_file_atomic(dir / "train.csv", dataset_to_csv(train_raw));
  write_file_atomic(dir / "test.csv", dataset_to_csv(test_raw));
  write_file_atomic(dir / "report.jsonl", jsonl.str());
  write_file_atomic(dir / "metrics.json", metrics.dump(2) + "\n");
  save_bundle(dir / "model.bundle", bundle);

  std::cout << model_kind_name(spec.kind) << ": train accuracy " << format_significant(train_metrics.accuracy, 6)
            << ", test accuracy " << format_significant(test_metrics.accuracy, 6) << "\n"
            << "wrote " << (dir / "model.bundle").string() << "\n";
  return 0;
}

int cmd_predict(const fs::path& bundle_path, const fs::path& input, const fs::path& out) {
  const ModelBundle bundle = load_bundle(bundle_path);
  bool has_labels = false;
  const Dataset data = load_for_bundle(bundle, input, &has_labels);
  const std::vector<double> y_hat = bundle.model.predict(data.x);
  std::string text = has_labels ? "sample_id,y_hat,label\n" : "sample_id,y_hat\n";
  for (std::size_t n = 0; n < y_hat.size(); ++n) {
    text += std::to_string(n) + "," + format_exact(y_hat[n]);
    if (has_labels) text += "," + std::to_string(data.labels[n]);
    text += "\n";
  }
  write_file_atomic(out, text);
  if (has_labels) std::cout << "accuracy " << format_exact(accuracy(y_hat, data.labels)) << "\n";
  return 0;
}

int cmd_explain(const fs::path& bundle_path, const fs::path& input, const fs::path& out,
                const std::string& importance_out) {
  const ModelBundle bundle = load_bundle(bundle_path);
  const Dataset data = load_for_bundle(bundle, input, nullptr);
  const std::vector<ExplanationRecord> records = explain_batch(bundle.model, data);
  const std::string text = explanations_to_csv(records, data.feature_names);
  std::string ranking;
  if (!importance_out.empty()) ranking = importance_to_csv(global_importance(records, data.feature_names));
  write_file_atomic(out, text);
  if (!importance_out.empty()) write_file_atomic(importance_out, ranking);
  return 0;
}

int cmd_grid(const fs::path& bundle_path, const std::string& range, std::size_t resolution, const fs::path& out,
             bool angles) {
  const GridRanges ranges = parse_range(range);
  const ModelBundle bundle = load_bundle(bundle_path);
  const Standardization* stats = bundle.standardization ? &*bundle.standardization : nullptr;
  const Grid grid = angles ? angle_grid(bundle.model, ranges, resolution, stats)
                           : boundary_grid(bundle.model, ranges, resolution, stats);
  write_grid(grid, out, angles ? "angle" : "p");
  return 0;
}

int cmd_rho_scatter(const fs::path& bundle_path, const fs::path& input, const fs::path& out) {
  const ModelBundle bundle = load_bundle(bundle_path);
  const Dataset data = load_for_bundle(bundle, input, nullptr);
  write_file_atomic(out, rho_scatter_to_csv(rho_scatter(bundle.model, data)));
  return 0;
}

int cmd_evaluate(const fs::path& bundle_path, const fs::path& input, const std::string& out) {
  const ModelBundle bundle = load_bundle(bundle_path);
  bool has_labels = false;
  const Dataset data = load_for_bundle(bundle, input, &has_labels);
  if (!has_labels) throw SchemaError("evaluate needs a label column in '" + input.string() + "'");
  Json j = metrics_json(evaluate(bundle.model, data));
  j["n"] = data.size();
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Point-wise linear classifiers: train, predict and explain"};
  app.name("pwl");
  app.require_subcommand(1);

  std::string generator = "circles", out, config_path, bundle_path, input, range = "-1.5,1.5,-1.5,1.5",
              importance;
  std::size_t n = 1000, resolution = 100;
  double noise = 0.05, factor = 0.5;
  std::uint64_t seed_value = 0;
  std::vector<std::string> sets;

  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  generate->add_option("generator", generator, "circles or moons")->required();
  generate->add_option("--n", n, "Number of samples");
  generate->add_option("--noise", noise, "Gaussian noise standard deviation");
  generate->add_option("--factor", factor, "Inner/outer radius ratio (circles)");
  generate->add_option("--seed", seed_value, "Random seed");
  generate->add_option("--out", out, "Output CSV path")->required();

  auto* train = app.add_subcommand("train", "Train a model from a JSON run config");
  train->add_option("--config", config_path, "Run config (JSON); defaults apply when omitted");
  train->add_option("--set", sets, "Override a config key, e.g. --set train.epochs=50");
  auto* train_seed = train->add_option("--seed", seed_value, "Seed for data, model and training");
  auto* train_out = train->add_option("--out", out, "Output directory");

  auto add_bundle_io = [&](CLI::App* sub, bool needs_input) {
    sub->add_option("--bundle", bundle_path, "Model bundle")->required();
    if (needs_input) sub->add_option("--input", input, "Input CSV (raw units)")->required();
    sub->add_option("--out", out, "Output path")->required();
  };
  auto* predict = app.add_subcommand("predict", "Predicted probabilities for a CSV");
  add_bundle_io(predict, true);
  auto* explain = app.add_subcommand("explain", "Per-sample weights and contributions for a CSV");
  add_bundle_io(explain, true);
  explain->add_option("--importance", importance, "Also write the global importance ranking here");
  auto* boundary = app.add_subcommand("boundary", "Probability grid over a 2-D input range");
  add_bundle_io(boundary, false);
  auto* angle_map = app.add_subcommand("angle-map", "atan2(xi_2, xi_1) grid over a 2-D input range");
  add_bundle_io(angle_map, false);
  for (CLI::App* sub : {boundary, angle_map}) {
    sub->add_option("--range", range, "xmin,xmax,ymin,ymax in raw units");
    sub->add_option("--resolution", resolution, "Cells per axis (>= 2)");
  }
  auto* rho = app.add_subcommand("rho-scatter", "Reallocated features of each sample");
  add_bundle_io(rho, true);
  auto* eval = app.add_subcommand("evaluate", "Accuracy, AUC and NLL on a labelled CSV");
  eval->add_option("--bundle", bundle_path, "Model bundle")->required();
  eval->add_option("--input", input, "Labelled CSV (raw units)")->required();
  eval->add_option("--out", out, "Write metrics JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*generate) return cmd_generate(generator, n, noise, factor, seed_value, out);
    if (*train) {
      return cmd_train(config_path, sets, *train_seed ? std::optional(seed_value) : std::nullopt,
                       *train_out ? std::optional(out) : std::nullopt);
    }
    if (*predict) return cmd_predict(bundle_path, input, out);
    if (*explain) return cmd_explain(bundle_path, input, out, importance);
    if (*boundary) return cmd_grid(bundle_path, range, resolution, out, false);
    if (*angle_map) return cmd_grid(bundle_path, range, resolution, out, true);
    if (*rho) return cmd_rho_scatter(bundle_path, input, out);
    if (*eval) return cmd_evaluate(bundle_path, input, out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace pwl::cli
