#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pwl/data.hpp"
#include "pwl/graph.hpp"
#include "pwl/model.hpp"

namespace pwl {

enum class OptimizerKind { Sgd, Adam };

/// How the L2 half of the elastic net measures xi: the plain norm, or the
/// squared norm (ridge-style).
enum class L2Mode { Norm, Squared };

struct TrainConfig {
  std::size_t epochs = 300;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lambda = 0.0;  // regularization strength
  double alpha = 1.0;   // elastic-net mix: alpha * L1 + (1 - alpha) * L2
  L2Mode l2_mode = L2Mode::Norm;
  std::uint64_t seed = 0;
  bool shuffle = true;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct Metrics {
  double accuracy = 0.0;
  std::optional<double> auc;  // absent for single-class data
  double mean_nll = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 0 is the state before training
  double train_loss = 0.0;  // mean NLL over the whole training set
  Metrics train;
  std::optional<Metrics> validation;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::vector<std::pair<std::string, Tensor>> final_parameters;
};

/// One JSON object per epoch: epoch, loss, acc, auc (+ val_* when present).
/// Timings are left out so the stream is reproducible.
void write_report_jsonl(const TrainReport& report, std::ostream& out);

/// Mean of -[t log p + (1 - t) log(1 - p)] with p clipped to [eps, 1 - eps].
double nll_loss(std::span<const double> y_hat, std::span<const int> labels, double eps = 1e-12);

/// Batch mean of alpha * |xi_n|_1 + (1 - alpha) * |xi_n|_2 on a graph.
NodeId build_xi_regularizer(Graph& graph, NodeId xi, double alpha, L2Mode mode = L2Mode::Norm);
double xi_regularizer(const Tensor& xi, double alpha, L2Mode mode = L2Mode::Norm);

/// Training objective: mean NLL + lambda * xi regularizer.
NodeId build_objective(Graph& graph, const Model& model, const Tensor& x, std::span<const double> targets,
                       const TrainConfig& config);

class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& config) : config_(config) {}
  void step(const std::vector<ParameterRef>& parameters, const GradientTable& grads);

 private:
  TrainConfig config_;
  std::size_t steps_ = 0;
  std::vector<Tensor> first_moment_;
  std::vector<Tensor> second_moment_;
};

/// Mini-batch training of `model` in place. Deterministic for a fixed
/// config seed. Throws NumericError when the loss stops being finite.
TrainReport fit(Model& model, const Dataset& train, const TrainConfig& config,
                const Dataset* validation = nullptr);

/// Fraction with (y_hat >= 0.5) == label.
double accuracy(std::span<const double> y_hat, std::span<const int> labels);
/// Rank-statistic AUC with mid-ranks for ties; nullopt for one class.
std::optional<double> auc(std::span<const double> scores, std::span<const int> labels);

Metrics evaluate(const Model& model, const Dataset& data);
Metrics evaluate_predictions(std::span<const double> y_hat, std::span<const int> labels);

}  // namespace pwl
