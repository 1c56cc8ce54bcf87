#include "pwl/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "pwl/error.hpp"
#include "pwl/random.hpp"

namespace pwl {

void TrainConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("train." + field + " " + why);
  };
  if (epochs == 0) fail("epochs", "must be positive");
  if (batch_size == 0) fail("batch_size", "must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate", "must be a positive number");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda", "must be non-negative");
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha", "must lie in [0, 1]");
  if (optimizer == OptimizerKind::Adam) {
    if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1", "must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2", "must lie in [0, 1)");
    if (!(epsilon > 0.0)) fail("epsilon", "must be positive");
  }
}

void write_report_jsonl(const TrainReport& report, std::ostream& out) {
  for (const EpochRecord& r : report.epochs) {
    nlohmann::ordered_json line;
    line["epoch"] = r.epoch;
    line["loss"] = r.train_loss;
    line["acc"] = r.train.accuracy;
    line["auc"] = r.train.auc ? nlohmann::ordered_json(*r.train.auc) : nlohmann::ordered_json(nullptr);
    if (r.validation) {
      line["val_loss"] = r.validation->mean_nll;
      line["val_acc"] = r.validation->accuracy;
      line["val_auc"] = r.validation->auc ? nlohmann::ordered_json(*r.validation->auc) : nlohmann::ordered_json(nullptr);
    }
    out << line.dump() << '\n';
  }
}

double nll_loss(std::span<const double> y_hat, std::span<const int> labels, double eps) {
  if (y_hat.size() != labels.size()) throw DimensionError("nll_loss: predictions and labels differ in length");
  if (y_hat.empty()) throw DataError("nll_loss of an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < y_hat.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw DataError("label " + std::to_string(labels[i]) + " at index " + std::to_string(i) + " is not 0 or 1");
    }
    const double p = std::clamp(y_hat[i], eps, 1.0 - eps);
    total -= labels[i] == 1 ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(y_hat.size());
}

NodeId build_xi_regularizer(Graph& graph, NodeId xi, double alpha, L2Mode mode) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("elastic-net alpha must lie in [0, 1]");
  const NodeId l2 = mode == L2Mode::Norm ? graph.row_l2(xi) : graph.row_sum_squares(xi);
  NodeId per_row;
  if (alpha == 1.0) {
    per_row = graph.row_l1(xi);
  } else if (alpha == 0.0) {
    per_row = l2;
  } else {
    per_row = graph.add(graph.scale(graph.row_l1(xi), alpha), graph.scale(l2, 1.0 - alpha));
  }
  return graph.mean(per_row);
}

double xi_regularizer(const Tensor& xi, double alpha, L2Mode mode) {
  Graph graph;
  const NodeId in = graph.constant(xi.rank() == 1 ? Tensor({1, xi.size()}, {xi.values().begin(), xi.values().end()})
                                                  : xi);
  return graph.value(build_xi_regularizer(graph, in, alpha, mode)).item();
}

NodeId build_objective(Graph& graph, const Model& model, const Tensor& x, std::span<const double> targets,
                       const TrainConfig& config) {
  const HeadNodes nodes = model.forward(graph, graph.constant(x));
  NodeId loss = graph.nll_with_logits(nodes.logit, targets);
  if (config.lambda > 0.0) {
    const NodeId penalty = build_xi_regularizer(graph, nodes.penalized, config.alpha, config.l2_mode);
    loss = graph.add(loss, graph.scale(penalty, config.lambda));
  }
  return loss;
}

void Optimizer::step(const std::vector<ParameterRef>& parameters, const GradientTable& grads) {
  ++steps_;
  const double lr = config_.learning_rate;
  if (config_.optimizer == OptimizerKind::Sgd) {
    for (const ParameterRef& p : parameters) {
      if (!grads.contains(*p.tensor)) continue;
      const Tensor& g = grads.of(*p.tensor);
      for (std::size_t i = 0; i < g.size(); ++i) (*p.tensor)[i] -= lr * g[i];
    }
    return;
  }
  if (first_moment_.empty()) {
    for (const ParameterRef& p : parameters) {
      first_moment_.emplace_back(p.tensor->shape());
      second_moment_.emplace_back(p.tensor->shape());
    }
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < parameters.size(); ++k) {
    Tensor& param = *parameters[k].tensor;
    if (!grads.contains(param)) continue;
    const Tensor& g = grads.of(param);
    Tensor& m = first_moment_[k];
    Tensor& v = second_moment_[k];
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      param[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

double accuracy(std::span<const double> y_hat, std::span<const int> labels) {
  if (y_hat.size() != labels.size() || y_hat.empty()) throw DimensionError("accuracy needs matching, non-empty inputs");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y_hat.size(); ++i) correct += ((y_hat[i] >= 0.5 ? 1 : 0) == labels[i]);
  return static_cast<double>(correct) / static_cast<double>(y_hat.size());
}

std::optional<double> auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  if (std::any_of(scores.begin(), scores.end(), [](double s) { return std::isnan(s); })) {
    throw NumericError("auc: scores contain NaN");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U from mid-ranks.
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) positive_rank_sum += mid_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

Metrics evaluate_predictions(std::span<const double> y_hat, std::span<const int> labels) {
  return Metrics{accuracy(y_hat, labels), auc(y_hat, labels), nll_loss(y_hat, labels)};
}

Metrics evaluate(const Model& model, const Dataset& data) {
  const std::vector<double> y_hat = model.predict(data.x);
  return evaluate_predictions(y_hat, data.labels);
}

TrainReport fit(Model& model, const Dataset& train, const TrainConfig& config, const Dataset* validation) {
  config.validate();
  train.validate();
  if (train.dim() != model.input_dim()) {
    throw SchemaError("model expects " + std::to_string(model.input_dim()) + " features, training data has " +
                      std::to_string(train.dim()));
  }
  if (validation) {
    validation->validate();
    if (validation->dim() != model.input_dim()) throw SchemaError("validation data feature count differs");
  }

  using Clock = std::chrono::steady_clock;
  TrainReport report;
  auto record = [&](std::size_t epoch, double seconds) {
    EpochRecord r;
    r.epoch = epoch;
    r.train = evaluate(model, train);
    r.train_loss = r.train.mean_nll;
    if (validation) r.validation = evaluate(model, *validation);
    r.seconds = seconds;
    report.epochs.push_back(r);
  };
  const std::vector<ParameterRef> parameters = model.parameters();
  auto check_parameters = [&](std::size_t epoch) {
    for (const ParameterRef& p : parameters) {
      if (!p.tensor->all_finite()) {
        throw NumericError("parameter " + p.name + " is non-finite at epoch " + std::to_string(epoch) +
                           " (learning rate " + std::to_string(config.learning_rate) + ")");
      }
    }
  };
  check_parameters(0);
  record(0, 0.0);

  Optimizer optimizer(config);
  Rng rng(config.seed);
  const std::size_t n = train.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> targets;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = Clock::now();
    if (config.shuffle) rng.shuffle(order);
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size, ++batch_index) {
      const std::size_t count = std::min(config.batch_size, n - begin);
      const std::span<const std::size_t> rows(order.data() + begin, count);
      const Tensor x = train.x.gather_rows(rows);
      targets.clear();
      for (std::size_t r : rows) targets.push_back(static_cast<double>(train.labels[r]));

      Graph graph;
      const NodeId loss = build_objective(graph, model, x, targets, config);
      const double value = graph.value(loss).item();
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + " (learning rate " + std::to_string(config.learning_rate) +
                           ")");
      }
      optimizer.step(parameters, graph.backward(loss));
    }
    check_parameters(epoch);
    record(epoch, std::chrono::duration<double>(Clock::now() - start).count());
  }

  model.set_trained(true);
  for (const ParameterRef& p : parameters) report.final_parameters.emplace_back(p.name, *p.tensor);
  return report;
}

}  // namespace pwl
