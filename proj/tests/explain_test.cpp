#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "json.hpp"
#include "pwl/data.hpp"
#include "pwl/error.hpp"
#include "pwl/explain.hpp"
#include "pwl/training.hpp"

namespace {

using namespace pwl;

// Type I head whose eta is identically one, so xi equals the universal weight.
Model constant_eta_model(const std::vector<double>& w) {
  ModelSpec spec;
  spec.kind = ModelKind::PwlReallocI;
  spec.input_dim = w.size();
  spec.hidden = {3};
  spec.activation = Activation::Sigmoid;
  auto p = std::get<PwlParams>(Model::create(spec, 0).params());
  p.extractor.layers[0].weight = Tensor::zeros(3, w.size());
  p.extractor.layers[0].bias = Tensor({3}, 0.0);
  p.extractor.transform = Tensor({w.size(), 3}, 2.0 / 3.0);
  p.w = Tensor({w.size()}, w);
  p.b = Tensor::scalar(0.25);
  Model model(spec, p);
  model.set_trained(true);
  return model;
}

Dataset two_rows() {
  Dataset d;
  d.x = Tensor::matrix({{1, 1}, {-2, 0.5}});
  d.labels = {1, 0};
  d.feature_names = {"a", "b"};
  return d;
}

const Model& trained_circles_model() {
  static const Model model = [] {
    ModelSpec spec;
    spec.kind = ModelKind::PwlReallocI;
    spec.hidden = {32, 32};
    Model m = Model::create(spec, 0);
    TrainConfig config;
    config.epochs = 150;
    config.learning_rate = 3e-3;
    fit(m, standardize(make_circles(600, 0.5, 0.05, 0)), config);
    return m;
  }();
  return model;
}

TEST(Explain, ConstantEtaGivesUniversalWeight) {
  const Model model = constant_eta_model({2, -5});
  const auto records = explain_batch(model, two_rows());
  ASSERT_EQ(records.size(), 2u);
  for (const auto& r : records) {
    EXPECT_NEAR(r.xi[0], 2.0, 1e-12);
    EXPECT_NEAR(r.xi[1], -5.0, 1e-12);
    EXPECT_EQ(r.bias, 0.25);
    EXPECT_NEAR(r.contributions[0] + r.contributions[1] + r.bias, r.logit, 1e-12);
    ASSERT_TRUE(r.rho.has_value());
  }
  EXPECT_NEAR(records[0].contributions[0], 2.0, 1e-12);
  EXPECT_NEAR(records[0].contributions[1], -5.0, 1e-12);
  EXPECT_EQ(records[1].sample_id, 1u);
  EXPECT_EQ(records[1].label, 0);
}

TEST(Explain, Preconditions) {
  ModelSpec spec;
  spec.kind = ModelKind::PwlReallocII;
  spec.hidden = {4};
  Model model = Model::create(spec, 0);
  EXPECT_THROW(explain_batch(model, two_rows()), ContractError);
  model.set_trained(true);
  EXPECT_NO_THROW(explain_batch(model, two_rows()));
  Dataset wide = two_rows();
  wide.x = Tensor::zeros(2, 3);
  wide.feature_names = {"a", "b", "c"};
  EXPECT_THROW(explain_batch(model, wide), SchemaError);

  spec.kind = ModelKind::Deep;
  Model deep = Model::create(spec, 0);
  deep.set_trained(true);
  EXPECT_THROW(explain_batch(deep, two_rows()), ContractError);
}

TEST(Explain, LogisticXiIsConstant) {
  ModelSpec spec;
  spec.kind = ModelKind::Logistic;
  Model model(spec, LogisticParams{Tensor::vector({0.5, -1.5}), Tensor::scalar(0.1)});
  model.set_trained(true);
  for (const auto& r : explain_batch(model, two_rows())) {
    EXPECT_EQ(r.xi, (std::vector<double>{0.5, -1.5}));
    EXPECT_FALSE(r.rho.has_value());
  }
}

TEST(Importance, RanksByMeanAbsoluteContribution) {
  const Model model = constant_eta_model({2, -5});
  const auto ranking = global_importance(explain_batch(model, two_rows()), {"a", "b"});
  ASSERT_EQ(ranking.size(), 2u);
  EXPECT_EQ(ranking[0].name, "b");
  EXPECT_EQ(ranking[1].name, "a");
  // Contributions of b: -5 and -2.5.
  EXPECT_NEAR(ranking[0].mean_abs, 3.75, 1e-12);
  EXPECT_NEAR(ranking[0].mean, -3.75, 1e-12);
  EXPECT_NEAR(ranking[0].stddev, 1.25, 1e-12);

  Dataset doubled = two_rows().subset({0, 1, 0, 1});
  const auto again = global_importance(explain_batch(model, doubled), {"a", "b"});
  EXPECT_EQ(again[0].name, "b");
  EXPECT_NEAR(again[0].mean_abs, 3.75, 1e-12);
  EXPECT_EQ(global_importance(explain_batch(model, two_rows()))[0].name, "feature2");
}

TEST(Importance, ConstantColumnRanksLast) {
  Dataset d = make_circles(300, 0.5, 0.05, 3);
  Tensor x({d.size(), 3});
  for (std::size_t i = 0; i < d.size(); ++i) {
    x.at(i, 0) = d.x.at(i, 0);
    x.at(i, 1) = d.x.at(i, 1);
    x.at(i, 2) = 4.0;
  }
  d.x = x;
  d.feature_names = {"x1", "x2", "junk"};
  d = standardize(d);
  ModelSpec spec;
  spec.kind = ModelKind::PwlReallocI;
  spec.input_dim = 3;
  spec.hidden = {16};
  Model model = Model::create(spec, 0);
  TrainConfig config;
  config.epochs = 30;
  fit(model, d, config);
  const auto ranking = global_importance(explain_batch(model, d), d.feature_names);
  EXPECT_EQ(ranking.back().name, "junk");
  EXPECT_EQ(ranking.back().mean_abs, 0.0);
}

TEST(Grid, CoordinatesAndOrder) {
  const GridRanges unit{0, 1, 0, 1};
  const Tensor pts = grid_points(unit, 3);
  ASSERT_EQ(pts.rows(), 9u);
  const double expected[9][2] = {{0, 0}, {0.5, 0}, {1, 0}, {0, 0.5}, {0.5, 0.5}, {1, 0.5}, {0, 1}, {0.5, 1}, {1, 1}};
  for (std::size_t k = 0; k < 9; ++k) {
    EXPECT_EQ(pts.at(k, 0), expected[k][0]);
    EXPECT_EQ(pts.at(k, 1), expected[k][1]);
  }
  EXPECT_THROW((GridRanges{1, 0, 0, 1}.validate()), ArgumentError);
}

TEST(Grid, ValuesArePredictions) {
  const Model& model = trained_circles_model();
  const GridRanges ranges;
  const Grid grid = boundary_grid(model, ranges, 7);
  ASSERT_EQ(grid.values.size(), 49u);
  const std::vector<double> p = model.predict(grid_points(ranges, 7));
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_EQ(grid.values[k], p[k]);
  EXPECT_EQ(grid.x_at(6), 1.5);
  EXPECT_EQ(grid.y_at(0), -1.5);
  // Evaluating a grid does not touch the model.
  EXPECT_EQ(boundary_grid(model, ranges, 7).values, grid.values);
}

TEST(Grid, LogisticBoundaryIsALine) {
  ModelSpec spec;
  spec.kind = ModelKind::Logistic;
  const Model model(spec, LogisticParams{Tensor::vector({1.0, 2.0}), Tensor::scalar(-0.3)});
  const Grid grid = boundary_grid(model, GridRanges{}, 41);
  // Along every row the crossing sits at x = 0.3 - 2y.
  for (std::size_t j = 0; j < 41; ++j) {
    const double y = grid.y_at(j);
    for (std::size_t i = 0; i < 41; ++i) {
      const double x = grid.x_at(i);
      const double p = grid.values[j * 41 + i];
      if (x > 0.3 - 2 * y + 1e-9) EXPECT_GT(p, 0.5);
      if (x < 0.3 - 2 * y - 1e-9) EXPECT_LT(p, 0.5);
    }
  }
}

TEST(Grid, CirclesBoundaryEnclosesInnerRing) {
  const Model& model = trained_circles_model();
  const Dataset d = standardize(make_circles(600, 0.5, 0.05, 0));
  const GridRanges raw{-1.5, 1.5, -1.5, 1.5};
  const Grid grid = boundary_grid(model, raw, 61, &*d.standardization);
  for (std::size_t j = 0; j < 61; ++j) {
    for (std::size_t i = 0; i < 61; ++i) {
      const double r = std::hypot(grid.x_at(i), grid.y_at(j));
      const double p = grid.values[j * 61 + i];
      if (r < 0.4) EXPECT_GT(p, 0.5) << r;
      if (r > 1.1 && r < 1.4) EXPECT_LT(p, 0.5) << r;
    }
  }
}

TEST(Grid, AngleMap) {
  const Model model = constant_eta_model({2, -5});
  const Grid grid = angle_grid(model, GridRanges{}, 4);
  for (double v : grid.values) EXPECT_NEAR(v, std::atan2(-5.0, 2.0), 1e-12);
}

TEST(Grid, RequiresTwoFeatures) {
  ModelSpec spec;
  spec.kind = ModelKind::PwlReallocI;
  spec.input_dim = 3;
  spec.hidden = {4};
  const Model model = Model::create(spec, 0);
  EXPECT_THROW(boundary_grid(model, GridRanges{}, 10), ContractError);
  EXPECT_THROW(boundary_grid(constant_eta_model({1, 1}), GridRanges{}, 1), ContractError);
}

TEST(RhoScatter, TypeIRho) {
  const Model model = constant_eta_model({2, -5});
  const RhoScatter s = rho_scatter(model, two_rows());
  EXPECT_NEAR(s.rho.at(1, 0), -2.0, 1e-12);
  EXPECT_NEAR(s.rho.at(1, 1), 0.5, 1e-12);
  EXPECT_EQ(s.labels, (std::vector<int>{1, 0}));
  ModelSpec spec;
  spec.kind = ModelKind::PwlStraightforward;
  spec.hidden = {4};
  EXPECT_THROW(rho_scatter(Model::create(spec, 0), two_rows()), ContractError);
}

TEST(Writers, Formats) {
  const Model model = constant_eta_model({2, -5});
  const auto records = explain_batch(model, two_rows());
  const std::string csv = explanations_to_csv(records, {"a", "b"});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sample_id,y_hat,label,xi_a,xi_b,c_a,c_b,bias");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);

  const std::string imp = importance_to_csv(global_importance(records, {"a", "b"}));
  EXPECT_EQ(imp.substr(0, imp.find('\n')), "rank,feature,mean_abs_c,mean_c,sd_c");
  EXPECT_NE(imp.find("\n1,b,"), std::string::npos);

  const Grid grid = boundary_grid(model, GridRanges{0, 1, 0, 1}, 2);
  const std::string gc = grid_to_csv(grid, "p");
  EXPECT_EQ(gc.substr(0, gc.find('\n')), "x,y,p");
  EXPECT_EQ(std::count(gc.begin(), gc.end(), '\n'), 5);

  const auto j = nlohmann::json::parse(grid_to_json(grid));
  EXPECT_EQ(j["resolution"], 2);
  EXPECT_EQ(j["values"].size(), 2u);
  EXPECT_EQ(j["values"][1].size(), 2u);
  EXPECT_EQ(j["xmax"], 1.0);

  const std::string rc = rho_scatter_to_csv(rho_scatter(model, two_rows()));
  EXPECT_EQ(rc.substr(0, rc.find('\n')), "sample_id,rho_1,rho_2,label");
}

}  // namespace
