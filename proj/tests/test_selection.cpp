#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stn/selection.hpp"
#include "stn/synth.hpp"

namespace {

std::vector<std::size_t> sizes(const stn::FoldPlan& plan) {
  std::vector<std::size_t> out;
  for (const auto& f : plan.folds) out.push_back(f.validation.size());
  return out;
}

}  // namespace

TEST(Folds, ContiguousBlockSizes) {
  const auto plan = stn::make_folds(23, 5, stn::FoldScheme::KFoldContiguous);
  EXPECT_EQ(sizes(plan), (std::vector<std::size_t>{5, 5, 5, 4, 4}));
  std::vector<std::size_t> all;
  for (const auto& f : plan.folds) {
    EXPECT_EQ(f.train.size() + f.validation.size(), 23u);
    for (std::size_t k = 1; k < f.validation.size(); ++k) EXPECT_EQ(f.validation[k], f.validation[k - 1] + 1);
    all.insert(all.end(), f.validation.begin(), f.validation.end());
  }
  std::sort(all.begin(), all.end());
  for (std::size_t t = 0; t < 23; ++t) EXPECT_EQ(all[t], t);
}

TEST(Folds, LeaveOneOut) {
  const auto plan = stn::make_folds(10, 10, stn::FoldScheme::KFoldContiguous);
  ASSERT_EQ(plan.folds.size(), 10u);
  for (std::size_t f = 0; f < 10; ++f) {
    EXPECT_EQ(plan.folds[f].validation, std::vector<std::size_t>{f});
    EXPECT_EQ(plan.folds[f].train.size(), 9u);
  }
}

TEST(Folds, RollingOriginNeverLooksBack) {
  const auto plan = stn::make_folds(20, 4, stn::FoldScheme::RollingOrigin);
  ASSERT_EQ(plan.folds.size(), 4u);
  std::set<std::size_t> seen;
  for (const auto& f : plan.folds) {
    ASSERT_FALSE(f.train.empty());
    ASSERT_FALSE(f.validation.empty());
    EXPECT_LT(*std::max_element(f.train.begin(), f.train.end()), f.validation.front());
    EXPECT_EQ(f.train.front(), 0u);
    for (const auto v : f.validation) EXPECT_TRUE(seen.insert(v).second);
  }
  EXPECT_EQ(plan.folds.back().validation.back(), 19u);
}

TEST(Folds, Errors) {
  EXPECT_THROW(stn::make_folds(10, 1, stn::FoldScheme::KFoldContiguous), stn::ConfigError);
  EXPECT_THROW(stn::make_folds(10, 11, stn::FoldScheme::KFoldContiguous), stn::ConfigError);
  EXPECT_THROW(stn::make_folds(10, 10, stn::FoldScheme::RollingOrigin), stn::ConfigError);
}

TEST(CrossValidate, SinglePointAndDeterminism) {
  std::mt19937_64 rng(1);
  const auto d = oracle::random_design(3, 30, rng);
  const auto mask = stn::default_mask(3);
  const auto plan = stn::make_folds(30, 5, stn::FoldScheme::KFoldContiguous);
  const auto one = stn::cross_validate_grid(d, mask, {{0.5, 1.0}}, plan);
  EXPECT_EQ(one.best, 0u);
  EXPECT_EQ(one.best_1se, 0u);

  const auto a = stn::cross_validate(d, mask, {1.0, 0.5}, 12, 1e-2, plan);
  const auto b = stn::cross_validate(d, mask, {1.0, 0.5}, 12, 1e-2, plan);
  EXPECT_EQ(a.mean_cv_error, b.mean_cv_error);
  EXPECT_EQ(a.fold_errors, b.fold_errors);
  EXPECT_EQ(a.best, b.best);
  ASSERT_EQ(a.grid.size(), 24u);
  for (std::size_t g = 0; g < a.grid.size(); ++g) {
    EXPECT_GE(a.mean_cv_error[g], 0.0);
    EXPECT_LE(a.mean_cv_error[a.best], a.mean_cv_error[g]);
  }
  EXPECT_EQ(a.grid[a.best_1se].alpha, a.grid[a.best].alpha);
  EXPECT_GE(a.grid[a.best_1se].lambda, a.grid[a.best].lambda);
  EXPECT_NEAR(a.grid.front().lambda, stn::lambda_max(d, mask, 1.0), 1e-12);
}

TEST(CrossValidate, ZeroModelErrorIsValidationVariance) {
  std::mt19937_64 rng(2);
  const auto d = oracle::random_design(3, 20, rng);
  const auto mask = stn::default_mask(3);
  const auto plan = stn::make_folds(20, 4, stn::FoldScheme::KFoldContiguous);
  const double huge = 10.0 * stn::lambda_max(d, mask, 1.0);
  const auto cv = stn::cross_validate_grid(d, mask, {{1.0, huge}}, plan);
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& fold = plan.folds[f];
    Eigen::VectorXd train_mean = Eigen::VectorXd::Zero(3);
    for (const auto t : fold.train) train_mean += d.X.col(static_cast<Eigen::Index>(t));
    train_mean /= static_cast<double>(fold.train.size());
    double expected = 0.0;
    for (const auto v : fold.validation) expected += (d.X.col(static_cast<Eigen::Index>(v)) - train_mean).squaredNorm();
    expected /= static_cast<double>(3 * fold.validation.size());
    EXPECT_NEAR(cv.fold_errors(static_cast<Eigen::Index>(f), 0), expected, 1e-12);
  }
}

TEST(CrossValidate, RiskOnlyScoring) {
  std::mt19937_64 rng(3);
  const auto d = oracle::random_design(3, 20, rng);
  auto c = stn::CoefficientSet::zeros(3);
  c.intercept = d.X.rowwise().mean();
  const std::vector<std::size_t> cols{0, 1, 2, 3};
  double expected = 0.0;
  for (const auto t : cols) expected += std::pow(d.X(0, static_cast<Eigen::Index>(t)) - c.intercept(0), 2);
  EXPECT_NEAR(stn::prediction_error(d, c, cols, true), expected / 4.0, 1e-14);
}

TEST(CrossValidate, InvalidFolds) {
  std::mt19937_64 rng(4);
  const auto d = oracle::random_design(3, 10, rng);
  const auto mask = stn::default_mask(3);
  stn::FoldPlan plan;
  plan.folds.push_back({{0}, {1, 2}});
  EXPECT_THROW(stn::cross_validate_grid(d, mask, {{1.0, 1.0}}, plan), stn::ConfigError);
  plan.folds = {{{0, 1, 2}, {2, 3}}};
  EXPECT_THROW(stn::cross_validate_grid(d, mask, {{1.0, 1.0}}, plan), stn::ConfigError);
  plan.folds = {{{0, 1, 2}, {3, 30}}};
  EXPECT_THROW(stn::cross_validate_grid(d, mask, {{1.0, 1.0}}, plan), stn::DimensionError);
  EXPECT_THROW(stn::cross_validate_grid(d, mask, {}, plan), stn::ConfigError);
}

TEST(CrossValidate, PureNoiseSelectsHeavyShrinkage) {
  // Oracle: 50 simulated pure-noise panels; the median selected grid index must lie in the top decile.
  std::vector<std::size_t> picks;
  const std::size_t n_lambdas = 50;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd v(4, 41);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = n(rng);
    std::vector<stn::VariableMeta> vars{{"PD", stn::Role::RiskParameter, stn::Transform::None},
                                        {"A", stn::Role::Macro, stn::Transform::None},
                                        {"B", stn::Role::Macro, stn::Transform::None},
                                        {"C", stn::Role::Macro, stn::Transform::None}};
    const auto d = stn::build_design(stn::TimeSeriesPanel(vars, v, stn::quarter_labels(2000, 1, 41)));
    const auto plan = stn::make_folds(d.effective_samples(), 5, stn::FoldScheme::KFoldContiguous);
    const auto cv = stn::cross_validate(d, stn::default_mask(4), {1.0}, n_lambdas, 1e-3, plan);
    picks.push_back(cv.best);
  }
  std::nth_element(picks.begin(), picks.begin() + 25, picks.end());
  EXPECT_LT(picks[25], n_lambdas / 10);
}

TEST(CrossValidate, StrongNoiselessSignalBeatsNullModel) {
  stn::SynthSpec spec;
  spec.p = 4;
  spec.T = 40;
  spec.noise_sd.assign(4, 0.0);
  spec.coef_low = spec.coef_high = 0.5;
  spec.seed = 21;
  const auto gen = stn::generate(spec);
  const auto d = stn::build_design(gen.panel);
  const auto plan = stn::make_folds(d.effective_samples(), 5, stn::FoldScheme::KFoldContiguous);
  const auto cv = stn::cross_validate(d, stn::default_mask(4), {1.0}, 50, 1e-4, plan);
  EXPECT_LT(cv.mean_cv_error[cv.best] * 10.0, cv.mean_cv_error.front());
}
