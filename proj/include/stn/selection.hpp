#pragma once

// Cross-validation over time points for choosing lambda (and alpha).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stn/error.hpp"
#include "stn/model.hpp"
#include "stn/panel.hpp"
#include "stn/solver.hpp"

namespace stn {

enum class FoldScheme { KFoldContiguous, RollingOrigin };

inline const char* to_string(FoldScheme s) {
  return s == FoldScheme::KFoldContiguous ? "kfold" : "rolling";
}

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

struct FoldPlan {
  FoldScheme scheme = FoldScheme::KFoldContiguous;
  std::size_t k = 0;
  std::size_t samples = 0;  // Te the plan was built for
  std::vector<Fold> folds;
};

namespace detail {

// Sizes of n contiguous blocks covering `total` items: the first total % n
// blocks get one extra item.
inline std::vector<std::size_t> block_sizes(std::size_t total, std::size_t n) {
  std::vector<std::size_t> sizes(n, total / n);
  for (std::size_t b = 0; b < total % n; ++b) ++sizes[b];
  return sizes;
}

}  // namespace detail

/**
 * @brief Splits sample indices 0..Te-1 into folds.
 *
 * KFoldContiguous: k contiguous validation blocks partitioning all indices,
 * training on the rest. RollingOrigin: indices are cut into k + 1 contiguous
 * blocks and fold f trains on blocks 0..f and validates on block f + 1.
 */
inline FoldPlan make_folds(std::size_t te, std::size_t k, FoldScheme scheme) {
  if (k < 2 || k > te) throw ConfigError("fold count k must satisfy 2 <= k <= Te");
  FoldPlan plan{scheme, k, te, {}};
  if (scheme == FoldScheme::KFoldContiguous) {
    const auto sizes = detail::block_sizes(te, k);
    std::size_t start = 0;
    for (std::size_t f = 0; f < k; ++f) {
      Fold fold;
      for (std::size_t t = 0; t < te; ++t) {
        if (t >= start && t < start + sizes[f]) fold.validation.push_back(t);
        else fold.train.push_back(t);
      }
      start += sizes[f];
      plan.folds.push_back(std::move(fold));
    }
  } else {
    if (k + 1 > te) throw ConfigError("rolling-origin folds need k <= Te - 1");
    const auto sizes = detail::block_sizes(te, k + 1);
    std::size_t start = sizes[0];
    for (std::size_t f = 0; f < k; ++f) {
      Fold fold;
      for (std::size_t t = 0; t < start; ++t) fold.train.push_back(t);
      for (std::size_t t = start; t < start + sizes[f + 1]; ++t) fold.validation.push_back(t);
      start += sizes[f + 1];
      plan.folds.push_back(std::move(fold));
    }
  }
  return plan;
}

struct GridPoint {
  double alpha;
  double lambda;
};

struct CvOptions {
  SolverConfig solver;      // alpha and lambda are overridden per grid point
  bool score_risk_only = false;
};

struct CvResult {
  std::vector<GridPoint> grid;
  std::vector<double> mean_cv_error;
  std::vector<double> sd_cv_error;  // across folds
  Eigen::MatrixXd fold_errors;      // folds x grid
  std::size_t best = 0;
  std::size_t best_1se = 0;
};

/// Mean squared one-step prediction error of `coeffs` on the given columns.
inline double prediction_error(const DesignMatrices& design, const CoefficientSet& coeffs,
                               const std::vector<std::size_t>& columns, bool risk_only) {
  const Eigen::MatrixXd theta = coeffs.theta();
  const Eigen::Index rows = risk_only ? 1 : design.X.rows();
  double sum = 0.0;
  for (const auto c : columns) {
    const auto t = static_cast<Eigen::Index>(c);
    const Eigen::VectorXd pred = coeffs.intercept + theta * design.Z.col(t);
    sum += (design.X.col(t).head(rows) - pred.head(rows)).squaredNorm();
  }
  return sum / static_cast<double>(columns.size() * static_cast<std::size_t>(rows));
}

/// Cross-validates an explicit grid. Points sharing an alpha are solved as one warm-started path.
inline CvResult cross_validate_grid(const DesignMatrices& design, const ConstraintMask& mask,
                                    const std::vector<GridPoint>& grid, const FoldPlan& plan,
                                    const CvOptions& options = {}) {
  if (grid.empty()) throw ConfigError("cross-validation grid is empty");
  if (plan.folds.empty()) throw ConfigError("fold plan is empty");
  const auto te = design.effective_samples();
  for (const auto& fold : plan.folds) {
    if (fold.train.size() < 2) throw ConfigError("a fold has fewer than 2 training columns");
    if (fold.validation.empty()) throw ConfigError("a fold has an empty validation set");
    for (const auto v : fold.validation) {
      if (v >= te) throw DimensionError("fold index outside the design");
      if (std::find(fold.train.begin(), fold.train.end(), v) != fold.train.end())
        throw ConfigError("validation column " + std::to_string(v) + " also appears in training");
    }
    for (const auto t : fold.train)
      if (t >= te) throw DimensionError("fold index outside the design");
  }

  // Group grid indices by alpha, keeping first-appearance order.
  std::vector<double> alphas;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto it = std::find(alphas.begin(), alphas.end(), grid[g].alpha);
    if (it == alphas.end()) {
      alphas.push_back(grid[g].alpha);
      members.emplace_back();
      it = alphas.end() - 1;
    }
    members[static_cast<std::size_t>(it - alphas.begin())].push_back(g);
  }

  const auto nf = plan.folds.size();
  CvResult res;
  res.grid = grid;
  res.fold_errors.resize(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& fold = plan.folds[f];
    const auto train = subset_columns(design, fold.train);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      SolverConfig cfg = options.solver;
      cfg.alpha = alphas[a];
      std::vector<double> lambdas;
      for (const auto g : members[a]) lambdas.push_back(grid[g].lambda);
      const auto path = fit_lambdas(train, mask, cfg, lambdas);
      for (std::size_t m = 0; m < members[a].size(); ++m)
        res.fold_errors(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(members[a][m])) =
            prediction_error(design, path[m].coeffs, fold.validation, options.score_risk_only);
    }
  }

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const Eigen::VectorXd col = res.fold_errors.col(static_cast<Eigen::Index>(g));
    const double mean = col.mean();
    const double sd =
        nf > 1 ? std::sqrt((col.array() - mean).square().sum() / static_cast<double>(nf - 1)) : 0.0;
    res.mean_cv_error.push_back(mean);
    res.sd_cv_error.push_back(sd);
  }
  res.best = static_cast<std::size_t>(
      std::min_element(res.mean_cv_error.begin(), res.mean_cv_error.end()) - res.mean_cv_error.begin());

  // One-standard-error rule: most penalized point of the best alpha whose
  // error is within one standard error of the minimum.
  const double bound = res.mean_cv_error[res.best] + res.sd_cv_error[res.best] / std::sqrt(static_cast<double>(nf));
  res.best_1se = res.best;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (grid[g].alpha != grid[res.best].alpha || res.mean_cv_error[g] > bound) continue;
    if (grid[g].lambda > grid[res.best_1se].lambda) res.best_1se = g;
  }
  return res;
}

/**
 * @brief Cross-validates lambda paths for each alpha.
 *
 * Each alpha gets a log-spaced grid of n_lambdas values from its lambda_max on
 * the full design, shared by all folds.
 */
inline CvResult cross_validate(const DesignMatrices& design, const ConstraintMask& mask,
                               const std::vector<double>& alphas, std::size_t n_lambdas, double lambda_min_ratio,
                               const FoldPlan& plan, const CvOptions& options = {}) {
  if (alphas.empty()) throw ConfigError("alpha grid is empty");
  std::vector<GridPoint> grid;
  for (const double a : alphas) {
    const double lmax = lambda_max(design, mask, a, options.solver.standardize);
    for (const double l : lambda_grid(lmax, n_lambdas, lambda_min_ratio)) grid.push_back({a, l});
  }
  return cross_validate_grid(design, mask, grid, plan, options);
}

}  // namespace stn
