#pragma once

// Cyclic coordinate descent for the mask-constrained elastic net
//
//   min  1/2 ||X - b1' - Theta Z||_F^2 + lambda [ (1-alpha)/2 ||Theta||_2^2 + alpha ||Theta||_1 ]
//
// solved as p independent row problems. Frozen coordinates are never visited,
// so they stay bitwise zero. With `standardize` the penalty acts on the
// coefficients of the sd-scaled predictors; coefficients are always returned
// on the original scale.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "stn/error.hpp"
#include "stn/model.hpp"
#include "stn/panel.hpp"

namespace stn {

struct SolverConfig {
  double alpha = 0.5;  // 1 = pure lasso
  double lambda = 0.0;
  double tol = 1e-7;   // max |coefficient change| per sweep, solver scale
  std::size_t max_sweeps = 10000;
  bool standardize = true;
  unsigned threads = 1;        // rows solved in parallel when > 1
  bool check_descent = false;  // verify every sweep lowers the row objective
};

inline void validate(const SolverConfig& c) {
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw ConfigError("lambda must be finite and >= 0");
  if (!(c.tol > 0.0)) throw ConfigError("tol must be > 0");
  if (c.max_sweeps == 0) throw ConfigError("max_sweeps must be positive");
}

struct FitReport {
  double objective_value = 0.0;
  std::size_t sweeps_used = 0;  // max over rows
  bool converged = false;
  double kkt_residual = 0.0;
  std::vector<std::size_t> per_row_sweeps;
};

struct FitResult {
  CoefficientSet coeffs;
  FitReport report;
};

struct RowFit {
  Eigen::VectorXd psi;  // length p
  Eigen::VectorXd phi;  // length p
  double intercept = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
};

struct PathPoint {
  double lambda;
  CoefficientSet coeffs;
  FitReport report;
};

namespace detail {

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

// Centered, scaled predictors and their cross products. scale(j) == 0 marks a
// predictor that is skipped (constant series).
struct Prepared {
  Eigen::Index p = 0;
  Eigen::MatrixXd xc;     // p x Te
  Eigen::MatrixXd zs;     // 2p x Te
  Eigen::VectorXd scale;  // 2p
  Eigen::MatrixXd gram;   // 2p x 2p, zs zs'
  Eigen::MatrixXd cross;  // p x 2p, xc zs'
};

inline void check_design(const DesignMatrices& d) {
  if (d.Z.rows() != 2 * d.X.rows() || d.Z.cols() != d.X.cols())
    throw DimensionError("design: Z must be 2p x Te when X is p x Te");
  if (!d.X.allFinite() || !d.Z.allFinite()) throw DomainError("design contains non-finite values");
}

inline void check_mask(const DesignMatrices& d, const ConstraintMask& mask) {
  if (mask.p() != d.num_variables())
    throw DimensionError("mask is for p = " + std::to_string(mask.p()) + " but design has p = " +
                         std::to_string(d.num_variables()));
}

inline Eigen::VectorXd predictor_scale(const DesignMatrices& d, bool standardize) {
  Eigen::VectorXd s(d.Z.rows());
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    const double sd = d.predictor_sds(j);
    s(j) = sd > 0.0 ? (standardize ? sd : 1.0) : 0.0;
  }
  return s;
}

inline Prepared prepare(const DesignMatrices& d, bool standardize) {
  check_design(d);
  Prepared pr;
  pr.p = d.X.rows();
  pr.scale = predictor_scale(d, standardize);
  pr.xc = d.X.colwise() - d.response_means;
  pr.zs = d.Z.colwise() - d.predictor_means;
  for (Eigen::Index j = 0; j < pr.zs.rows(); ++j) {
    if (pr.scale(j) > 0.0) pr.zs.row(j) /= pr.scale(j);
    else pr.zs.row(j).setZero();
  }
  pr.gram = pr.zs * pr.zs.transpose();
  pr.cross = pr.xc * pr.zs.transpose();
  return pr;
}

inline std::vector<Eigen::Index> active_set(const Prepared& pr, const ConstraintMask& mask, Eigen::Index row) {
  std::vector<Eigen::Index> act;
  for (Eigen::Index j = 0; j < 2 * pr.p; ++j)
    if (!mask.frozen(static_cast<std::size_t>(row), static_cast<std::size_t>(j)) && pr.scale(j) > 0.0)
      act.push_back(j);
  return act;
}

inline double row_objective(const Prepared& pr, Eigen::Index row, const Eigen::VectorXd& theta, double lambda,
                            double alpha) {
  const Eigen::VectorXd r = pr.xc.row(row).transpose() - pr.zs.transpose() * theta;
  return 0.5 * r.squaredNorm() +
         lambda * (0.5 * (1.0 - alpha) * theta.squaredNorm() + alpha * theta.lpNorm<1>());
}

struct RowOutcome {
  std::size_t sweeps = 0;
  bool converged = false;
};

// Coordinate descent on one row in the scaled coordinates, using covariance
// updates: grad(j) = <zs_j, residual> is maintained through the Gram matrix.
inline RowOutcome solve_row(const Prepared& pr, const ConstraintMask& mask, Eigen::Index row, double lambda,
                            const SolverConfig& cfg, Eigen::Ref<Eigen::VectorXd> theta) {
  const auto act = active_set(pr, mask, row);
  for (Eigen::Index j = 0; j < theta.size(); ++j)
    if (std::find(act.begin(), act.end(), j) == act.end()) theta(j) = 0.0;

  Eigen::VectorXd grad = pr.cross.row(row).transpose() - pr.gram * theta;
  const double l1 = lambda * cfg.alpha;
  const double l2 = lambda * (1.0 - cfg.alpha);

  RowOutcome out;
  if (act.empty()) {
    out.converged = true;
    return out;
  }
  double prev_obj = cfg.check_descent ? row_objective(pr, row, theta, lambda, cfg.alpha) : 0.0;
  for (std::size_t sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (const auto j : act) {
      const double old = theta(j);
      const double gjj = pr.gram(j, j);
      const double updated = soft_threshold(grad(j) + gjj * old, l1) / (gjj + l2);
      if (updated != old) {
        const double delta = updated - old;
        for (const auto k : act) grad(k) -= pr.gram(k, j) * delta;
        theta(j) = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    out.sweeps = sweep;
    if (cfg.check_descent) {
      const double obj = row_objective(pr, row, theta, lambda, cfg.alpha);
      if (obj > prev_obj + 1e-12 * std::max(1.0, std::abs(prev_obj)))
        throw Error("coordinate descent sweep " + std::to_string(sweep) + " increased the objective of row " +
                    std::to_string(row));
      prev_obj = obj;
    }
    if (max_delta < cfg.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Theta in scaled coordinates (p x 2p) -> original-scale coefficients.
inline CoefficientSet unscale(const Prepared& pr, const DesignMatrices& d, const Eigen::MatrixXd& theta_s) {
  const Eigen::Index p = pr.p;
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p, 2 * p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < 2 * p; ++j)
      if (theta_s(i, j) != 0.0) theta(i, j) = theta_s(i, j) / pr.scale(j);
  CoefficientSet c;
  c.psi = theta.leftCols(p);
  c.phi = theta.rightCols(p);
  c.intercept = d.response_means - theta * d.predictor_means;
  return c;
}

inline Eigen::MatrixXd scaled_start(const Prepared& pr, const CoefficientSet* warm) {
  Eigen::MatrixXd theta_s = Eigen::MatrixXd::Zero(pr.p, 2 * pr.p);
  if (warm == nullptr) return theta_s;
  if (!warm->consistent() || static_cast<Eigen::Index>(warm->p()) != pr.p)
    throw DimensionError("warm start has the wrong dimensions");
  const Eigen::MatrixXd t = warm->theta();
  for (Eigen::Index i = 0; i < pr.p; ++i)
    for (Eigen::Index j = 0; j < 2 * pr.p; ++j) theta_s(i, j) = t(i, j) * pr.scale(j);
  return theta_s;
}

inline Eigen::VectorXd penalty_weights(const DesignMatrices& d, bool standardize) {
  if (!standardize) return Eigen::VectorXd::Ones(d.Z.rows());
  return predictor_scale(d, true);
}

}  // namespace detail

/// Penalized objective at the given coefficients (penalty on scaled coefficients when standardizing).
inline double objective(const DesignMatrices& design, const CoefficientSet& coeffs, const SolverConfig& config) {
  detail::check_design(design);
  if (!coeffs.consistent() || coeffs.p() != design.num_variables())
    throw DimensionError("coefficients do not match the design");
  if (!coeffs.psi.allFinite() || !coeffs.phi.allFinite() || !coeffs.intercept.allFinite())
    throw DomainError("coefficient set contains non-finite values");
  const Eigen::MatrixXd theta = coeffs.theta();
  const Eigen::MatrixXd resid = (design.X - theta * design.Z).colwise() - coeffs.intercept;
  const Eigen::VectorXd w = detail::penalty_weights(design, config.standardize);
  const Eigen::MatrixXd scaled = theta * w.asDiagonal();
  const double a = config.alpha;
  return 0.5 * resid.squaredNorm() +
         config.lambda * (0.5 * (1.0 - a) * scaled.squaredNorm() + a * scaled.cwiseAbs().sum());
}

/**
 * @brief Largest violation of the subgradient optimality conditions over unfrozen coordinates.
 *
 * Evaluated in the solver's coordinates (sd-scaled predictors when
 * standardizing), so it certifies exactly the problem fit() solves.
 */
inline double kkt_residual(const DesignMatrices& design, const CoefficientSet& coeffs, const SolverConfig& config,
                           const ConstraintMask& mask) {
  detail::check_design(design);
  detail::check_mask(design, mask);
  if (!coeffs.consistent() || coeffs.p() != design.num_variables())
    throw DimensionError("coefficients do not match the design");
  const auto pr = detail::prepare(design, config.standardize);
  const Eigen::MatrixXd theta = coeffs.theta();
  const Eigen::MatrixXd resid = (design.X - theta * design.Z).colwise() - coeffs.intercept;
  const double l1 = config.lambda * config.alpha;
  const double l2 = config.lambda * (1.0 - config.alpha);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < pr.p; ++i) {
    for (const auto j : detail::active_set(pr, mask, i)) {
      const double g = -pr.zs.row(j).dot(resid.row(i));
      const double t = theta(i, j) * pr.scale(j);
      const double v = t != 0.0 ? std::abs(g + l2 * t + l1 * (t > 0 ? 1.0 : -1.0)) : std::max(0.0, std::abs(g) - l1);
      worst = std::max(worst, v);
    }
  }
  return worst;
}

/// Smallest lambda at which Theta = 0 is optimal.
inline double lambda_max(const DesignMatrices& design, const ConstraintMask& mask, double alpha,
                         bool standardize = true) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("lambda_max needs alpha in (0, 1]");
  detail::check_mask(design, mask);
  const auto pr = detail::prepare(design, standardize);
  double m = 0.0;
  for (Eigen::Index i = 0; i < pr.p; ++i)
    for (const auto j : detail::active_set(pr, mask, i)) m = std::max(m, std::abs(pr.cross(i, j)));
  return m / alpha;
}

/// Solves a single row problem (the equation of variable `row`) on its own.
inline RowFit fit_row(const DesignMatrices& design, const ConstraintMask& mask, std::size_t row,
                      const SolverConfig& config) {
  validate(config);
  detail::check_mask(design, mask);
  if (row >= design.num_variables()) throw DimensionError("row index out of range");
  const auto pr = detail::prepare(design, config.standardize);
  const auto r = static_cast<Eigen::Index>(row);
  Eigen::MatrixXd theta_s = Eigen::MatrixXd::Zero(pr.p, 2 * pr.p);
  Eigen::VectorXd row_s = theta_s.row(r).transpose();
  const auto outcome = detail::solve_row(pr, mask, r, config.lambda, config, row_s);
  theta_s.row(r) = row_s.transpose();
  // Same unscaling path as fit(), so the assembled rows match it bit for bit.
  const auto c = detail::unscale(pr, design, theta_s);
  RowFit out;
  out.psi = c.psi.row(r).transpose();
  out.phi = c.phi.row(r).transpose();
  out.intercept = c.intercept(r);
  out.sweeps = outcome.sweeps;
  out.converged = outcome.converged;
  return out;
}

namespace detail {

inline FitResult fit_prepared(const Prepared& pr, const DesignMatrices& design, const ConstraintMask& mask,
                              const SolverConfig& config, Eigen::MatrixXd& theta_s) {
  std::vector<RowOutcome> outcomes(static_cast<std::size_t>(pr.p));
  parallel_for(static_cast<std::size_t>(pr.p), config.threads, [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    Eigen::VectorXd row = theta_s.row(r).transpose();
    outcomes[i] = solve_row(pr, mask, r, config.lambda, config, row);
    theta_s.row(r) = row.transpose();
  });
  FitResult res;
  res.coeffs = unscale(pr, design, theta_s);
  res.report.converged = true;
  for (const auto& o : outcomes) {
    res.report.per_row_sweeps.push_back(o.sweeps);
    res.report.sweeps_used = std::max(res.report.sweeps_used, o.sweeps);
    res.report.converged = res.report.converged && o.converged;
  }
  res.report.objective_value = objective(design, res.coeffs, config);
  res.report.kkt_residual = kkt_residual(design, res.coeffs, config, mask);
  return res;
}

}  // namespace detail

/**
 * @brief Fits (Psi, Phi, b) at config.lambda.
 *
 * Running out of sweeps is not an error: the last iterate is returned with
 * report.converged == false.
 */
inline FitResult fit(const DesignMatrices& design, const ConstraintMask& mask, const SolverConfig& config,
                     const CoefficientSet* warm_start = nullptr) {
  validate(config);
  detail::check_mask(design, mask);
  const auto pr = detail::prepare(design, config.standardize);
  Eigen::MatrixXd theta_s = detail::scaled_start(pr, warm_start);
  return detail::fit_prepared(pr, design, mask, config, theta_s);
}

/// Log-spaced grid from lambda_max down to lambda_max * min_ratio.
inline std::vector<double> lambda_grid(double lambda_max_value, std::size_t n_lambdas, double min_ratio) {
  if (n_lambdas < 1) throw ConfigError("lambda grid needs at least one point");
  if (n_lambdas > 1 && !(min_ratio > 0.0 && min_ratio < 1.0))
    throw ConfigError("lambda_min_ratio must lie in (0, 1)");
  std::vector<double> grid(n_lambdas);
  grid[0] = lambda_max_value;
  for (std::size_t k = 1; k < n_lambdas; ++k)
    grid[k] = lambda_max_value * std::pow(min_ratio, static_cast<double>(k) / static_cast<double>(n_lambdas - 1));
  return grid;
}

/// Warm-started solves over an explicit lambda sequence (normally decreasing).
inline std::vector<PathPoint> fit_lambdas(const DesignMatrices& design, const ConstraintMask& mask,
                                          const SolverConfig& config, std::span<const double> lambdas) {
  validate(config);
  detail::check_mask(design, mask);
  const auto pr = detail::prepare(design, config.standardize);
  Eigen::MatrixXd theta_s = Eigen::MatrixXd::Zero(pr.p, 2 * pr.p);
  std::vector<PathPoint> path;
  path.reserve(lambdas.size());
  for (const double lam : lambdas) {
    SolverConfig c = config;
    c.lambda = lam;
    validate(c);
    auto res = detail::fit_prepared(pr, design, mask, c, theta_s);
    path.push_back({lam, std::move(res.coeffs), std::move(res.report)});
  }
  return path;
}

inline std::vector<PathPoint> fit_path(const DesignMatrices& design, const ConstraintMask& mask,
                                       const SolverConfig& config, std::size_t n_lambdas, double lambda_min_ratio) {
  if (n_lambdas < 2) throw ConfigError("fit_path needs n_lambdas >= 2");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) throw ConfigError("lambda_min_ratio must lie in (0, 1)");
  validate(config);
  const auto grid = lambda_grid(lambda_max(design, mask, config.alpha, config.standardize), n_lambdas,
                                lambda_min_ratio);
  return fit_lambdas(design, mask, config, grid);
}

}  // namespace stn
