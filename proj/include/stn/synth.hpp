#pragma once

// Synthetic data with known sparse structure: draws (Psi, Phi, b), simulates
//   (I - Psi) X_t = Phi X_{t-1} + b + w_t,   w_t ~ N(0, diag(noise_sd^2)),
// and scores how well an estimate recovers the true support.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stn/error.hpp"
#include "stn/model.hpp"
#include "stn/panel.hpp"

namespace stn {

/// Variable names of the bank case study, risk parameter first.
inline std::vector<std::string> case_study_names() {
  return {"PD", "RTP", "GDP", "UNEMP", "OR", "CCI", "CEI", "ICI", "BI", "HP", "CPI", "SM", "FX", "HD"};
}

/// Quarterly tags "YYYYQn" starting at the given quarter.
inline std::vector<std::string> quarter_labels(int start_year, int start_quarter, std::size_t count) {
  if (start_quarter < 1 || start_quarter > 4) throw ConfigError("quarter must be 1..4");
  std::vector<std::string> out;
  int y = start_year, q = start_quarter;
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(std::to_string(y) + "Q" + std::to_string(q));
    if (++q > 4) {
      q = 1;
      ++y;
    }
  }
  return out;
}

struct SynthSpec {
  std::size_t p = 6;
  std::size_t T = 100;
  double edge_density = 0.15;  // fraction of eligible unfrozen coordinates made nonzero
  double coef_low = 0.4;
  double coef_high = 0.8;
  std::vector<double> noise_sd;  // length p; empty means 0.05 everywhere
  double intercept_low = 0.0;
  double intercept_high = 0.0;
  double init_mean = 0.0;
  double init_sd = 1.0;
  std::uint64_t seed = 1;

  bool contemporaneous = true;  // false forces Psi = 0
  std::size_t risk_drivers_min = 2;
  std::size_t risk_drivers_max = 4;
  bool allow_pd_self_lag = false;
  bool allow_unit_root = false;  // skip the stationarity rejection step
  std::size_t max_retries = 1000;
  double max_condition = 1e8;

  std::vector<std::string> names;  // empty: PD, M1, M2, ...
  int start_year = 2000;
  int start_quarter = 1;
};

struct GroundTruth {
  CoefficientSet coeffs;
  double spectral_radius = 0.0;   // of (I - Psi)^-1 Phi
  double condition_number = 0.0;  // of I - Psi
  std::size_t attempts = 0;
};

struct SynthResult {
  TimeSeriesPanel panel;
  GroundTruth truth;
};

/// Spectral radius of the reduced-form transition (I - Psi)^-1 Phi.
inline double transition_spectral_radius(const CoefficientSet& c) {
  const auto p = c.psi.rows();
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p) - c.psi;
  const Eigen::MatrixXd a = m.fullPivLu().solve(c.phi);
  return Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues().cwiseAbs().maxCoeff();
}

inline double contemporaneous_condition(const CoefficientSet& c) {
  const auto p = c.psi.rows();
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p) - c.psi;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

/**
 * @brief Simulates T periods X_1..X_T of the structural recursion from x0.
 *
 * Draws one N(0, noise_sd_i^2) shock per variable and period, in period-major order.
 */
inline Eigen::MatrixXd simulate(const CoefficientSet& truth, std::size_t T, const std::vector<double>& noise_sd,
                                const Eigen::VectorXd& x0, std::mt19937_64& rng) {
  if (!truth.consistent()) throw DimensionError("inconsistent coefficient set");
  const auto p = truth.psi.rows();
  if (static_cast<Eigen::Index>(noise_sd.size()) != p || x0.size() != p)
    throw DimensionError("noise_sd and x0 must have length p");
  for (const double s : noise_sd)
    if (!(s >= 0.0)) throw ConfigError("noise_sd entries must be >= 0");
  const auto lu = (Eigen::MatrixXd::Identity(p, p) - truth.psi).fullPivLu();
  if (!lu.isInvertible()) throw DomainError("I - Psi is singular");
  const Eigen::MatrixXd a = lu.solve(truth.phi);
  const Eigen::VectorXd c = lu.solve(truth.intercept);
  const Eigen::MatrixXd shock_map = lu.inverse();

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(p, static_cast<Eigen::Index>(T));
  Eigen::VectorXd x = x0;
  Eigen::VectorXd w(p);
  for (std::size_t t = 0; t < T; ++t) {
    for (Eigen::Index i = 0; i < p; ++i) w(i) = noise_sd[static_cast<std::size_t>(i)] * normal(rng);
    x = a * x + c + shock_map * w;
    out.col(static_cast<Eigen::Index>(t)) = x;
  }
  return out;
}

namespace detail {

inline std::vector<std::string> synth_names(const SynthSpec& s) {
  if (!s.names.empty()) {
    if (s.names.size() != s.p) throw ConfigError("SynthSpec.names must have p entries");
    return s.names;
  }
  std::vector<std::string> out{"PD"};
  for (std::size_t j = 1; j < s.p; ++j) out.push_back("M" + std::to_string(j));
  return out;
}

}  // namespace detail

/// Draws a stationary sparse truth by rejection sampling and simulates a panel from it.
inline SynthResult generate(const SynthSpec& spec) {
  if (spec.p < 2) throw ConfigError("synthetic panels need p >= 2");
  if (spec.T < 3) throw ConfigError("synthetic panels need T >= 3");
  if (!(spec.edge_density >= 0.0 && spec.edge_density <= 1.0)) throw ConfigError("edge_density must lie in [0, 1]");
  if (!(spec.coef_low >= 0.0 && spec.coef_low <= spec.coef_high)) throw ConfigError("need 0 <= coef_low <= coef_high");
  if (spec.intercept_low > spec.intercept_high) throw ConfigError("need intercept_low <= intercept_high");
  if (!(spec.init_sd >= 0.0)) throw ConfigError("init_sd must be >= 0");
  if (spec.risk_drivers_min > spec.risk_drivers_max) throw ConfigError("need risk_drivers_min <= risk_drivers_max");
  std::vector<double> noise = spec.noise_sd.empty() ? std::vector<double>(spec.p, 0.05) : spec.noise_sd;
  if (noise.size() != spec.p) throw ConfigError("noise_sd must have p entries");
  const auto names = detail::synth_names(spec);

  const auto p = spec.p;
  const auto n = static_cast<Eigen::Index>(p);
  const auto mask = default_mask(p).with_pd_self_lag(spec.allow_pd_self_lag);

  // Coordinates eligible for the density draw: unfrozen entries outside the risk row.
  std::vector<std::pair<std::size_t, std::size_t>> pool;
  for (std::size_t i = 1; i < p; ++i)
    for (std::size_t j = 0; j < 2 * p; ++j)
      if (!mask.frozen(i, j) && (spec.contemporaneous || j >= p)) pool.emplace_back(i, j);
  const auto n_edges = static_cast<std::size_t>(std::lround(spec.edge_density * static_cast<double>(pool.size())));
  const auto drivers_lo = std::min(spec.risk_drivers_min, p - 1);
  const auto drivers_hi = std::min(spec.risk_drivers_max, p - 1);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> magnitude(spec.coef_low, spec.coef_high);
  std::bernoulli_distribution coin(0.5);
  auto draw = [&] { return (coin(rng) ? 1.0 : -1.0) * magnitude(rng); };

  for (std::size_t attempt = 1; attempt <= spec.max_retries; ++attempt) {
    CoefficientSet c = CoefficientSet::zeros(p);

    std::vector<std::size_t> macros(p - 1);
    std::iota(macros.begin(), macros.end(), std::size_t{1});
    std::shuffle(macros.begin(), macros.end(), rng);
    const auto n_drivers = std::uniform_int_distribution<std::size_t>(drivers_lo, drivers_hi)(rng);
    for (std::size_t k = 0; k < n_drivers; ++k) c.phi(0, static_cast<Eigen::Index>(macros[k])) = draw();
    if (spec.allow_pd_self_lag) c.phi(0, 0) = draw();

    auto chosen = pool;
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(n_edges);
    std::sort(chosen.begin(), chosen.end());
    for (const auto& [i, j] : chosen) {
      const auto r = static_cast<Eigen::Index>(i);
      if (j < p) c.psi(r, static_cast<Eigen::Index>(j)) = draw();
      else c.phi(r, static_cast<Eigen::Index>(j - p)) = draw();
    }
    std::uniform_real_distribution<double> icpt(spec.intercept_low, spec.intercept_high);
    for (Eigen::Index i = 0; i < n; ++i) c.intercept(i) = spec.intercept_low == spec.intercept_high ? spec.intercept_low : icpt(rng);

    const double cond = contemporaneous_condition(c);
    if (!std::isfinite(cond) || cond > spec.max_condition) continue;
    const double rho = transition_spectral_radius(c);
    if (!spec.allow_unit_root && !(rho < 1.0)) continue;

    std::normal_distribution<double> init(spec.init_mean, spec.init_sd);
    Eigen::VectorXd x0(n);
    for (Eigen::Index i = 0; i < n; ++i) x0(i) = spec.init_sd > 0.0 ? init(rng) : spec.init_mean;
    Eigen::MatrixXd values = simulate(c, spec.T, noise, x0, rng);
    if (!values.allFinite()) continue;

    std::vector<VariableMeta> vars;
    for (std::size_t i = 0; i < p; ++i) vars.push_back({names[i], i == 0 ? Role::RiskParameter : Role::Macro, Transform::None});
    TimeSeriesPanel panel(std::move(vars), std::move(values), quarter_labels(spec.start_year, spec.start_quarter, spec.T));
    return {std::move(panel), GroundTruth{std::move(c), rho, cond, attempt}};
  }
  throw DomainError("no stationary draw within " + std::to_string(spec.max_retries) +
                    " attempts; lower edge_density or coefficient magnitudes");
}

struct EdgeCounts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
};

struct RecoveryMetrics {
  EdgeCounts psi, phi, combined;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double sign_agreement = 0.0;  // share of true positives with the right sign
};

/**
 * @brief Support recovery over unfrozen coordinates.
 *
 * A truth entry is present when exactly nonzero, an estimate entry when
 * |value| > threshold. Precision (recall) is 1 when nothing was predicted
 * (nothing was true) and nothing was missed (nothing spurious was found).
 */
inline RecoveryMetrics edge_metrics(const CoefficientSet& truth, const CoefficientSet& estimate,
                                    const ConstraintMask& mask, double threshold = 0.0) {
  if (!truth.consistent() || !estimate.consistent() || truth.p() != estimate.p() || truth.p() != mask.p())
    throw DimensionError("truth, estimate and mask dimensions disagree");
  RecoveryMetrics m;
  std::size_t sign_ok = 0;
  const auto p = mask.p();
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < 2 * p; ++j) {
      if (mask.frozen(i, j)) continue;
      const double tv = truth.theta_at(i, j), ev = estimate.theta_at(i, j);
      const bool t = tv != 0.0, e = std::abs(ev) > threshold;
      auto& blk = j < p ? m.psi : m.phi;
      if (t && e) {
        ++blk.true_positive;
        if ((tv > 0) == (ev > 0)) ++sign_ok;
      } else if (e) {
        ++blk.false_positive;
      } else if (t) {
        ++blk.false_negative;
      }
    }
  }
  m.combined = {m.psi.true_positive + m.phi.true_positive, m.psi.false_positive + m.phi.false_positive,
                m.psi.false_negative + m.phi.false_negative};
  const auto& c = m.combined;
  const auto tp = static_cast<double>(c.true_positive);
  m.precision = c.true_positive + c.false_positive > 0 ? tp / static_cast<double>(c.true_positive + c.false_positive)
                                                       : (c.false_negative == 0 ? 1.0 : 0.0);
  m.recall = c.true_positive + c.false_negative > 0 ? tp / static_cast<double>(c.true_positive + c.false_negative)
                                                    : (c.false_positive == 0 ? 1.0 : 0.0);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.sign_agreement = c.true_positive > 0 ? static_cast<double>(sign_ok) / tp : 1.0;
  return m;
}

}  // namespace stn
