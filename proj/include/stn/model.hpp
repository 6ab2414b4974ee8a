#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stn/error.hpp"

namespace stn {

/// Which half of Theta = (Psi, Phi) an entry belongs to.
enum class Block { Psi, Phi };

inline const char* to_string(Block b) { return b == Block::Psi ? "psi" : "phi"; }

/**
 * @brief Frozen-zero pattern over Theta = (Psi, Phi), a p x 2p boolean matrix.
 *
 * Columns 0..p-1 address Psi, columns p..2p-1 address Phi. Row i is the
 * equation of variable i. The structural pattern is:
 *   - psi(i, i) = 0 for every i;
 *   - psi(0, j) = 0 for every j (the risk parameter has no contemporaneous drivers);
 *   - phi(i, 0) = 0 for every i (lagged risk parameter drives nothing),
 *     except phi(0, 0) when the risk self-lag is allowed.
 * Extra entries may be frozen on top of that; structural ones can't be released.
 */
class ConstraintMask {
 public:
  explicit ConstraintMask(std::size_t p) : p_(p) {
    if (p < 2) throw ConfigError("constraint mask needs p >= 2, got " + std::to_string(p));
    user_.assign(p * 2 * p, false);
  }

  std::size_t p() const noexcept { return p_; }
  bool allow_pd_self_lag() const noexcept { return allow_pd_self_lag_; }

  /// Entry fixed at zero by the structural conditions alone.
  bool structural(std::size_t row, std::size_t col) const {
    check(row, col);
    if (col < p_) return row == col || row == 0;
    return col == p_ && !(row == 0 && allow_pd_self_lag_);
  }

  bool user_frozen(std::size_t row, std::size_t col) const {
    check(row, col);
    return user_[row * 2 * p_ + col];
  }

  bool frozen(std::size_t row, std::size_t col) const { return structural(row, col) || user_frozen(row, col); }
  bool frozen(Block b, std::size_t row, std::size_t col) const {
    return frozen(row, b == Block::Psi ? col : col + p_);
  }

  std::size_t frozen_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j = 0; j < 2 * p_; ++j) n += frozen(i, j) ? 1 : 0;
    return n;
  }

  /// (row, col) pairs of all frozen entries in row-major order.
  std::vector<std::pair<std::size_t, std::size_t>> frozen_entries() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t j = 0; j < 2 * p_; ++j)
        if (frozen(i, j)) out.emplace_back(i, j);
    return out;
  }

  /// Returns a copy with one more entry frozen.
  ConstraintMask with_frozen(std::size_t row, std::size_t col) const {
    check(row, col);
    ConstraintMask m = *this;
    m.user_[row * 2 * p_ + col] = true;
    return m;
  }

  ConstraintMask with_pd_self_lag(bool allow) const {
    ConstraintMask m = *this;
    m.allow_pd_self_lag_ = allow;
    return m;
  }

  friend bool operator==(const ConstraintMask&, const ConstraintMask&) = default;

 private:
  void check(std::size_t row, std::size_t col) const {
    if (row >= p_ || col >= 2 * p_)
      throw DimensionError("mask entry (" + std::to_string(row) + ", " + std::to_string(col) +
                           ") outside p x 2p with p = " + std::to_string(p_));
  }

  std::size_t p_;
  bool allow_pd_self_lag_ = false;
  std::vector<bool> user_;
};

inline ConstraintMask default_mask(std::size_t p) { return ConstraintMask(p); }

inline ConstraintMask set_pd_self_lag(const ConstraintMask& mask, bool allow) {
  return mask.with_pd_self_lag(allow);
}

/// Additionally freezes psi(i, 0) for every i, so the risk parameter drives nothing contemporaneously either.
inline ConstraintMask freeze_risk_outflow(const ConstraintMask& mask) {
  ConstraintMask m = mask;
  for (std::size_t i = 1; i < mask.p(); ++i) m = m.with_frozen(i, 0);
  return m;
}

/// Estimated (Psi, Phi, b). Entry (i, j) of psi/phi is the weight of variable j in equation i.
struct CoefficientSet {
  Eigen::MatrixXd psi;
  Eigen::MatrixXd phi;
  Eigen::VectorXd intercept;

  static CoefficientSet zeros(std::size_t p) {
    const auto n = static_cast<Eigen::Index>(p);
    return {Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  }

  std::size_t p() const noexcept { return static_cast<std::size_t>(psi.rows()); }

  /// Theta = [Psi Phi], p x 2p.
  Eigen::MatrixXd theta() const {
    Eigen::MatrixXd t(psi.rows(), 2 * psi.cols());
    t << psi, phi;
    return t;
  }

  double theta_at(std::size_t row, std::size_t col) const {
    const auto p = this->p();
    const auto r = static_cast<Eigen::Index>(row);
    return col < p ? psi(r, static_cast<Eigen::Index>(col)) : phi(r, static_cast<Eigen::Index>(col - p));
  }

  std::size_t nonzero_count() const {
    return static_cast<std::size_t>((psi.array() != 0.0).count() + (phi.array() != 0.0).count());
  }

  bool consistent() const {
    const auto p = psi.rows();
    return psi.cols() == p && phi.rows() == p && phi.cols() == p && intercept.size() == p;
  }

  friend bool operator==(const CoefficientSet& a, const CoefficientSet& b) {
    return a.psi.rows() == b.psi.rows() && a.psi == b.psi && a.phi == b.phi && a.intercept == b.intercept;
  }
};

struct Violation {
  Block block;
  std::size_t row;
  std::size_t col;  // within the block
  double value;
};

/// Lists every frozen entry whose value is not exactly 0.0.
inline std::vector<Violation> check_coefficients(const CoefficientSet& coeffs, const ConstraintMask& mask) {
  if (!coeffs.consistent() || coeffs.p() != mask.p())
    throw DimensionError("coefficient set and mask dimensions disagree");
  std::vector<Violation> out;
  const auto p = mask.p();
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
      if (mask.frozen(Block::Psi, i, j) && coeffs.psi(r, c) != 0.0) out.push_back({Block::Psi, i, j, coeffs.psi(r, c)});
    }
    for (std::size_t j = 0; j < p; ++j) {
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(j);
      if (mask.frozen(Block::Phi, i, j) && coeffs.phi(r, c) != 0.0) out.push_back({Block::Phi, i, j, coeffs.phi(r, c)});
    }
  }
  return out;
}

}  // namespace stn
