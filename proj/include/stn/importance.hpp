#pragma once

// Importance of macro shocks for the risk parameter: the penalized
// coefficients of the risk-parameter equation fitted on standardized series.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stn/error.hpp"
#include "stn/model.hpp"
#include "stn/panel.hpp"
#include "stn/solver.hpp"

namespace stn {

enum class Normalization { Raw, UnitMax, UnitSum };

inline const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::Raw: return "raw";
    case Normalization::UnitMax: return "unitmax";
    case Normalization::UnitSum: return "unitsum";
  }
  return "raw";
}

struct ImportanceEntry {
  std::string name;
  int lag = 0;
  double score = 0.0;

  std::string label() const { return lag == 1 ? name + "-L1" : name; }
};

struct ImportanceScale {
  std::vector<ImportanceEntry> entries;  // ordered by |score| desc, then label asc
  Normalization normalization = Normalization::Raw;
  Normalization requested = Normalization::Raw;
  bool degenerate = false;  // every score is zero; requested normalization not applied
};

/**
 * @brief Scores from the risk-parameter row of a fitted coefficient set.
 *
 * One entry per candidate driver: every macro at lag 0 and lag 1, plus the
 * risk parameter's own lag. Frozen entries come out as exact zeros.
 */
inline ImportanceScale importance_from_coefficients(const CoefficientSet& coeffs, const std::vector<std::string>& names,
                                                    Normalization normalization) {
  if (!coeffs.consistent() || names.size() != coeffs.p())
    throw DimensionError("names do not match the coefficient set");
  ImportanceScale out;
  out.requested = normalization;
  const auto p = coeffs.p();
  for (std::size_t j = 0; j < p; ++j) {
    if (j != 0) out.entries.push_back({names[j], 0, coeffs.psi(0, static_cast<Eigen::Index>(j))});
    out.entries.push_back({names[j], 1, coeffs.phi(0, static_cast<Eigen::Index>(j))});
  }
  double max_abs = 0.0, sum_abs = 0.0;
  for (const auto& e : out.entries) {
    max_abs = std::max(max_abs, std::abs(e.score));
    sum_abs += std::abs(e.score);
  }
  if (sum_abs == 0.0) {
    out.degenerate = true;
    out.normalization = Normalization::Raw;
  } else {
    out.normalization = normalization;
    const double div = normalization == Normalization::UnitMax ? max_abs
                       : normalization == Normalization::UnitSum ? sum_abs
                                                                 : 1.0;
    for (auto& e : out.entries)
      if (e.score != 0.0) e.score /= div;
  }
  std::stable_sort(out.entries.begin(), out.entries.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
    const double fa = std::abs(a.score), fb = std::abs(b.score);
    if (fa != fb) return fa > fb;
    if (a.name != b.name) return a.name < b.name;
    return a.lag < b.lag;
  });
  return out;
}

/// Standardizes every series, fits at config.lambda and scores the risk-parameter equation.
inline ImportanceScale importance_scale(const TimeSeriesPanel& panel, const ConstraintMask& mask,
                                        const SolverConfig& config, Normalization normalization) {
  const auto std_panel = standardize(panel);
  const auto design = build_design(std_panel.panel);
  const auto res = fit(design, mask, config);
  return importance_from_coefficients(res.coeffs, panel.names(), normalization);
}

}  // namespace stn
