#pragma once

// JSON and CSV serialization of masks, coefficients, CV results, graphs,
// importance scales and recovery metrics. Requires nlohmann/json.

#include <cstddef>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>  // nlohmann/json, vendored

#include "stn/error.hpp"
#include "stn/graph.hpp"
#include "stn/importance.hpp"
#include "stn/model.hpp"
#include "stn/panel.hpp"
#include "stn/selection.hpp"
#include "stn/solver.hpp"
#include "stn/synth.hpp"

namespace stn::io {

using nlohmann::json;

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw ParseError(std::string(what) + ": expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
      throw ParseError(std::string(what) + ": expected " + std::to_string(cols) + " columns");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = r[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

// --- mask -------------------------------------------------------------------

inline json to_json(const ConstraintMask& mask) {
  json frozen = json::array();
  for (const auto& [r, c] : mask.frozen_entries()) frozen.push_back({r, c});
  return {{"p", mask.p()}, {"allow_pd_self_lag", mask.allow_pd_self_lag()}, {"frozen", frozen}};
}

/// Rebuilds a mask; listed entries beyond the structural pattern become user freezes.
inline ConstraintMask mask_from_json(const json& j) {
  try {
    auto mask = default_mask(j.at("p").get<std::size_t>()).with_pd_self_lag(j.at("allow_pd_self_lag").get<bool>());
    for (const auto& e : j.at("frozen")) {
      const auto r = e.at(0).get<std::size_t>(), c = e.at(1).get<std::size_t>();
      if (!mask.structural(r, c)) mask = mask.with_frozen(r, c);
    }
    return mask;
  } catch (const json::exception& e) {
    throw ParseError(std::string("mask JSON: ") + e.what());
  }
}

// --- coefficients -----------------------------------------------------------

struct CoefficientMeta {
  std::vector<std::string> variables;
  double lambda = 0.0;
  double alpha = 1.0;
  double objective = 0.0;
  double kkt_residual = 0.0;
};

inline json to_json(const CoefficientSet& c, const CoefficientMeta& meta) {
  json icpt = json::array();
  for (Eigen::Index i = 0; i < c.intercept.size(); ++i) icpt.push_back(c.intercept(i));
  return {{"variables", meta.variables}, {"psi", matrix_to_json(c.psi)},  {"phi", matrix_to_json(c.phi)},
          {"intercept", icpt},           {"lambda", meta.lambda},         {"alpha", meta.alpha},
          {"objective", meta.objective}, {"kkt_residual", meta.kkt_residual}};
}

inline std::pair<CoefficientSet, CoefficientMeta> coefficients_from_json(const json& j) {
  try {
    CoefficientMeta meta;
    meta.variables = j.at("variables").get<std::vector<std::string>>();
    const auto p = static_cast<Eigen::Index>(meta.variables.size());
    CoefficientSet c;
    c.psi = matrix_from_json(j.at("psi"), p, p, "psi");
    c.phi = matrix_from_json(j.at("phi"), p, p, "phi");
    const auto icpt = j.at("intercept").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(icpt.size()) != p) throw ParseError("intercept length does not match variables");
    c.intercept = Eigen::Map<const Eigen::VectorXd>(icpt.data(), p);
    meta.lambda = j.value("lambda", 0.0);
    meta.alpha = j.value("alpha", 1.0);
    meta.objective = j.value("objective", 0.0);
    meta.kkt_residual = j.value("kkt_residual", 0.0);
    return {std::move(c), std::move(meta)};
  } catch (const json::exception& e) {
    throw ParseError(std::string("coefficient JSON: ") + e.what());
  }
}

// --- cross-validation -------------------------------------------------------

inline json to_json(const CvResult& cv, const FoldPlan& plan) {
  json grid = json::array();
  for (std::size_t g = 0; g < cv.grid.size(); ++g)
    grid.push_back({{"alpha", cv.grid[g].alpha},
                    {"lambda", cv.grid[g].lambda},
                    {"mean", cv.mean_cv_error[g]},
                    {"sd", cv.sd_cv_error[g]}});
  return {{"scheme", to_string(plan.scheme)}, {"k", plan.k},          {"grid", grid},
          {"best", cv.best},                  {"best_1se", cv.best_1se}};
}

/// Plot-ready CSV: alpha,lambda,mean,sd.
inline std::string cv_csv(const CvResult& cv) {
  std::ostringstream os;
  os << "alpha,lambda,mean,sd\n";
  for (std::size_t g = 0; g < cv.grid.size(); ++g)
    os << detail::format_double(cv.grid[g].alpha) << ',' << detail::format_double(cv.grid[g].lambda) << ','
       << detail::format_double(cv.mean_cv_error[g]) << ',' << detail::format_double(cv.sd_cv_error[g]) << '\n';
  return os.str();
}

// --- graphs -----------------------------------------------------------------

inline json to_json(const StnGraph& g) {
  json nodes = json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& n = g.nodes()[i];
    nodes.push_back({{"id", i}, {"label", n.label}, {"variable", n.variable_index}, {"lag", n.lag}});
  }
  json edges = json::array();
  for (const auto& [s, t] : g.edges()) edges.push_back({s, t});
  return {{"kind", to_string(g.kind())}, {"nodes", nodes}, {"edges", edges}};
}

inline StnGraph graph_from_json(const json& j) {
  try {
    const auto kind_s = j.at("kind").get<std::string>();
    if (kind_s != "extended" && kind_s != "compact") throw ParseError("unknown graph kind '" + kind_s + "'");
    std::vector<StnNode> nodes;
    for (const auto& n : j.at("nodes"))
      nodes.push_back({n.at("variable").get<std::size_t>(), n.at("lag").get<int>(), n.at("label").get<std::string>()});
    std::set<Edge> edges;
    for (const auto& e : j.at("edges")) edges.insert({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>()});
    return StnGraph(kind_s == "extended" ? GraphKind::Extended : GraphKind::Compact, std::move(nodes), std::move(edges));
  } catch (const json::exception& e) {
    throw ParseError(std::string("graph JSON: ") + e.what());
  }
}

// --- importance -------------------------------------------------------------

inline std::string importance_csv(const ImportanceScale& s) {
  std::ostringstream os;
  os << "variable,lag,score\n";
  for (const auto& e : s.entries)
    os << detail::csv_field(e.name) << ',' << e.lag << ',' << detail::format_double(e.score) << '\n';
  return os.str();
}

inline json to_json(const ImportanceScale& s) {
  json entries = json::array();
  for (const auto& e : s.entries) entries.push_back({{"variable", e.name}, {"lag", e.lag}, {"score", e.score}});
  return {{"normalization", to_string(s.normalization)},
          {"requested", to_string(s.requested)},
          {"degenerate", s.degenerate},
          {"entries", entries}};
}

// --- recovery metrics -------------------------------------------------------

inline json to_json(const EdgeCounts& c) {
  return {{"tp", c.true_positive}, {"fp", c.false_positive}, {"fn", c.false_negative}};
}

inline json to_json(const RecoveryMetrics& m) {
  return {{"psi", to_json(m.psi)},       {"phi", to_json(m.phi)},   {"combined", to_json(m.combined)},
          {"precision", m.precision},    {"recall", m.recall},      {"f1", m.f1},
          {"sign_agreement", m.sign_agreement}};
}

// --- misc -------------------------------------------------------------------

/// 64-bit FNV-1a digest, used to fingerprint input files in run manifests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

}  // namespace stn::io
