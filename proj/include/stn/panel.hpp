#pragma once

// Time-series panels: CSV ingestion, the risk-parameter logit transform,
// row standardization and the lag-stacked design matrices used by the
// estimator.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stn/error.hpp"

namespace stn {

enum class Role { RiskParameter, Macro };
enum class Transform { None, Logit };

struct VariableMeta {
  std::string name;
  Role role = Role::Macro;
  Transform transform = Transform::None;

  friend bool operator==(const VariableMeta&, const VariableMeta&) = default;
};

/**
 * @brief p x T matrix of observations in level, one row per variable.
 *
 * Row 0 is always the risk parameter. The constructor enforces every panel
 * invariant, so a constructed panel is valid for the rest of its life.
 */
class TimeSeriesPanel {
 public:
  TimeSeriesPanel(std::vector<VariableMeta> variables, Eigen::MatrixXd values,
                  std::vector<std::string> period_labels)
      : variables_(std::move(variables)),
        values_(std::move(values)),
        labels_(std::move(period_labels)) {
    validate();
  }

  const std::vector<VariableMeta>& variables() const noexcept { return variables_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<std::string>& period_labels() const noexcept { return labels_; }

  std::size_t num_variables() const noexcept { return variables_.size(); }
  std::size_t num_periods() const noexcept { return labels_.size(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(variables_.size());
    for (const auto& v : variables_) out.push_back(v.name);
    return out;
  }

  const VariableMeta& risk_variable() const noexcept { return variables_.front(); }

  friend bool operator==(const TimeSeriesPanel& a, const TimeSeriesPanel& b) {
    return a.variables_ == b.variables_ && a.labels_ == b.labels_ &&
           a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  void validate() const {
    const auto p = variables_.size();
    const auto t = labels_.size();
    if (p < 2) throw ConfigError("panel needs the risk parameter and at least one macro variable (p >= 2)");
    if (t < 3) throw ConfigError("panel needs at least 3 periods, got " + std::to_string(t));
    if (static_cast<std::size_t>(values_.rows()) != p || static_cast<std::size_t>(values_.cols()) != t)
      throw DimensionError("panel values are " + std::to_string(values_.rows()) + "x" +
                           std::to_string(values_.cols()) + ", expected " + std::to_string(p) + "x" +
                           std::to_string(t));
    std::set<std::string> seen;
    for (std::size_t i = 0; i < p; ++i) {
      const auto& v = variables_[i];
      if (v.name.empty()) throw ConfigError("variable " + std::to_string(i) + " has an empty name");
      if (!seen.insert(v.name).second) throw ConfigError("duplicate variable name '" + v.name + "'");
      if ((i == 0) != (v.role == Role::RiskParameter))
        throw ConfigError("exactly one risk parameter is allowed and it must be variable 0");
      if (v.transform == Transform::Logit && v.role != Role::RiskParameter)
        throw ConfigError("logit transform is only allowed on the risk parameter ('" + v.name + "')");
    }
    if (!values_.allFinite()) throw DomainError("panel contains non-finite values");
  }

  std::vector<VariableMeta> variables_;
  Eigen::MatrixXd values_;
  std::vector<std::string> labels_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field");
  fields.emplace_back(trim(cur));
  return fields;
}

inline bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

// Shortest round-trip representation, independent of locale.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

}  // namespace detail

/**
 * @brief Reads a panel from CSV.
 *
 * Header row is mandatory; the first column holds opaque period labels and the
 * remaining columns are variables in level. The column named @p risk_variable
 * becomes row 0, the rest keep their file order.
 */
inline TimeSeriesPanel load_csv(std::istream& source, const std::string& risk_variable) {
  std::string line;
  std::size_t line_no = 0;
  auto next_record = [&]() -> bool {
    while (std::getline(source, line)) {
      ++line_no;
      if (!detail::trim(line).empty()) return true;
    }
    return false;
  };

  if (!next_record()) throw ParseError("CSV input is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2) throw ParseError("CSV header needs a period column and at least one variable");

  std::set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].empty()) throw ParseError("CSV header column " + std::to_string(c + 1) + " is empty");
    if (!seen.insert(header[c]).second) throw ParseError("duplicate column name '" + header[c] + "'");
  }
  const auto risk_it = std::find(header.begin() + 1, header.end(), risk_variable);
  if (risk_it == header.end()) throw ParseError("risk variable '" + risk_variable + "' not found in CSV header");
  if (header.size() - 1 < 2)
    throw ConfigError("CSV holds only the risk parameter; at least one macro variable is required");

  const std::size_t ncol = header.size() - 1;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  while (next_record()) {
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    std::vector<double> row(ncol);
    for (std::size_t c = 0; c < ncol; ++c) {
      if (!detail::parse_double(fields[c + 1], row[c]))
        throw ParseError("line " + std::to_string(line_no) + ", column '" + header[c + 1] +
                         "': not a finite number: '" + fields[c + 1] + "'");
    }
    labels.push_back(fields[0]);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 3)
    throw ParseError("CSV needs at least 3 data rows, got " + std::to_string(rows.size()));

  const auto risk_col = static_cast<std::size_t>(risk_it - header.begin()) - 1;
  std::vector<std::size_t> order{risk_col};
  for (std::size_t c = 0; c < ncol; ++c)
    if (c != risk_col) order.push_back(c);

  std::vector<VariableMeta> vars;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(ncol), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < ncol; ++i) {
    vars.push_back({header[order[i] + 1], i == 0 ? Role::RiskParameter : Role::Macro, Transform::None});
    for (std::size_t t = 0; t < rows.size(); ++t)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = rows[t][order[i]];
  }
  return TimeSeriesPanel(std::move(vars), std::move(values), std::move(labels));
}

/// Writes a panel in the format read by load_csv (risk parameter first).
inline void write_csv(std::ostream& out, const TimeSeriesPanel& panel, const std::string& label_header = "period") {
  out << detail::csv_field(label_header);
  for (const auto& v : panel.variables()) out << ',' << detail::csv_field(v.name);
  out << '\n';
  const auto& x = panel.values();
  for (std::size_t t = 0; t < panel.num_periods(); ++t) {
    out << detail::csv_field(panel.period_labels()[t]);
    for (Eigen::Index i = 0; i < x.rows(); ++i) out << ',' << detail::format_double(x(i, static_cast<Eigen::Index>(t)));
    out << '\n';
  }
}

inline double logit(double v) { return std::log(v / (1.0 - v)); }
inline double inverse_logit(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Replaces the risk-parameter row by ln(v / (1 - v)).
inline TimeSeriesPanel apply_logit(const TimeSeriesPanel& panel) {
  if (panel.risk_variable().transform == Transform::Logit)
    throw DomainError("risk parameter '" + panel.risk_variable().name + "' is already logit-transformed");
  Eigen::MatrixXd values = panel.values();
  for (Eigen::Index t = 0; t < values.cols(); ++t) {
    const double v = values(0, t);
    if (!(v > 0.0 && v < 1.0))
      throw DomainError("risk parameter value " + detail::format_double(v) + " at period '" +
                        panel.period_labels()[static_cast<std::size_t>(t)] + "' is outside (0, 1)");
    values(0, t) = logit(v);
  }
  auto vars = panel.variables();
  vars[0].transform = Transform::Logit;
  return TimeSeriesPanel(std::move(vars), std::move(values), panel.period_labels());
}

/// Undoes apply_logit for reporting.
inline TimeSeriesPanel invert_logit(const TimeSeriesPanel& panel) {
  if (panel.risk_variable().transform != Transform::Logit)
    throw DomainError("risk parameter is not logit-transformed");
  Eigen::MatrixXd values = panel.values();
  for (Eigen::Index t = 0; t < values.cols(); ++t) values(0, t) = inverse_logit(values(0, t));
  auto vars = panel.variables();
  vars[0].transform = Transform::None;
  return TimeSeriesPanel(std::move(vars), std::move(values), panel.period_labels());
}

/// True when every risk-parameter value lies strictly inside (0, 1).
inline bool risk_in_unit_interval(const TimeSeriesPanel& panel) {
  const auto row = panel.values().row(0);
  return (row.array() > 0.0).all() && (row.array() < 1.0).all();
}

struct Standardized {
  TimeSeriesPanel panel;
  Eigen::VectorXd means;
  Eigen::VectorXd sds;  // 0 marks a constant row
};

namespace detail {

// Sample mean and sd (denominator n - 1) of a vector; sd is forced to 0 when
// the spread is at rounding level relative to the magnitude of the data.
inline std::pair<double, double> mean_sd(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = v.mean();
  if (v.size() < 2) return {mean, 0.0};
  const double ss = (v.array() - mean).square().sum();
  double sd = std::sqrt(ss / (n - 1.0));
  const double scale = v.cwiseAbs().maxCoeff();
  if (sd <= 64.0 * std::numeric_limits<double>::epsilon() * scale) sd = 0.0;
  return {mean, sd};
}

}  // namespace detail

/// Centers each row and scales it to unit sample sd; constant rows become 0.
inline Standardized standardize(const TimeSeriesPanel& panel) {
  const auto& x = panel.values();
  Eigen::MatrixXd out(x.rows(), x.cols());
  Eigen::VectorXd means(x.rows()), sds(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd row = x.row(i).transpose();
    const auto [m, s] = detail::mean_sd(row);
    means(i) = m;
    sds(i) = s;
    if (s > 0.0) out.row(i) = ((row.array() - m) / s).matrix().transpose();
    else out.row(i).setZero();
  }
  return {TimeSeriesPanel(panel.variables(), std::move(out), panel.period_labels()), std::move(means),
          std::move(sds)};
}

/**
 * @brief Response and predictor matrices of the stacked regression X = b1' + Theta Z.
 *
 * X is p x Te (periods 2..T), Z is 2p x Te with the contemporaneous slice on
 * top of the lag-1 slice. Predictor statistics are per row of Z.
 */
struct DesignMatrices {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  Eigen::VectorXd predictor_means;
  Eigen::VectorXd predictor_sds;
  Eigen::VectorXd response_means;

  std::size_t num_variables() const noexcept { return static_cast<std::size_t>(X.rows()); }
  std::size_t effective_samples() const noexcept { return static_cast<std::size_t>(X.cols()); }
};

/// Assembles a design from explicit X and Z, computing its statistics.
inline DesignMatrices make_design(Eigen::MatrixXd X, Eigen::MatrixXd Z) {
  if (Z.rows() != 2 * X.rows() || Z.cols() != X.cols())
    throw DimensionError("Z must be 2p x Te when X is p x Te");
  if (X.cols() < 1) throw DimensionError("design needs at least one column");
  DesignMatrices d;
  d.predictor_means.resize(Z.rows());
  d.predictor_sds.resize(Z.rows());
  for (Eigen::Index j = 0; j < Z.rows(); ++j) {
    const Eigen::VectorXd row = Z.row(j).transpose();
    const auto [m, s] = detail::mean_sd(row);
    d.predictor_means(j) = m;
    d.predictor_sds(j) = s;
  }
  d.response_means = X.rowwise().mean();
  d.X = std::move(X);
  d.Z = std::move(Z);
  return d;
}

/// Builds the lag-stacked design, conditioning on the first observation.
inline DesignMatrices build_design(const TimeSeriesPanel& panel) {
  const auto& v = panel.values();
  const Eigen::Index p = v.rows();
  const Eigen::Index te = v.cols() - 1;
  if (te < 2) throw ConfigError("build_design needs T >= 3");
  Eigen::MatrixXd X = v.rightCols(te);
  Eigen::MatrixXd Z(2 * p, te);
  Z.topRows(p) = X;
  Z.bottomRows(p) = v.leftCols(te);
  return make_design(std::move(X), std::move(Z));
}

/// Restricts a design to a subset of its columns (used by cross-validation).
inline DesignMatrices subset_columns(const DesignMatrices& design, std::span<const std::size_t> columns) {
  if (columns.empty()) throw ConfigError("column subset is empty");
  Eigen::MatrixXd X(design.X.rows(), static_cast<Eigen::Index>(columns.size()));
  Eigen::MatrixXd Z(design.Z.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] >= design.effective_samples()) throw DimensionError("column index out of range");
    const auto c = static_cast<Eigen::Index>(columns[k]);
    X.col(static_cast<Eigen::Index>(k)) = design.X.col(c);
    Z.col(static_cast<Eigen::Index>(k)) = design.Z.col(c);
  }
  return make_design(std::move(X), std::move(Z));
}

}  // namespace stn
