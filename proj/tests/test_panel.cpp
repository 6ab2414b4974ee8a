#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stn/panel.hpp"
#include "stn/synth.hpp"

namespace {

stn::TimeSeriesPanel panel_of(Eigen::MatrixXd v, std::vector<std::string> names = {}) {
  if (names.empty()) {
    names.push_back("PD");
    for (Eigen::Index i = 1; i < v.rows(); ++i) names.push_back("M" + std::to_string(i));
  }
  std::vector<stn::VariableMeta> vars;
  for (std::size_t i = 0; i < names.size(); ++i)
    vars.push_back({names[i], i == 0 ? stn::Role::RiskParameter : stn::Role::Macro, stn::Transform::None});
  std::vector<std::string> labels;
  for (Eigen::Index t = 0; t < v.cols(); ++t) labels.push_back("t" + std::to_string(t));
  return stn::TimeSeriesPanel(std::move(vars), std::move(v), std::move(labels));
}

stn::TimeSeriesPanel load(const std::string& text, const std::string& risk = "PD") {
  std::istringstream is(text);
  return stn::load_csv(is, risk);
}

}  // namespace

TEST(Panel, RejectsSingleVariable) {
  EXPECT_THROW(panel_of(Eigen::MatrixXd::Ones(1, 5)), stn::ConfigError);
}

TEST(Panel, RejectsTooFewPeriods) {
  EXPECT_THROW(panel_of(Eigen::MatrixXd::Ones(2, 2)), stn::ConfigError);
}

TEST(Panel, RejectsDuplicateAndEmptyNames) {
  EXPECT_THROW(panel_of(Eigen::MatrixXd::Ones(2, 3), {"PD", "PD"}), stn::ConfigError);
  EXPECT_THROW(panel_of(Eigen::MatrixXd::Ones(2, 3), {"PD", ""}), stn::ConfigError);
}

TEST(Panel, RejectsLogitOnMacro) {
  std::vector<stn::VariableMeta> vars{{"PD", stn::Role::RiskParameter, stn::Transform::None},
                                      {"GDP", stn::Role::Macro, stn::Transform::Logit}};
  EXPECT_THROW(stn::TimeSeriesPanel(vars, Eigen::MatrixXd::Ones(2, 3), {"a", "b", "c"}), stn::ConfigError);
}

TEST(Panel, RejectsNonFinite) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Ones(2, 3);
  v(1, 1) = std::nan("");
  EXPECT_THROW(panel_of(v), stn::DomainError);
}

TEST(Panel, RiskMustBeFirst) {
  std::vector<stn::VariableMeta> vars{{"GDP", stn::Role::Macro, stn::Transform::None},
                                      {"PD", stn::Role::RiskParameter, stn::Transform::None}};
  EXPECT_THROW(stn::TimeSeriesPanel(vars, Eigen::MatrixXd::Ones(2, 3), {"a", "b", "c"}), stn::ConfigError);
}

TEST(LoadCsv, CaseStudySchemaMovesRiskFirst) {
  const auto names = stn::case_study_names();
  std::ostringstream os;
  os << "period";
  // PD deliberately placed in the middle of the file.
  std::vector<std::string> order(names.begin() + 1, names.end());
  order.insert(order.begin() + 5, "PD");
  for (const auto& n : order) os << ',' << n;
  os << '\n';
  const auto labels = stn::quarter_labels(2009, 2, 24);
  for (std::size_t t = 0; t < 24; ++t) {
    os << labels[t];
    for (std::size_t j = 0; j < order.size(); ++j) os << ',' << (order[j] == "PD" ? 0.01 * (1 + t % 5) : double(j + t));
    os << '\n';
  }
  const auto panel = load(os.str());
  EXPECT_EQ(panel.num_variables(), 14u);
  EXPECT_EQ(panel.num_periods(), 24u);
  EXPECT_EQ(panel.risk_variable().name, "PD");
  EXPECT_EQ(panel.risk_variable().role, stn::Role::RiskParameter);
  EXPECT_EQ(panel.period_labels().front(), "2009Q2");
  EXPECT_EQ(panel.period_labels().back(), "2015Q1");
  // Other columns keep file order.
  const auto all = panel.names();
  std::vector<std::string> rest(all.begin() + 1, all.end());
  std::vector<std::string> expected;
  for (const auto& n : order)
    if (n != "PD") expected.push_back(n);
  EXPECT_EQ(rest, expected);
  EXPECT_DOUBLE_EQ(panel.values()(1, 0), 0.0);  // RTP was column 0 of the variables
}

TEST(LoadCsv, RiskOnlyFileRejected) {
  EXPECT_THROW(load("date,PD\nq1,0.1\nq2,0.2\nq3,0.3\n"), stn::ConfigError);
}

TEST(LoadCsv, NaCellNamesLineAndColumn) {
  try {
    load("date,PD,GDP\nq1,0.1,1\nq2,NA,2\nq3,0.3,3\n");
    FAIL() << "expected a parse error";
  } catch (const stn::ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("PD"), std::string::npos) << msg;
    EXPECT_NE(msg.find('3'), std::string::npos) << msg;  // line 3 of the file
  }
}

TEST(LoadCsv, Errors) {
  EXPECT_THROW(load("date,GDP,UNEMP\nq1,1,2\nq2,1,2\nq3,1,2\n"), stn::ParseError);  // missing risk column
  EXPECT_THROW(load("date,PD,GDP\nq1,0.1,1\nq2,0.2\nq3,0.3,3\n"), stn::ParseError);  // ragged
  EXPECT_THROW(load("date,PD,PD\nq1,0.1,1\nq2,0.2,2\nq3,0.3,3\n"), stn::ParseError);  // duplicate
  EXPECT_THROW(load("date,PD,GDP\nq1,0.1,1\nq2,0.2,2\n"), stn::ParseError);  // two rows
  EXPECT_THROW(load("date,PD,GDP\nq1,0.1,1\nq2,0.2,x\nq3,0.3,3\n"), stn::ParseError);
  EXPECT_THROW(load("date,PD,GDP\nq1,0.1,1\nq2,0.2,inf\nq3,0.3,3\n"), stn::ParseError);
}

TEST(LoadCsv, WriteRoundTripIsExact) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1e3);
  Eigen::MatrixXd v(3, 7);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = n(rng);
  const auto panel = panel_of(v, {"PD", "GDP, real", "FX"});
  std::ostringstream os;
  stn::write_csv(os, panel);
  EXPECT_EQ(load(os.str()), panel);
}

TEST(LoadCsv, ToleratesBomCrlfAndWhitespace) {
  const auto panel = load("\xEF\xBB\xBF" "date , GDP , PD\r\nq1, 1 ,0.5\r\nq2,2,0.25\r\nq3,3,0.125\r\n");
  EXPECT_EQ(panel.names(), (std::vector<std::string>{"PD", "GDP"}));
  EXPECT_DOUBLE_EQ(panel.values()(0, 2), 0.125);
  EXPECT_DOUBLE_EQ(panel.values()(1, 0), 1.0);
}

TEST(Logit, Values) {
  Eigen::MatrixXd v(2, 3);
  v << 0.5, 0.1, 0.9, 1, 2, 3;
  const auto out = stn::apply_logit(panel_of(v));
  EXPECT_EQ(out.values()(0, 0), 0.0);
  EXPECT_NEAR(out.values()(0, 1), oracle::kLogitOneTenth, 1e-15);
  EXPECT_NEAR(out.values()(0, 2), -oracle::kLogitOneTenth, 1e-15);
  EXPECT_EQ(out.values().row(1), v.row(1));
  EXPECT_EQ(out.risk_variable().transform, stn::Transform::Logit);
}

TEST(Logit, BoundaryIsDomainErrorNamingPeriod) {
  Eigen::MatrixXd v(2, 3);
  v << 0.2, 1.0, 0.3, 1, 2, 3;
  try {
    stn::apply_logit(panel_of(v));
    FAIL() << "expected a domain error";
  } catch (const stn::DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("t1"), std::string::npos) << e.what();
  }
  v(0, 1) = 0.0;
  EXPECT_THROW(stn::apply_logit(panel_of(v)), stn::DomainError);
}

TEST(Logit, RoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-6, 1 - 1e-6);
  Eigen::MatrixXd v = Eigen::MatrixXd::Ones(2, 50);
  for (Eigen::Index t = 0; t < 50; ++t) v(0, t) = u(rng);
  const auto original = panel_of(v);
  const auto back = stn::invert_logit(stn::apply_logit(original));
  EXPECT_LE((back.values() - original.values()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(back.risk_variable().transform, stn::Transform::None);
}

TEST(Standardize, Arithmetic) {
  Eigen::MatrixXd v(2, 3);
  v << 1, 2, 3, 5, 5, 5;
  const auto s = stn::standardize(panel_of(v));
  EXPECT_NEAR(s.panel.values()(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(s.panel.values()(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(s.panel.values()(0, 2), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.means(0), 2.0);
  EXPECT_DOUBLE_EQ(s.sds(0), 1.0);
  EXPECT_EQ(s.panel.values().row(1), Eigen::RowVectorXd::Zero(3));
  EXPECT_EQ(s.sds(1), 0.0);
  EXPECT_DOUBLE_EQ(s.means(1), 5.0);
}

TEST(Standardize, Idempotent) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(3.0, 7.0);
  Eigen::MatrixXd v(4, 20);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = n(rng);
  v.row(2).setConstant(0.3);
  const auto once = stn::standardize(panel_of(v)).panel;
  const auto twice = stn::standardize(once).panel;
  EXPECT_LE((once.values() - twice.values()).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (i == 2) continue;
    EXPECT_NEAR(once.values().row(i).mean(), 0.0, 1e-14);
    const double var = (once.values().row(i).array() - once.values().row(i).mean()).square().sum() / 19.0;
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
}

TEST(BuildDesign, SmallExample) {
  Eigen::MatrixXd v(2, 3);
  v << 1, 2, 3, 4, 5, 6;
  const auto d = stn::build_design(panel_of(v));
  EXPECT_EQ(d.effective_samples(), 2u);
  Eigen::MatrixXd X(2, 2), Z(4, 2);
  X << 2, 3, 5, 6;
  Z << 2, 3, 5, 6, 1, 2, 4, 5;
  EXPECT_EQ(d.X, X);
  EXPECT_EQ(d.Z, Z);
  EXPECT_EQ(d.predictor_sds.size(), 4);
  EXPECT_DOUBLE_EQ(d.response_means(0), 2.5);
}

TEST(BuildDesign, CaseStudyDimensions) {
  stn::SynthSpec spec;
  spec.p = 14;
  spec.T = 24;
  const auto d = stn::build_design(stn::generate(spec).panel);
  EXPECT_EQ(d.X.rows(), 14);
  EXPECT_EQ(d.X.cols(), 23);
  EXPECT_EQ(d.Z.rows(), 28);
  EXPECT_EQ(d.Z.cols(), 23);
}

TEST(BuildDesign, StructuralIdentitiesAndPurity) {
  stn::SynthSpec spec;
  spec.p = 5;
  spec.T = 40;
  spec.seed = 9;
  const auto panel = stn::generate(spec).panel;
  const auto d = stn::build_design(panel);
  const auto d2 = stn::build_design(panel);
  EXPECT_EQ(d.X, d2.X);
  EXPECT_EQ(d.Z, d2.Z);
  EXPECT_EQ(d.predictor_sds, d2.predictor_sds);
  EXPECT_EQ(d.Z.topRows(5), d.X);
  for (Eigen::Index k = 0; k < d.Z.cols(); ++k) {
    EXPECT_EQ(d.Z.col(k).tail(5), panel.values().col(k));
    if (k >= 1) EXPECT_EQ(d.Z.col(k).tail(5), d.Z.col(k - 1).head(5));
  }
  EXPECT_TRUE((d.predictor_sds.array() >= 0.0).all());
}

TEST(BuildDesign, ConstantPredictorHasZeroSd) {
  Eigen::MatrixXd v(2, 5);
  v << 1, 2, 4, 3, 5, 0.7, 0.7, 0.7, 0.7, 0.7;
  const auto d = stn::build_design(panel_of(v));
  EXPECT_EQ(d.predictor_sds(1), 0.0);
  EXPECT_EQ(d.predictor_sds(3), 0.0);
  EXPECT_GT(d.predictor_sds(0), 0.0);
}
