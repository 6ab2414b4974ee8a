#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stn/io.hpp"

using nlohmann::json;

TEST(Io, MaskRoundTrip) {
  const auto m = stn::default_mask(5).with_pd_self_lag(true).with_frozen(3, 7);
  const auto j = stn::io::to_json(m);
  EXPECT_EQ(j.at("p"), 5);
  EXPECT_EQ(j.at("allow_pd_self_lag"), true);
  EXPECT_EQ(j.at("frozen").size(), m.frozen_count());
  EXPECT_EQ(stn::io::mask_from_json(json::parse(j.dump())), m);
  EXPECT_THROW(stn::io::mask_from_json(json{{"p", 3}}), stn::ParseError);
}

TEST(Io, CoefficientRoundTripIsExact) {
  std::mt19937_64 rng(1);
  auto c = oracle::random_sparse(stn::default_mask(4), 0.5, rng);
  c.intercept << 0.1, -1e-17, 3.0, 1.0 / 3.0;
  const stn::io::CoefficientMeta meta{{"PD", "A", "B", "C"}, 0.25, 0.5, 1.5, 1e-9};
  const auto j = stn::io::to_json(c, meta);
  for (const char* key : {"variables", "psi", "phi", "intercept", "lambda", "alpha", "objective", "kkt_residual"})
    EXPECT_TRUE(j.contains(key)) << key;
  const auto [back, bmeta] = stn::io::coefficients_from_json(json::parse(j.dump()));
  EXPECT_EQ(back, c);
  EXPECT_EQ(bmeta.variables, meta.variables);
  EXPECT_EQ(bmeta.lambda, 0.25);
  EXPECT_THROW(stn::io::coefficients_from_json(json{{"variables", {"A", "B"}}}), stn::ParseError);
}

TEST(Io, GraphRoundTrip) {
  auto c = stn::CoefficientSet::zeros(3);
  c.psi(2, 1) = 1.0;
  c.phi(1, 1) = 1.0;
  const auto g = stn::extended_graph(c, {"PD", "A", "B"});
  EXPECT_EQ(stn::io::graph_from_json(json::parse(stn::io::to_json(g).dump())), g);
  const auto cg = stn::compact_graph(g);
  EXPECT_EQ(stn::io::graph_from_json(stn::io::to_json(cg)), cg);
  EXPECT_THROW(stn::io::graph_from_json(json{{"kind", "other"}}), stn::ParseError);
}

TEST(Io, CvCsvAndJson) {
  stn::CvResult cv;
  cv.grid = {{0.5, 2.0}, {0.5, 1.0}};
  cv.mean_cv_error = {1.5, 0.25};
  cv.sd_cv_error = {0.1, 0.2};
  cv.best = 1;
  cv.best_1se = 1;
  EXPECT_EQ(stn::io::cv_csv(cv), "alpha,lambda,mean,sd\n0.5,2,1.5,0.1\n0.5,1,0.25,0.2\n");
  const auto plan = stn::make_folds(10, 5, stn::FoldScheme::RollingOrigin);
  const auto j = stn::io::to_json(cv, plan);
  EXPECT_EQ(j.at("scheme"), "rolling");
  EXPECT_EQ(j.at("grid").size(), 2u);
}

TEST(Io, ImportanceCsv) {
  auto c = stn::CoefficientSet::zeros(3);
  c.phi(0, 2) = 0.5;
  const auto s = stn::importance_from_coefficients(c, {"PD", "A", "B,C"}, stn::Normalization::UnitMax);
  const auto csv = stn::io::importance_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n', csv.find('\n') + 1) + 1), "variable,lag,score\n\"B,C\",1,1\n");
  EXPECT_EQ(stn::io::to_json(s).at("normalization"), "unitmax");
}

TEST(Io, Fnv1a) {
  // Published FNV-1a 64 test vectors.
  EXPECT_EQ(stn::io::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(stn::io::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(stn::io::fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(stn::io::hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
}
