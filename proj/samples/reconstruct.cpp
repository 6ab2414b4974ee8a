// Simulates a small panel, fits it with a cross-validated elastic net and
// prints the recovered compact network, the importance scale and the
// recovery metrics against the known truth.

#include <iostream>

#include "stn/stn.hpp"

int main() {
  stn::SynthSpec spec;
  spec.p = 5;
  spec.T = 300;
  spec.seed = 7;
  const auto gen = stn::generate(spec);

  const auto mask = stn::default_mask(spec.p);
  const auto design = stn::build_design(gen.panel);
  const auto plan = stn::make_folds(design.effective_samples(), 5, stn::FoldScheme::KFoldContiguous);

  stn::CvOptions cv_opts;
  cv_opts.solver.alpha = 0.5;
  const auto cv = stn::cross_validate(design, mask, {0.5}, 30, 1e-3, plan, cv_opts);

  stn::SolverConfig cfg = cv_opts.solver;
  cfg.lambda = cv.grid[cv.best].lambda;
  const auto res = stn::fit(design, mask, cfg);
  std::cout << "lambda " << cfg.lambda << ", " << res.report.sweeps_used << " sweeps, "
            << res.coeffs.nonzero_count() << " nonzero coefficients\n\n";

  const auto graph = stn::compact_graph(stn::extended_graph(res.coeffs, gen.panel.names()));
  std::cout << stn::export_dot(graph) << '\n';

  const auto imp = stn::importance_scale(gen.panel, mask, cfg, stn::Normalization::UnitMax);
  for (const auto& e : imp.entries) std::cout << e.label() << '\t' << e.score << '\n';

  const auto m = stn::edge_metrics(gen.truth.coeffs, res.coeffs, mask);
  std::cout << "\nprecision " << m.precision << "  recall " << m.recall << "  f1 " << m.f1 << '\n';
}
