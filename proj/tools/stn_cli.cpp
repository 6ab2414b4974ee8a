// stn: reconstruct stress-testing networks from a CSV panel.
//
//   stn reconstruct --input panel.csv --risk PD --out DIR
//   stn importance  --input panel.csv --risk PD --out DIR
//   stn synth-eval  --p 6 --T 500 --replicates 20 --out DIR
//   stn synth       --p 14 --T 24 --out panel.csv
//
// Exit codes: 0 success, 1 runtime/module error, 2 bad flags.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stn/io.hpp"
#include "stn/stn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ReconOptions {
  std::string input;
  std::string risk;
  std::string penalty = "enet";
  double alpha = 0.5;
  std::string lambda = "cv";
  std::size_t folds = 5;
  std::string scheme = "kfold";
  bool allow_pd_self_lag = false;
  std::string transform = "auto";
  std::size_t n_lambdas = 50;
  double lambda_min_ratio = 1e-3;
  double tol = 1e-7;
  std::size_t max_sweeps = 10000;
  bool no_standardize = false;
  std::string select = "min";
  std::string score = "all";
  double threshold = 0.0;
  std::string normalize = "unitmax";
};

json to_json(const ReconOptions& o) {
  return {{"input", o.input},
          {"risk", o.risk},
          {"penalty", o.penalty},
          {"alpha", o.alpha},
          {"lambda", o.lambda},
          {"folds", o.folds},
          {"scheme", o.scheme},
          {"allow_pd_self_lag", o.allow_pd_self_lag},
          {"transform", o.transform},
          {"n_lambdas", o.n_lambdas},
          {"lambda_min_ratio", o.lambda_min_ratio},
          {"tol", o.tol},
          {"max_sweeps", o.max_sweeps},
          {"standardize", !o.no_standardize},
          {"select", o.select},
          {"score", o.score},
          {"threshold", o.threshold},
          {"normalize", o.normalize}};
}

ReconOptions options_from_json(const json& j) {
  ReconOptions o;
  o.input = j.at("input").get<std::string>();
  o.risk = j.at("risk").get<std::string>();
  o.penalty = j.at("penalty").get<std::string>();
  o.alpha = j.at("alpha").get<double>();
  o.lambda = j.at("lambda").get<std::string>();
  o.folds = j.at("folds").get<std::size_t>();
  o.scheme = j.at("scheme").get<std::string>();
  o.allow_pd_self_lag = j.at("allow_pd_self_lag").get<bool>();
  o.transform = j.at("transform").get<std::string>();
  o.n_lambdas = j.at("n_lambdas").get<std::size_t>();
  o.lambda_min_ratio = j.at("lambda_min_ratio").get<double>();
  o.tol = j.at("tol").get<double>();
  o.max_sweeps = j.at("max_sweeps").get<std::size_t>();
  o.no_standardize = !j.at("standardize").get<bool>();
  o.select = j.at("select").get<std::string>();
  o.score = j.at("score").get<std::string>();
  o.threshold = j.at("threshold").get<double>();
  o.normalize = j.at("normalize").get<std::string>();
  return o;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw stn::Error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw stn::Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw stn::Error("write failed for '" + path.string() + "'");
}

unsigned threads_from_env() {
  const char* v = std::getenv("STN_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) throw UsageError("STN_THREADS must be a non-negative integer");
  return static_cast<unsigned>(n);
}

double effective_alpha(const ReconOptions& o) { return o.penalty == "lasso" ? 1.0 : o.alpha; }

stn::SolverConfig solver_config(const ReconOptions& o) {
  stn::SolverConfig c;
  c.alpha = effective_alpha(o);
  c.tol = o.tol;
  c.max_sweeps = o.max_sweeps;
  c.standardize = !o.no_standardize;
  c.threads = threads_from_env();
  return c;
}

stn::FoldScheme fold_scheme(const std::string& s) {
  return s == "rolling" ? stn::FoldScheme::RollingOrigin : stn::FoldScheme::KFoldContiguous;
}

stn::Normalization normalization(const std::string& s) {
  if (s == "raw") return stn::Normalization::Raw;
  if (s == "unitsum") return stn::Normalization::UnitSum;
  return stn::Normalization::UnitMax;
}

struct LoadedInput {
  stn::TimeSeriesPanel panel;
  std::string digest;
  bool logit_applied;
};

LoadedInput load_input(const ReconOptions& o) {
  const auto bytes = read_file(o.input);
  std::istringstream is(bytes);
  auto panel = stn::load_csv(is, o.risk);
  bool logit = false;
  if (o.transform == "logit" || (o.transform == "auto" && stn::risk_in_unit_interval(panel))) {
    panel = stn::apply_logit(panel);
    logit = true;
  }
  return {std::move(panel), stn::io::hex64(stn::io::fnv1a64(bytes)), logit};
}

struct LambdaChoice {
  double value = 0.0;
  std::optional<stn::CvResult> cv;
  std::optional<stn::FoldPlan> plan;
};

LambdaChoice choose_lambda(const stn::DesignMatrices& design, const stn::ConstraintMask& mask, const ReconOptions& o) {
  LambdaChoice out;
  if (o.lambda != "cv") {
    double v = 0.0;
    if (!stn::detail::parse_double(o.lambda, v) || v < 0.0) throw UsageError("--lambda must be 'cv' or a number >= 0");
    out.value = v;
    return out;
  }
  out.plan = stn::make_folds(design.effective_samples(), o.folds, fold_scheme(o.scheme));
  stn::CvOptions cvo;
  cvo.solver = solver_config(o);
  cvo.score_risk_only = o.score == "risk";
  out.cv = stn::cross_validate(design, mask, {effective_alpha(o)}, o.n_lambdas, o.lambda_min_ratio, *out.plan, cvo);
  const auto idx = o.select == "1se" ? out.cv->best_1se : out.cv->best;
  out.value = out.cv->grid[idx].lambda;
  return out;
}

json label_list(const stn::StnGraph& g, const std::vector<std::size_t>& ids) {
  json out = json::array();
  for (const auto i : ids) out.push_back(g.nodes()[i].label);
  return out;
}

int run_reconstruct(ReconOptions o, const std::string& out_dir, const std::string& manifest_path) {
  std::optional<std::string> expected_digest;
  if (!manifest_path.empty()) {
    const auto m = json::parse(read_file(manifest_path));
    o = options_from_json(m.at("options"));
    expected_digest = m.at("input").at("fnv1a64").get<std::string>();
  }
  if (o.input.empty() || o.risk.empty()) throw UsageError("--input and --risk are required");

  const auto in = load_input(o);
  if (expected_digest && *expected_digest != in.digest)
    throw stn::Error("input '" + o.input + "' does not match the manifest fingerprint");
  const auto& panel = in.panel;
  const auto names = panel.names();
  const auto mask = stn::default_mask(panel.num_variables()).with_pd_self_lag(o.allow_pd_self_lag);
  const auto design = stn::build_design(panel);

  auto cfg = solver_config(o);
  const auto choice = choose_lambda(design, mask, o);
  cfg.lambda = choice.value;
  const auto res = stn::fit(design, mask, cfg);
  if (!res.report.converged) std::cerr << "stn: warning: solver hit --max-sweeps before converging\n";
  if (const auto v = stn::check_coefficients(res.coeffs, mask); !v.empty())
    throw stn::Error("fitted coefficients violate the constraint mask");

  const auto ext = stn::extended_graph(res.coeffs, names, o.threshold);
  const auto cmp = stn::compact_graph(ext);

  // Importance is fitted on standardized series; lambda is chosen the same way there.
  const auto std_design = stn::build_design(stn::standardize(panel).panel);
  const auto imp_choice = choose_lambda(std_design, mask, o);
  auto imp_cfg = cfg;
  imp_cfg.lambda = imp_choice.value;
  const auto imp = stn::importance_scale(panel, mask, imp_cfg, normalization(o.normalize));
  if (imp.degenerate) std::cerr << "stn: warning: every importance score is zero (risk equation fully shrunk)\n";

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::vector<std::string> outputs;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    outputs.push_back(name);
  };
  emit("coefficients.json",
       stn::io::to_json(res.coeffs, {names, cfg.lambda, cfg.alpha, res.report.objective_value, res.report.kkt_residual})
               .dump(2) +
           "\n");
  emit("extended.dot", stn::export_dot(ext));
  emit("compact.dot", stn::export_dot(cmp));
  emit("adjacency_extended.csv", stn::export_adjacency_csv(ext));
  emit("adjacency_compact.csv", stn::export_adjacency_csv(cmp));
  emit("importance.csv", stn::io::importance_csv(imp));
  if (choice.cv) emit("cv.csv", stn::io::cv_csv(*choice.cv));

  const auto ext_cycle = stn::is_acyclic(ext, true);
  const auto cmp_cycle = stn::is_acyclic(cmp, true);
  if (!cmp_cycle.acyclic)
    std::cerr << "stn: warning: compact graph has a cycle: " << label_list(cmp, *cmp_cycle.witness).dump() << "\n";
  json risk_out = json::array();
  for (const auto& [s, t] : stn::risk_out_edges(cmp)) risk_out.push_back({cmp.nodes()[s].label, cmp.nodes()[t].label});
  if (!risk_out.empty()) std::cerr << "stn: note: edges leave the risk parameter: " << risk_out.dump() << "\n";
  const auto nb = stn::neighborhoods(cmp, 0);
  json candidates = json::array();
  for (const auto i : nb.ne) candidates.push_back(cmp.nodes()[i].label);

  json manifest = {
      {"tool", "stn"},
      {"version", kVersion},
      {"command", "reconstruct"},
      {"options", to_json(o)},
      {"input", {{"path", o.input}, {"fnv1a64", in.digest}}},
      {"transform", in.logit_applied ? "logit" : "none"},
      {"mask", stn::io::to_json(mask)},
      {"lambda",
       {{"mode", choice.cv ? "cv" : "fixed"},
        {"value", cfg.lambda},
        {"importance_value", imp_cfg.lambda},
        {"selection", o.select}}},
      {"fold_plan", choice.plan ? json{{"scheme", stn::to_string(choice.plan->scheme)}, {"k", choice.plan->k}} : json()},
      {"solver",
       {{"alpha", cfg.alpha}, {"tol", cfg.tol}, {"max_sweeps", cfg.max_sweeps}, {"standardize", cfg.standardize}}},
      {"fit",
       {{"converged", res.report.converged},
        {"sweeps", res.report.sweeps_used},
        {"objective", res.report.objective_value},
        {"kkt_residual", res.report.kkt_residual},
        {"nonzero", res.coeffs.nonzero_count()}}},
      {"diagnostics",
       {{"extended_acyclic", ext_cycle.acyclic},
        {"compact_acyclic", cmp_cycle.acyclic},
        {"compact_cycle", cmp_cycle.witness ? label_list(cmp, *cmp_cycle.witness) : json()},
        {"risk_out_edges", risk_out},
        {"risk_neighbourhood", candidates}}},
  };
  outputs.push_back("manifest.json");
  manifest["outputs"] = outputs;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

int run_importance(const ReconOptions& o, const std::string& out_dir) {
  const auto in = load_input(o);
  const auto mask = stn::default_mask(in.panel.num_variables()).with_pd_self_lag(o.allow_pd_self_lag);
  const auto std_design = stn::build_design(stn::standardize(in.panel).panel);
  auto cfg = solver_config(o);
  cfg.lambda = choose_lambda(std_design, mask, o).value;
  const auto imp = stn::importance_scale(in.panel, mask, cfg, normalization(o.normalize));
  if (imp.degenerate) std::cerr << "stn: warning: every importance score is zero (risk equation fully shrunk)\n";
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "importance.csv", stn::io::importance_csv(imp));
  return 0;
}

struct SynthOptions {
  std::size_t p = 6;
  std::size_t T = 500;
  double density = 0.15;
  double noise = 0.05;
  double coef_low = 0.4;
  double coef_high = 0.8;
  std::uint64_t seed = 1;
  bool lag_only = false;
  bool allow_pd_self_lag = false;
};

stn::SynthSpec synth_spec(const SynthOptions& s) {
  stn::SynthSpec spec;
  spec.p = s.p;
  spec.T = s.T;
  spec.edge_density = s.density;
  spec.noise_sd.assign(s.p, s.noise);
  spec.coef_low = s.coef_low;
  spec.coef_high = s.coef_high;
  spec.seed = s.seed;
  spec.contemporaneous = !s.lag_only;
  spec.allow_pd_self_lag = s.allow_pd_self_lag;
  return spec;
}

struct Stats {
  double mean = 0.0, sd = 0.0, median = 0.0;
};

Stats stats(std::vector<double> v) {
  Stats s;
  if (v.empty()) return s;
  const double n = static_cast<double>(v.size());
  for (const double x : v) s.mean += x / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (const double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
  }
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  s.median = v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  return s;
}

int run_synth_eval(const SynthOptions& s, ReconOptions o, std::size_t replicates, const std::string& out_dir) {
  std::vector<std::pair<std::string, double>> penalties;
  if (o.penalty == "lasso" || o.penalty == "both") penalties.emplace_back("lasso", 1.0);
  if (o.penalty == "enet" || o.penalty == "both") penalties.emplace_back("enet", o.alpha);

  using stn::detail::format_double;
  std::ostringstream rows;
  rows << "replicate,seed,penalty,alpha,lambda,tp,fp,fn,precision,recall,f1,sign_agreement\n";
  std::vector<std::vector<stn::RecoveryMetrics>> per(penalties.size());
  for (std::size_t r = 0; r < replicates; ++r) {
    auto spec = synth_spec(s);
    spec.seed = s.seed + r;
    const auto gen = stn::generate(spec);
    const auto mask = stn::default_mask(s.p).with_pd_self_lag(s.allow_pd_self_lag);
    const auto design = stn::build_design(gen.panel);
    for (std::size_t k = 0; k < penalties.size(); ++k) {
      ReconOptions pen = o;
      pen.penalty = penalties[k].first == "lasso" ? "lasso" : "enet";
      pen.alpha = penalties[k].second;
      auto cfg = solver_config(pen);
      cfg.lambda = choose_lambda(design, mask, pen).value;
      const auto fit = stn::fit(design, mask, cfg);
      const auto m = stn::edge_metrics(gen.truth.coeffs, fit.coeffs, mask, o.threshold);
      per[k].push_back(m);
      rows << r << ',' << spec.seed << ',' << penalties[k].first << ',' << format_double(cfg.alpha) << ','
           << format_double(cfg.lambda) << ',' << m.combined.true_positive << ',' << m.combined.false_positive << ','
           << m.combined.false_negative << ',' << format_double(m.precision) << ',' << format_double(m.recall) << ','
           << format_double(m.f1) << ',' << format_double(m.sign_agreement) << '\n';
    }
  }

  std::ostringstream summary;
  summary << "penalty,replicates,mean_precision,sd_precision,mean_recall,sd_recall,mean_f1,sd_f1,"
             "median_precision,median_recall,median_f1\n";
  for (std::size_t k = 0; k < penalties.size(); ++k) {
    std::vector<double> pr, rc, f1;
    for (const auto& m : per[k]) {
      pr.push_back(m.precision);
      rc.push_back(m.recall);
      f1.push_back(m.f1);
    }
    const auto a = stats(pr), b = stats(rc), c = stats(f1);
    summary << penalties[k].first << ',' << replicates << ',' << format_double(a.mean) << ',' << format_double(a.sd)
            << ',' << format_double(b.mean) << ',' << format_double(b.sd) << ',' << format_double(c.mean) << ','
            << format_double(c.sd) << ',' << format_double(a.median) << ',' << format_double(b.median) << ','
            << format_double(c.median) << '\n';
  }
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "replicates.csv", rows.str());
  write_file(fs::path(out_dir) / "summary.csv", summary.str());
  return 0;
}

// Shifts the risk parameter by `offset` and adjusts the intercepts so the truth stays exact.
stn::CoefficientSet shift_risk(stn::CoefficientSet c, double offset) {
  c.intercept(0) += offset * (1.0 - c.phi(0, 0));
  for (Eigen::Index i = 1; i < c.intercept.size(); ++i) c.intercept(i) -= (c.psi(i, 0) + c.phi(i, 0)) * offset;
  return c;
}

int run_synth(const SynthOptions& s, bool case_study, bool risk_probability, double risk_offset,
              const std::string& out_path, const std::string& truth_path) {
  auto spec = synth_spec(s);
  if (case_study) {
    if (s.p != 14) throw UsageError("--schema case-study needs --p 14");
    spec.names = stn::case_study_names();
    spec.start_year = 2009;
    spec.start_quarter = 2;
  }
  const auto gen = stn::generate(spec);
  auto panel = gen.panel;
  auto truth = gen.truth.coeffs;
  if (risk_probability) {
    Eigen::MatrixXd v = panel.values();
    v.row(0).array() += risk_offset;
    truth = shift_risk(truth, risk_offset);
    auto vars = panel.variables();
    vars[0].transform = stn::Transform::Logit;
    panel = stn::invert_logit(stn::TimeSeriesPanel(vars, v, panel.period_labels()));
  }
  std::ostringstream os;
  stn::write_csv(os, panel);
  if (out_path.empty() || out_path == "-") std::cout << os.str();
  else write_file(out_path, os.str());
  if (!truth_path.empty()) {
    const auto mask = stn::default_mask(s.p).with_pd_self_lag(s.allow_pd_self_lag);
    json t = stn::io::to_json(truth, {panel.names(), 0.0, 1.0, 0.0, 0.0});
    t["mask"] = stn::io::to_json(mask);
    t["spectral_radius"] = gen.truth.spectral_radius;
    t["condition_number"] = gen.truth.condition_number;
    t["risk_transform"] = risk_probability ? "logit" : "none";
    write_file(truth_path, t.dump(2) + "\n");
  }
  return 0;
}

CLI::Validator lambda_validator() {
  return CLI::Validator(
      [](std::string& v) -> std::string {
        double x = 0.0;
        if (v == "cv" || (stn::detail::parse_double(v, x) && x >= 0.0)) return {};
        return "must be 'cv' or a number >= 0";
      },
      "cv|VALUE");
}

void add_estimation_flags(CLI::App* cmd, ReconOptions& o, bool with_penalty_both = false) {
  const std::vector<std::string> penalties =
      with_penalty_both ? std::vector<std::string>{"lasso", "enet", "both"} : std::vector<std::string>{"lasso", "enet"};
  cmd->add_option("--penalty", o.penalty, "lasso or enet (elastic net)")
      ->check(CLI::IsMember(penalties))
      ->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "elastic-net mixing in (0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "penalty value, or 'cv' to cross-validate")
      ->check(lambda_validator())
      ->capture_default_str();
  cmd->add_option("--folds", o.folds, "number of CV folds")->check(CLI::Range(2, 100000))->capture_default_str();
  cmd->add_option("--scheme", o.scheme, "kfold or rolling")
      ->check(CLI::IsMember({"kfold", "rolling"}))
      ->capture_default_str();
  cmd->add_option("--n-lambdas", o.n_lambdas, "lambda grid size for CV")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();
  cmd->add_option("--lambda-min-ratio", o.lambda_min_ratio, "smallest grid lambda / lambda_max")
      ->check(CLI::Range(1e-12, 0.999999))
      ->capture_default_str();
  cmd->add_option("--select", o.select, "CV choice: min or 1se")->check(CLI::IsMember({"min", "1se"}))->capture_default_str();
  cmd->add_option("--score", o.score, "CV scoring target: all or risk")
      ->check(CLI::IsMember({"all", "risk"}))
      ->capture_default_str();
  cmd->add_option("--tol", o.tol, "coordinate-descent tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--max-sweeps", o.max_sweeps, "sweep cap per row")->check(CLI::Range(1, 100000000))->capture_default_str();
  cmd->add_flag("--no-standardize", o.no_standardize, "penalize coefficients on the original predictor scale");
  cmd->add_flag("--allow-pd-self-lag", o.allow_pd_self_lag, "let the risk parameter load on its own lag");
  cmd->add_option("--threshold", o.threshold, "edge threshold on |coefficient|")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

void add_input_flags(CLI::App* cmd, ReconOptions& o) {
  cmd->add_option("--input", o.input, "CSV panel (first column = period label)");
  cmd->add_option("--risk", o.risk, "name of the risk-parameter column");
  cmd->add_option("--transform", o.transform, "risk transform: auto, logit or none")
      ->check(CLI::IsMember({"auto", "logit", "none"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stress-testing network reconstruction"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ReconOptions recon;
  std::string recon_out, recon_manifest;
  auto* rec = app.add_subcommand("reconstruct", "estimate the network and write all artifacts");
  add_input_flags(rec, recon);
  add_estimation_flags(rec, recon);
  rec->add_option("--normalize", recon.normalize, "importance normalization: raw, unitmax or unitsum")
      ->check(CLI::IsMember({"raw", "unitmax", "unitsum"}))
      ->capture_default_str();
  rec->add_option("--from-manifest", recon_manifest, "re-run with the options recorded in a manifest.json");
  rec->add_option("--out", recon_out, "output directory")->required();

  ReconOptions imp;
  std::string imp_out;
  auto* impc = app.add_subcommand("importance", "write the importance scale of macro shocks");
  add_input_flags(impc, imp);
  add_estimation_flags(impc, imp);
  impc->add_option("--normalize", imp.normalize, "raw, unitmax or unitsum")
      ->check(CLI::IsMember({"raw", "unitmax", "unitsum"}))
      ->capture_default_str();
  impc->add_option("--out", imp_out, "output directory")->required();

  SynthOptions syn;
  ReconOptions syn_recon;
  syn_recon.penalty = "both";
  std::size_t replicates = 1;
  std::string eval_out;
  auto* eval = app.add_subcommand("synth-eval", "score network recovery on simulated panels");
  eval->add_option("--p", syn.p, "number of variables")->check(CLI::Range(2, 1000))->capture_default_str();
  eval->add_option("--T", syn.T, "number of periods")->check(CLI::Range(3, 10000000))->capture_default_str();
  eval->add_option("--density", syn.density, "edge density")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  eval->add_option("--noise", syn.noise, "innovation sd")->check(CLI::NonNegativeNumber)->capture_default_str();
  eval->add_option("--coef-low", syn.coef_low)->check(CLI::NonNegativeNumber)->capture_default_str();
  eval->add_option("--coef-high", syn.coef_high)->check(CLI::NonNegativeNumber)->capture_default_str();
  eval->add_option("--seed", syn.seed)->capture_default_str();
  eval->add_option("--replicates", replicates)->check(CLI::Range(1, 1000000))->capture_default_str();
  eval->add_flag("--lag-only", syn.lag_only, "simulate without contemporaneous effects");
  add_estimation_flags(eval, syn_recon, true);
  eval->add_option("--out", eval_out, "output directory")->required();

  SynthOptions gen;
  gen.p = 14;
  gen.T = 24;
  std::string gen_out, gen_truth, schema = "generic";
  bool risk_probability = false;
  double risk_offset = -3.0;
  auto* synth = app.add_subcommand("synth", "simulate a panel with known structure");
  synth->add_option("--p", gen.p)->check(CLI::Range(2, 1000))->capture_default_str();
  synth->add_option("--T", gen.T)->check(CLI::Range(3, 10000000))->capture_default_str();
  synth->add_option("--density", gen.density)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  synth->add_option("--noise", gen.noise)->check(CLI::NonNegativeNumber)->capture_default_str();
  synth->add_option("--coef-low", gen.coef_low)->check(CLI::NonNegativeNumber)->capture_default_str();
  synth->add_option("--coef-high", gen.coef_high)->check(CLI::NonNegativeNumber)->capture_default_str();
  synth->add_option("--seed", gen.seed)->capture_default_str();
  synth->add_flag("--lag-only", gen.lag_only);
  synth->add_flag("--allow-pd-self-lag", gen.allow_pd_self_lag);
  synth->add_option("--schema", schema, "generic or case-study (14 named variables, quarters from 2009Q2)")
      ->check(CLI::IsMember({"generic", "case-study"}))
      ->capture_default_str();
  synth->add_flag("--risk-probability", risk_probability, "write the risk parameter as a probability");
  synth->add_option("--risk-offset", risk_offset, "logit-scale shift applied before --risk-probability")
      ->capture_default_str();
  synth->add_option("--out", gen_out, "panel CSV path ('-' for stdout)");
  synth->add_option("--truth", gen_truth, "write the true coefficients as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*rec) return run_reconstruct(recon, recon_out, recon_manifest);
    if (*impc) {
      if (imp.input.empty() || imp.risk.empty()) throw UsageError("--input and --risk are required");
      return run_importance(imp, imp_out);
    }
    if (*eval) {
      if (syn.coef_low > syn.coef_high) throw UsageError("--coef-low must not exceed --coef-high");
      return run_synth_eval(syn, syn_recon, replicates, eval_out);
    }
    if (*synth) return run_synth(gen, schema == "case-study", risk_probability, risk_offset, gen_out, gen_truth);
  } catch (const UsageError& e) {
    std::cerr << "stn: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "stn: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
