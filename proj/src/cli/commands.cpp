#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "selsamp/bounds.hpp"
#include "selsamp/cli.hpp"
#include "selsamp/errors.hpp"

namespace selsamp::cli {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
      throw InvalidInput(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(where + ": bad value for '" + key + "'");
  }
}

const char* source_name(SampleSource s) {
  switch (s) {
    case SampleSource::fresh: return "fresh";
    case SampleSource::replay: return "replay";
    case SampleSource::exact: return "exact";
  }
  return "?";
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InvalidInput("cannot write " + p.string());
  f << text;
}

std::filesystem::path prepare_out(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory " + dir.string());
  write_file(dir / "config.json", config_to_json(cfg));
  return dir;
}

double beta_for_round(const Instance& inst, const ExperimentConfig& cfg, int round) {
  BetaParams bp;
  bp.delta = cfg.delta;
  bp.round = round;
  bp.num_arms = inst.num_arms();
  bp.bound_B = inst.bound_B;
  bp.sigma = inst.noise == LabelNoise::rademacher ? 1.0 : inst.noise_sigma;
  bp.scale = cfg.solver.beta_scale;
  return beta_constant(bp, BetaVariant::round);
}

ClassificationInstance classify_instance(const ClassifyConfig& c) {
  std::vector<double> eta = c.eta, pi = c.pi, nu = c.nu;
  if (eta.empty())
    for (int i = 0; i < c.n; ++i) eta.push_back(2 * i < c.n ? 0.1 : 0.9);
  if (pi.empty()) pi.assign(c.n, 1.0 / c.n);
  if (nu.empty()) nu.assign(c.n, 1.0 / c.n);
  return threshold_instance(c.n, eta, pi, nu);
}

// Arms that survive every earlier round when θ̂ = θ*: z stays while its gap is below ε_{ℓ−1}.
std::vector<int> ideal_active(const Instance& inst, int round) {
  const BestArm best = gap_and_best(inst);
  std::vector<int> act;
  for (int a = 0; a < inst.num_arms(); ++a) {
    const double gap = (inst.arms[best.index] - inst.arms[a]).dot(inst.theta_star);
    if (round == 1 || gap < std::ldexp(1.0, 1 - round)) act.push_back(a);
  }
  return act;
}

int auto_round(const Instance& inst) {
  const int cap = static_cast<int>(std::ceil(std::log2(4.0 / gap_and_best(inst).gap)));
  int l = 1;
  while (l < cap && ideal_active(inst, l + 1).size() > 1) ++l;
  return l;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  check_keys(j,
             {"instance", "tau_grid", "delta", "trials", "modes", "solver", "seed", "output_dir", "design_tau",
              "design_round", "budget_grid", "budget_points", "log_factor", "classification"},
             "config");
  ExperimentConfig c;
  const std::string w = "config";
  if (j.contains("instance")) {
    const json& inst = j["instance"];
    if (inst.is_string()) {
      c.instance_name = inst.get<std::string>();
      if (c.instance_name != "benchmark" && c.instance_name != "two_point")
        throw InvalidInput("config: unknown builtin instance '" + c.instance_name + "'");
    } else {
      c.instance_name = "inline";
      c.instance = instance_from_json(inst.dump());
    }
  }
  if (c.instance_name == "benchmark") c.instance = benchmark_instance();
  else if (c.instance_name == "two_point") c.instance = two_point_instance();
  c.instance.validate();

  if (j.contains("tau_grid")) c.tau_grid = get<std::vector<double>>(j, "tau_grid", w);
  if (c.tau_grid.empty()) throw InvalidInput("config: tau_grid must not be empty");
  for (size_t i = 0; i < c.tau_grid.size(); ++i) {
    if (!(c.tau_grid[i] >= 1.0)) throw InvalidInput("config: tau_grid entries must be >= 1");
    if (i > 0 && !(c.tau_grid[i] > c.tau_grid[i - 1])) throw InvalidInput("config: tau_grid must be sorted ascending");
  }
  if (j.contains("delta")) c.delta = get<double>(j, "delta", w);
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw InvalidInput("config: delta must lie in (0, 1)");
  if (j.contains("trials")) c.trials = get<int>(j, "trials", w);
  if (c.trials < 1) throw InvalidInput("config: trials must be >= 1");
  if (j.contains("modes")) {
    c.modes.clear();
    for (const auto& m : get<std::vector<std::string>>(j, "modes", w)) c.modes.push_back(parse_mode(m));
    if (c.modes.empty()) throw InvalidInput("config: modes must not be empty");
  }
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", w);
  if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir", w);
  if (j.contains("design_tau")) c.design_tau = get<double>(j, "design_tau", w);
  if (!(c.design_tau >= 1.0)) throw InvalidInput("config: design_tau must be >= 1");
  if (j.contains("design_round")) c.design_round = get<int>(j, "design_round", w);
  if (c.design_round < 0) throw InvalidInput("config: design_round must be >= 0");
  if (j.contains("budget_grid")) c.budget_grid = get<std::vector<double>>(j, "budget_grid", w);
  for (size_t i = 0; i < c.budget_grid.size(); ++i) {
    if (!(c.budget_grid[i] > 0.0)) throw InvalidInput("config: budget_grid entries must be positive");
    if (i > 0 && !(c.budget_grid[i] > c.budget_grid[i - 1]))
      throw InvalidInput("config: budget_grid must be sorted ascending");
  }
  if (j.contains("budget_points")) c.budget_points = get<int>(j, "budget_points", w);
  if (c.budget_points < 2) throw InvalidInput("config: budget_points must be >= 2");
  if (j.contains("log_factor")) {
    const auto lf = get<std::string>(j, "log_factor", w);
    if (lf != "proof" && lf != "theorem") throw InvalidInput("config: log_factor must be proof or theorem");
    c.theorem_log = lf == "theorem";
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    const std::string ws = "config.solver";
    check_keys(s,
               {"K", "u", "mu_b", "epsilon_cert", "source", "covariance", "robust", "beta_scale", "safety_rounds",
                "gap_lower_bound"},
               ws);
    SolverParams& p = c.solver;
    if (s.contains("K")) p.sga.iters = get<long>(s, "K", ws);
    if (s.contains("u")) p.sga.rescale_samples = get<long>(s, "u", ws);
    if (s.contains("mu_b")) p.sga.mu_b = get<double>(s, "mu_b", ws);
    if (s.contains("epsilon_cert")) c.epsilon_cert = get<double>(s, "epsilon_cert", ws);
    if (s.contains("source")) {
      const auto v = get<std::string>(s, "source", ws);
      if (v == "fresh") p.source = SampleSource::fresh;
      else if (v == "replay") p.source = SampleSource::replay;
      else if (v == "exact") p.source = SampleSource::exact;
      else throw InvalidInput("config.solver: source must be fresh, replay or exact");
    }
    if (s.contains("covariance")) {
      const auto v = get<std::string>(s, "covariance", ws);
      if (v == "exact") p.covariance = CovarianceSource::exact;
      else if (v == "empirical") p.covariance = CovarianceSource::empirical;
      else throw InvalidInput("config.solver: covariance must be exact or empirical");
    }
    if (s.contains("robust")) {
      const auto v = get<std::string>(s, "robust", ws);
      if (v == "catoni") p.robust = RobustMethod::catoni;
      else if (v == "median_of_means") p.robust = RobustMethod::median_of_means;
      else throw InvalidInput("config.solver: robust must be catoni or median_of_means");
    }
    if (s.contains("beta_scale")) p.beta_scale = get<double>(s, "beta_scale", ws);
    if (s.contains("safety_rounds")) p.safety_rounds = get<int>(s, "safety_rounds", ws);
    if (s.contains("gap_lower_bound")) p.gap_lower_bound = get<double>(s, "gap_lower_bound", ws);
  }
  const SolverParams& p = c.solver;
  if (p.sga.iters < 1 || p.sga.rescale_samples < 1) throw InvalidInput("config.solver: K and u must be >= 1");
  if (!(p.sga.mu_b > 0.0 && p.sga.mu_b < 1.0)) throw InvalidInput("config.solver: mu_b must lie in (0, 1)");
  if (!(c.epsilon_cert > 0.0)) throw InvalidInput("config.solver: epsilon_cert must be positive");
  if (!(p.beta_scale > 0.0)) throw InvalidInput("config.solver: beta_scale must be positive");
  if (p.safety_rounds < 0) throw InvalidInput("config.solver: safety_rounds must be >= 0");
  if (!(p.gap_lower_bound >= 0.0)) throw InvalidInput("config.solver: gap_lower_bound must be >= 0");

  if (j.contains("classification")) {
    const json& k = j["classification"];
    const std::string wk = "config.classification";
    check_keys(k, {"n", "eta", "pi", "nu", "eps", "bound_tau"}, wk);
    ClassifyConfig& cc = c.classify;
    if (k.contains("n")) cc.n = get<int>(k, "n", wk);
    if (k.contains("eta")) cc.eta = get<std::vector<double>>(k, "eta", wk);
    if (k.contains("pi")) cc.pi = get<std::vector<double>>(k, "pi", wk);
    if (k.contains("nu")) cc.nu = get<std::vector<double>>(k, "nu", wk);
    if (k.contains("eps")) cc.eps = get<double>(k, "eps", wk);
    if (k.contains("bound_tau")) cc.bound_tau = get<double>(k, "bound_tau", wk);
  }
  const ClassifyConfig& cc = c.classify;
  if (cc.n < 2) throw InvalidInput("config.classification: n must be >= 2");
  for (const auto* v : {&cc.eta, &cc.pi, &cc.nu})
    if (!v->empty() && static_cast<int>(v->size()) != cc.n)
      throw InvalidInput("config.classification: eta, pi and nu must have n entries");
  if (!(cc.eps > 0.0)) throw InvalidInput("config.classification: eps must be positive");
  if (!(cc.bound_tau >= 0.0)) throw InvalidInput("config.classification: bound_tau must be >= 0");
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  if (c.instance_name == "inline") j["instance"] = json::parse(instance_to_json(c.instance));
  else j["instance"] = c.instance_name;
  j["tau_grid"] = c.tau_grid;
  j["delta"] = c.delta;
  j["trials"] = c.trials;
  std::vector<std::string> modes;
  for (auto m : c.modes) modes.push_back(mode_name(m));
  j["modes"] = modes;
  const SolverParams& p = c.solver;
  j["solver"] = {{"K", p.sga.iters},
                 {"u", p.sga.rescale_samples},
                 {"mu_b", p.sga.mu_b},
                 {"epsilon_cert", c.epsilon_cert},
                 {"source", source_name(p.source)},
                 {"covariance", p.covariance == CovarianceSource::exact ? "exact" : "empirical"},
                 {"robust", p.robust == RobustMethod::catoni ? "catoni" : "median_of_means"},
                 {"beta_scale", p.beta_scale},
                 {"safety_rounds", p.safety_rounds},
                 {"gap_lower_bound", p.gap_lower_bound}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["design_tau"] = c.design_tau;
  j["design_round"] = c.design_round;
  j["budget_grid"] = c.budget_grid;
  j["budget_points"] = c.budget_points;
  j["log_factor"] = c.theorem_log ? "theorem" : "proof";
  const ClassifyConfig& cc = c.classify;
  j["classification"] = {{"n", cc.n}, {"eta", cc.eta}, {"pi", cc.pi}, {"nu", cc.nu}, {"eps", cc.eps},
                         {"bound_tau", cc.bound_tau}};
  return j.dump(2) + "\n";
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << "\n";
    return infeasible;
  } catch (const InvalidInput& e) {
    err << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return solver_failure;
  }
}

int cmd_sweep(const ExperimentConfig& cfg, int jobs, std::ostream& log) {
  const auto dir = prepare_out(cfg);
  const auto cells =
      label_complexity_sweep(cfg.instance, cfg.tau_grid, cfg.delta, cfg.modes, cfg.trials, cfg.seed, cfg.solver, jobs);
  write_file(dir / "sweep.csv", sweep_csv(cells));
  int failed = 0, infeasible_cells = 0;
  for (const auto& c : cells) {
    if (!c.error.empty()) log << "tau " << format_double(c.tau) << " " << mode_name(c.mode) << ": " << c.error << "\n";
    if (c.completed == 0) {
      ++failed;
      infeasible_cells += c.infeasible;
    }
  }
  if (failed == static_cast<int>(cells.size())) return infeasible_cells == failed ? infeasible : solver_failure;
  return ok;
}

int cmd_dump_design(const ExperimentConfig& cfg, std::ostream& log) {
  const Instance& inst = cfg.instance;
  const auto dir = prepare_out(cfg);
  const int l = cfg.design_round > 0 ? cfg.design_round : auto_round(inst);
  const double eps = std::ldexp(1.0, -l);
  const double beta = beta_for_round(inst, cfg, l);
  const double tau = cfg.design_tau;
  const std::vector<int> active = ideal_active(inst, l);
  if (active.size() < 2) throw InvalidInput("dump-design: no competing arm is left in this round");

  const OracleDesign od = oracle_design(make_design_problem(inst, eps, active), tau, beta);
  log << "round " << l << ": oracle cost " << format_double(od.cost) << " (tau " << format_double(tau) << ", beta "
      << format_double(beta) << ")\n";

  std::vector<Vec> arms;
  for (int a : active) arms.push_back(inst.arms[a]);
  const std::vector<Vec> dirs = direction_set(arms);
  const double c = round_radius(tau, eps, beta);
  const SymMatrix full = weighted_second_moment(inst.stream_points, inst.stream_probs);
  double need = 0.0;
  for (const auto& y : dirs) need = std::max(need, quad_form_inv(full, y));
  if (need > c * c) {
    const double required = need * beta / (eps * eps);
    std::ostringstream os;
    os << "learned design infeasible at tau = " << format_double(tau) << "; need tau >= " << format_double(required);
    throw Infeasible(os.str(), required);
  }
  Rng rng(trial_seed(cfg.seed, tau, SamplerMode::learned, 0));
  StreamSource src = StreamSource::fresh(inst.stream_points, inst.stream_probs);
  SgaOptions opt = cfg.solver.sga;
  opt.exact_rescale = opt.exact_gradient = cfg.solver.source == SampleSource::exact;
  const DesignResult dr = optimize_design_sga(dirs, c, src, rng, opt);
  log << "learned certificate: max_violation " << format_double(dr.cert.max_violation) << " (target <= "
      << format_double(1.0 + cfg.epsilon_cert) << "), primal_cost " << format_double(dr.cert.primal_cost) << "\n";

  std::string s = "index,angle,nu,p_oracle,p_learned\n";
  for (int i = 0; i < inst.support_size(); ++i) {
    const Vec& x = inst.stream_points[i];
    const double angle = x.size() == 2 ? std::atan2(x(1), x(0)) : std::numeric_limits<double>::quiet_NaN();
    s += std::to_string(i) + ',' + format_double(angle) + ',' + format_double(inst.stream_probs[i]) + ',' +
         format_double(od.p[i]) + ',' + format_double(selection_prob(dr.rule, x)) + '\n';
  }
  write_file(dir / "design.csv", s);
  json cert = json::parse(certificate_to_json(dr.cert));
  json summary = {{"oracle_cost", od.cost}, {"oracle_residual", od.residual}, {"beta", beta},
                  {"round", l},             {"radius_c", c},                 {"learned_certificate", cert},
                  {"active_arms", active},
                  {"rule", json::parse(rule_to_json(dr.rule))}};
  write_file(dir / "design.json", summary.dump(2) + "\n");
  return ok;
}

int cmd_tradeoff(const ExperimentConfig& cfg, std::ostream& log) {
  const Instance& inst = cfg.instance;
  const auto dir = prepare_out(cfg);
  std::vector<double> grid = cfg.budget_grid;
  const double threshold = lower_bound_unlabeled(inst, cfg.delta, cfg.theorem_log);
  if (grid.empty()) {
    // geometric from half the threshold to 400× it
    const int k = cfg.budget_points;
    for (int i = 0; i < k; ++i) grid.push_back(threshold * 0.5 * std::pow(800.0, double(i) / (k - 1)));
  }
  log << "lower-bound threshold rho(nu)*log-factor = " << format_double(threshold) << "\n";
  const auto pts = lower_bound_label_curve(inst, cfg.delta, grid, cfg.theorem_log);
  write_file(dir / "tradeoff.csv", tradeoff_csv(pts));
  return ok;
}

int cmd_classify_demo(const ExperimentConfig& cfg, int jobs, std::ostream& log) {
  const auto dir = prepare_out(cfg);
  const ClassifyConfig& cc = cfg.classify;
  const ClassificationInstance ci = classify_instance(cc);
  const BanditReduction red = classification_to_bandit(ci);
  const int hs = best_hypothesis(ci);

  BetaParams bp;
  bp.delta = cfg.delta;
  bp.num_arms = static_cast<int>(ci.hypotheses.size());
  bp.eps = cc.eps;
  bp.scale = cfg.solver.beta_scale;
  const double beta = beta_constant(bp, BetaVariant::classification);
  const double need = 16.0 * rho(red.instance, ci.nu_probs, cc.eps) * beta;
  const double bound_tau = cc.bound_tau > 0.0 ? cc.bound_tau : need;
  const ClassificationBound b = classification_label_bound(ci, cc.eps, cfg.delta, bound_tau, cfg.solver.beta_scale);
  const double r = classification_risk(ci, hs);

  std::string s = "eps,delta,tau,beta,best_hypothesis,best_risk,disagreement_coefficient,design_form,disagreement_form\n";
  s += format_double(cc.eps) + ',' + format_double(cfg.delta) + ',' + format_double(bound_tau) + ',' +
       format_double(beta) + ',' + std::to_string(hs) + ',' + format_double(r) + ',' +
       format_double(disagreement_coefficient(ci, 2.0 * r + cc.eps)) + ',' + format_double(b.design_form) + ',' +
       format_double(b.disagreement_form) + '\n';
  write_file(dir / "classify_bounds.csv", s);
  log << "bounds at tau " << format_double(bound_tau) << ": design-form " << format_double(b.design_form)
      << ", disagreement-form " << format_double(b.disagreement_form) << "\n";

  const auto cells = label_complexity_sweep(red.instance, cfg.tau_grid, cfg.delta, cfg.modes, cfg.trials, cfg.seed,
                                            cfg.solver, jobs);
  write_file(dir / "classify.csv", sweep_csv(cells));
  for (const auto& c : cells)
    if (!c.error.empty()) log << "tau " << format_double(c.tau) << " " << mode_name(c.mode) << ": " << c.error << "\n";
  return ok;
}

}  // namespace selsamp::cli
