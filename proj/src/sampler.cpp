#include "selsamp/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>
#include <thread>

#include "selsamp/errors.hpp"

namespace selsamp {

const char* mode_name(SamplerMode m) {
  switch (m) {
    case SamplerMode::naive: return "naive";
    case SamplerMode::oracle: return "oracle";
    case SamplerMode::learned: return "learned";
  }
  return "?";
}

SamplerMode parse_mode(const std::string& s) {
  if (s == "naive") return SamplerMode::naive;
  if (s == "oracle") return SamplerMode::oracle;
  if (s == "learned") return SamplerMode::learned;
  throw InvalidInput("unknown mode '" + s + "'");
}

std::shared_ptr<const OracleDesign> OracleCache::get(const std::string& key) {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = map_.find(key);
  return it == map_.end() ? nullptr : it->second;
}

void OracleCache::put(const std::string& key, std::shared_ptr<const OracleDesign> v) {
  std::lock_guard<std::mutex> lk(mu_);
  map_.emplace(key, std::move(v));
}

namespace {

std::string cache_key(double tau, int round, const std::vector<int>& active) {
  std::ostringstream os;
  os << format_double(tau) << '|' << round;
  for (int a : active) os << ',' << a;
  return os.str();
}

std::string infeasible_message(SamplerMode mode, double tau, double required) {
  std::ostringstream os;
  os << mode_name(mode) << " design infeasible in round 1: tau = " << format_double(tau)
     << " but at least " << format_double(required) << " is required";
  return os.str();
}

}  // namespace

RunResult run(const Instance& inst, double tau, double delta, SamplerMode mode, const SolverParams& params,
              Rng& rng, OracleCache* cache) {
  inst.validate();
  if (!(tau >= 1.0)) throw InvalidInput("run: tau must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("run: delta must lie in (0, 1)");
  const BestArm best = gap_and_best(inst);
  const double gap_cfg = params.gap_lower_bound > 0.0 ? params.gap_lower_bound : best.gap;
  const int max_rounds = static_cast<int>(std::ceil(std::log2(4.0 / gap_cfg))) + params.safety_rounds;
  const long n_tau = static_cast<long>(tau);
  const int n = inst.support_size();
  const StreamSampler sampler(inst.stream_probs);
  const WeightedPoints exact = exact_support(inst);
  const SymMatrix full_cov = weighted_second_moment(inst.stream_points, inst.stream_probs);

  RunResult res;
  std::vector<int> active(inst.num_arms());
  for (int i = 0; i < inst.num_arms(); ++i) active[i] = i;
  std::vector<int> history;
  Vec theta_hat = Vec::Zero(inst.dim());
  std::vector<LabeledDraw> draws(n_tau);

  for (int l = 1; l <= max_rounds && active.size() > 1; ++l) {
    RoundLog log;
    log.round = l;
    log.active_arms = active;
    log.eps = std::ldexp(1.0, -l);
    BetaParams bp;
    bp.delta = delta;
    bp.round = l;
    bp.num_arms = inst.num_arms();
    bp.bound_B = inst.bound_B;
    bp.sigma = inst.noise == LabelNoise::rademacher ? 1.0 : inst.noise_sigma;
    bp.scale = params.beta_scale;
    const double beta = beta_constant(bp, BetaVariant::round);

    std::vector<Vec> arms;
    for (int a : active) arms.push_back(inst.arms[a]);
    const std::vector<Vec> dirs = direction_set(arms);

    std::vector<double> p(n, 1.0);
    std::optional<SelectionRule> rule;
    if (mode == SamplerMode::oracle) {
      const std::string key = cache_key(tau, l, active);
      std::shared_ptr<const OracleDesign> od = cache ? cache->get(key) : nullptr;
      if (!od) {
        try {
          od = std::make_shared<OracleDesign>(oracle_design(make_design_problem(inst, log.eps, active), tau, beta));
        } catch (const Infeasible& e) {
          if (l == 1) throw Infeasible(infeasible_message(mode, tau, e.required), e.required);
          od = std::make_shared<OracleDesign>();  // empty table marks a saturated round
        }
        if (cache) cache->put(key, od);
      }
      if (od->p.empty()) log.design_saturated = true;
      else p = od->p;
    } else if (mode == SamplerMode::learned) {
      const double c = round_radius(tau, log.eps, beta);
      double need = 0.0;
      for (const auto& y : dirs) need = std::max(need, quad_form_inv(full_cov, y));
      if (need > c * c) {
        const double required = need * beta / (log.eps * log.eps);
        if (l == 1) throw Infeasible(infeasible_message(mode, tau, required), required);
        log.design_saturated = true;
      } else {
        StreamSource src = params.source == SampleSource::replay && !history.empty()
                               ? StreamSource::replay(inst.stream_points, history)
                               : StreamSource::fresh(inst.stream_points, inst.stream_probs);
        SgaOptions opt = params.sga;
        opt.exact_rescale = params.source == SampleSource::exact;
        opt.exact_gradient = opt.exact_rescale;
        DesignResult dr = optimize_design_sga(dirs, c, src, rng, opt);
        if (params.source == SampleSource::replay) dr.cert = certify(dr.rule, dirs, c, exact);
        for (int i = 0; i < n; ++i) p[i] = selection_prob(dr.rule, inst.stream_points[i]);
        log.rule_certificate = dr.cert;
        rule = dr.rule;
      }
    }

    // stream the round
    history.assign(n_tau, 0);
    long labels = 0;
    for (long t = 0; t < n_tau; ++t) {
      const int i = sampler.draw(rng);
      history[t] = i;
      LabeledDraw& dr = draws[t];
      dr.point = i;
      dr.query_prob = p[i];
      dr.queried = p[i] >= 1.0 || std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p[i];
      dr.y = dr.queried ? sample_label(inst, inst.stream_points[i], rng) : 0.0;
      labels += dr.queried;
    }
    log.labels_requested = labels;
    log.unlabeled_seen = n_tau;
    res.total_labels += labels;
    res.total_unlabeled += n_tau;

    SymMatrix cov(inst.dim());
    if (params.covariance == CovarianceSource::empirical && rule) {
      std::vector<double> w(n, 0.0);
      for (long t = 0; t < n_tau; ++t) w[history[t]] += 1.0 / n_tau;
      for (int i = 0; i < n; ++i) w[i] *= p[i];
      cov = weighted_second_moment(inst.stream_points, w);
    } else {
      std::vector<double> w(n);
      for (int i = 0; i < n; ++i) w[i] = inst.stream_probs[i] * p[i];
      cov = weighted_second_moment(inst.stream_points, w);
    }
    // Later rounds leave coordinates outside span(dirs) unqueried; the default ridge alone sits below the
    // singularity tolerance there.
    cov += std::max(default_ridge(cov), 2e-10 * (1.0 + cov.frobenius())) * SymMatrix::identity(inst.dim());

    const double delta_l = delta / (2.0 * l * l);
    RipsResult fit = rips_estimate(draws, inst.stream_points, cov, dirs, delta_l, params.robust);
    theta_hat = fit.theta_hat;

    std::vector<int> keep;
    for (int a : active) {
      double worst = -std::numeric_limits<double>::infinity();
      for (int b : active) worst = std::max(worst, (inst.arms[b] - inst.arms[a]).dot(theta_hat));
      if (worst < log.eps) keep.push_back(a);
    }
    active = keep;
    res.rounds.push_back(std::move(log));
  }

  if (active.size() == 1) {
    res.recommended_arm = active[0];
  } else {
    int arg = active[0];
    for (int a : active)
      if (inst.arms[a].dot(theta_hat) > inst.arms[arg].dot(theta_hat)) arg = a;
    res.recommended_arm = arg;
  }
  res.correct = res.recommended_arm == best.index;
  return res;
}

// ---- sweep ----------------------------------------------------------------

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t seed, double tau, SamplerMode mode, int trial) {
  std::uint64_t bits;
  std::memcpy(&bits, &tau, sizeof bits);
  std::uint64_t h = splitmix(bits);
  h = splitmix(h ^ (static_cast<std::uint64_t>(mode) + 1));
  h = splitmix(h ^ static_cast<std::uint64_t>(trial));
  return seed ^ h;
}

std::vector<SweepCell> label_complexity_sweep(const Instance& inst, const std::vector<double>& tau_grid,
                                              double delta, const std::vector<SamplerMode>& modes, int trials,
                                              std::uint64_t seed, const SolverParams& params, int jobs) {
  if (trials < 1) throw InvalidInput("sweep: trials must be >= 1");
  struct Outcome {
    bool ok = false;
    bool infeasible = false;
    std::string error;
    long labels = 0, unlabeled = 0;
    int rounds = 0;
    bool correct = false;
  };
  std::vector<SweepCell> cells;
  for (double tau : tau_grid)
    for (SamplerMode m : modes) {
      SweepCell c;
      c.tau = tau;
      c.mode = m;
      c.trials = trials;
      cells.push_back(c);
    }
  const size_t total = cells.size() * trials;
  std::vector<Outcome> out(total);
  OracleCache cache;
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t k = next++; k < total; k = next++) {
      const SweepCell& c = cells[k / trials];
      const int trial = static_cast<int>(k % trials);
      Rng rng(trial_seed(seed, c.tau, c.mode, trial));
      Outcome& o = out[k];
      try {
        RunResult r = run(inst, c.tau, delta, c.mode, params, rng, &cache);
        o.ok = true;
        o.labels = r.total_labels;
        o.unlabeled = r.total_unlabeled;
        o.rounds = static_cast<int>(r.rounds.size());
        o.correct = r.correct;
      } catch (const Infeasible& e) {
        o.infeasible = true;
        o.error = e.what();
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  };
  jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (size_t ci = 0; ci < cells.size(); ++ci) {
    SweepCell& c = cells[ci];
    double su = 0.0, sr = 0.0;
    int succ = 0, infeasible = 0;
    for (int t = 0; t < trials; ++t) {
      const Outcome& o = out[ci * trials + t];
      if (!o.ok) {
        if (c.error.empty()) c.error = o.error;
        infeasible += o.infeasible;
        continue;
      }
      c.labels.push_back(static_cast<double>(o.labels));
      su += o.unlabeled;
      sr += o.rounds;
      succ += o.correct;
    }
    c.completed = static_cast<int>(c.labels.size());
    c.infeasible = infeasible == trials;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (c.completed == 0) {
      c.mean_labels = c.std_labels = c.mean_unlabeled = c.mean_rounds = nan;
      c.success_rate = c.infeasible ? std::numeric_limits<double>::infinity() : nan;
      continue;
    }
    double sl = 0.0;
    for (double v : c.labels) sl += v;
    c.mean_labels = sl / c.completed;
    double ss = 0.0;
    for (double v : c.labels) ss += (v - c.mean_labels) * (v - c.mean_labels);
    c.std_labels = c.completed > 1 ? std::sqrt(ss / (c.completed - 1)) : nan;
    c.mean_unlabeled = su / c.completed;
    c.mean_rounds = sr / c.completed;
    c.success_rate = static_cast<double>(succ) / trials;
  }
  return cells;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::string s = "tau,mode,trials,mean_labels,std_labels,mean_unlabeled,success_rate,mean_rounds\n";
  for (const auto& c : cells) {
    s += format_double(c.tau) + ',' + mode_name(c.mode) + ',' + std::to_string(c.trials) + ',' +
         format_double(c.mean_labels) + ',' + format_double(c.std_labels) + ',' + format_double(c.mean_unlabeled) +
         ',' + format_double(c.success_rate) + ',' + format_double(c.mean_rounds) + '\n';
  }
  return s;
}

}  // namespace selsamp
