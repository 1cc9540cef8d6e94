#include "selsamp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "selsamp/errors.hpp"

namespace selsamp {

namespace {

void check_simplex(const std::vector<double>& p, const char* what) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw InvalidInput(std::string(what) + ": negative or non-finite entry");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12)
    throw InvalidInput(std::string(what) + ": entries must sum to 1");
}

}  // namespace

void Instance::validate() const {
  const int d = dim();
  if (d < 1) throw InvalidInput("instance: theta_star is empty");
  if (arms.empty()) throw InvalidInput("instance: no arms");
  if (stream_points.empty()) throw InvalidInput("instance: empty stream support");
  if (stream_points.size() != stream_probs.size()) throw InvalidInput("instance: stream_points/stream_probs length mismatch");
  for (const auto& z : arms)
    if (z.size() != d) throw InvalidInput("instance: arm dimension mismatch");
  for (const auto& x : stream_points)
    if (x.size() != d) throw InvalidInput("instance: stream point dimension mismatch");
  check_simplex(stream_probs, "instance.stream_probs");
  if (!(noise_sigma >= 0.0)) throw InvalidInput("instance: noise_sigma must be >= 0");
  if (!(bound_B > 0.0)) throw InvalidInput("instance: bound_B must be > 0");
  for (const auto& x : stream_points)
    if (std::abs(x.dot(theta_star)) > bound_B * (1.0 + 1e-12))
      throw InvalidInput("instance: |<x, theta*>| exceeds bound_B");
  if (noise == LabelNoise::rademacher && bound_B > 1.0 + 1e-12)
    throw InvalidInput("instance: rademacher labels need |<x, theta*>| <= 1");
}

void ClassificationInstance::validate() const {
  const size_t n = domain_points.size();
  if (n == 0) throw InvalidInput("classification: empty domain");
  if (hypotheses.empty()) throw InvalidInput("classification: no hypotheses");
  if (eta.size() != n || pi_probs.size() != n || nu_probs.size() != n)
    throw InvalidInput("classification: eta/pi/nu length mismatch");
  for (const auto& h : hypotheses) {
    if (h.size() != n) throw InvalidInput("classification: hypothesis length mismatch");
    for (int v : h)
      if (v != 1 && v != -1) throw InvalidInput("classification: labels must be +1 or -1");
  }
  for (double e : eta)
    if (!(e >= 0.0 && e <= 1.0)) throw InvalidInput("classification: eta outside [0, 1]");
  check_simplex(pi_probs, "classification.pi_probs");
  check_simplex(nu_probs, "classification.nu_probs");
}

BestArm gap_and_best(const Instance& inst) {
  std::vector<int> all(inst.arms.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return gap_and_best(inst, all);
}

BestArm gap_and_best(const Instance& inst, const std::vector<int>& active) {
  if (active.empty()) throw InvalidInput("gap_and_best: no arms");
  if (inst.theta_star.lpNorm<Eigen::Infinity>() == 0.0)
    throw DegenerateInstance("gap_and_best: theta* = 0, every arm ties");
  std::vector<double> val;
  for (int a : active) val.push_back(inst.arms[a].dot(inst.theta_star));
  size_t best = std::max_element(val.begin(), val.end()) - val.begin();
  double gap = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < val.size(); ++i)
    if (i != best) gap = std::min(gap, val[best] - val[i]);
  double scale = 1.0 + std::abs(val[best]);
  if (gap <= 1e-12 * scale) throw DegenerateInstance("gap_and_best: tie for the best arm");
  return {active[best], gap};
}

Instance benchmark_instance() {
  const double w = 0.3;
  const int n = 30;
  Instance inst;
  inst.arms = {Vec::Unit(2, 0), Vec::Unit(2, 1), Vec(2)};
  inst.arms[2] << std::cos(w), std::sin(w);
  std::vector<double> raw(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double a = 2.0 * i * std::numbers::pi / n;
    Vec x(2);
    x << std::cos(a), std::sin(a);
    inst.stream_points.push_back(x);
    raw[i] = std::cos(a) * std::cos(a);
    total += raw[i];
  }
  for (double& r : raw) r /= total;
  inst.stream_probs = raw;
  inst.theta_star = 2.0 * Vec::Unit(2, 0);
  inst.noise_sigma = 1.0;
  inst.bound_B = 2.0;
  return inst;
}

Instance two_point_instance() {
  Instance inst;
  inst.arms = {Vec::Unit(2, 0), Vec::Unit(2, 1)};
  inst.stream_points = inst.arms;
  inst.stream_probs = {0.5, 0.5};
  inst.theta_star = Vec::Unit(2, 0);
  inst.noise_sigma = 1.0;
  inst.bound_B = 1.0;
  return inst;
}

StreamSampler::StreamSampler(const std::vector<double>& probs) {
  cdf_.resize(probs.size());
  double s = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) cdf_[i] = (s += probs[i]);
}

int StreamSampler::draw(Rng& rng) const {
  double u = std::uniform_real_distribution<double>(0.0, cdf_.back())(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  int i = static_cast<int>(it - cdf_.begin());
  return std::min(i, static_cast<int>(cdf_.size()) - 1);
}

int sample_stream_index(const Instance& inst, Rng& rng) {
  return StreamSampler(inst.stream_probs).draw(rng);
}

Vec sample_stream(const Instance& inst, Rng& rng) {
  return inst.stream_points[sample_stream_index(inst, rng)];
}

double sample_label(const Instance& inst, const Vec& x, Rng& rng) {
  double m = x.dot(inst.theta_star);
  if (inst.noise == LabelNoise::rademacher) {
    double p = 0.5 * (1.0 + m);
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p ? 1.0 : -1.0;
  }
  if (inst.noise_sigma == 0.0) return m;
  return m + inst.noise_sigma * std::normal_distribution<double>(0.0, 1.0)(rng);
}

double classification_risk(const ClassificationInstance& ci, int h) {
  double r = 0.0;
  for (size_t x = 0; x < ci.eta.size(); ++x) {
    if (ci.hypotheses[h][x] == 1)
      r += ci.pi_probs[x] * (1.0 - ci.eta[x]);
    else
      r += ci.pi_probs[x] * ci.eta[x];
  }
  return r;
}

BanditReduction classification_to_bandit(const ClassificationInstance& ci) {
  ci.validate();
  const int n = static_cast<int>(ci.domain_points.size());
  BanditReduction out;
  Instance& inst = out.instance;
  for (int x = 0; x < n; ++x) inst.stream_points.push_back(Vec::Unit(n, x));
  inst.stream_probs = ci.nu_probs;
  inst.theta_star = Vec(n);
  double c = 0.0;
  for (int x = 0; x < n; ++x) {
    inst.theta_star(x) = 2.0 * ci.eta[x] - 1.0;
    c += ci.pi_probs[x] * ci.eta[x];
  }
  for (const auto& h : ci.hypotheses) {
    Vec z = Vec::Zero(n);
    for (int x = 0; x < n; ++x)
      if (h[x] == 1) z(x) = ci.pi_probs[x];
    inst.arms.push_back(z);
  }
  inst.noise_sigma = 1.0;
  inst.bound_B = 1.0;
  inst.noise = LabelNoise::rademacher;
  out.risk_offset = c;
  return out;
}

ClassificationInstance threshold_instance(int n, const std::vector<double>& eta,
                                          const std::vector<double>& pi,
                                          const std::vector<double>& nu) {
  ClassificationInstance ci;
  for (int i = 0; i < n; ++i) ci.domain_points.push_back(Vec::Constant(1, n > 1 ? double(i) / (n - 1) : 0.0));
  // cut t = 0..n: h(x_i) = +1 iff i >= t
  for (int t = 0; t <= n; ++t) {
    std::vector<int> h(n);
    for (int i = 0; i < n; ++i) h[i] = i >= t ? 1 : -1;
    ci.hypotheses.push_back(h);
  }
  ci.eta = eta;
  ci.pi_probs = pi;
  ci.nu_probs = nu;
  ci.validate();
  return ci;
}

namespace {

using nlohmann::json;

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec json_vec(const json& a, int d, const char* what) {
  if (!a.is_array() || static_cast<int>(a.size()) != d)
    throw InvalidInput(std::string("instance json: ") + what + " must be an array of length dim");
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = a[i].get<double>();
  return v;
}

}  // namespace

std::string instance_to_json(const Instance& inst) {
  json j;
  j["dim"] = inst.dim();
  j["arms"] = json::array();
  for (const auto& z : inst.arms) j["arms"].push_back(vec_json(z));
  j["stream_points"] = json::array();
  for (const auto& x : inst.stream_points) j["stream_points"].push_back(vec_json(x));
  j["stream_probs"] = inst.stream_probs;
  j["theta_star"] = vec_json(inst.theta_star);
  j["noise_sigma"] = inst.noise_sigma;
  j["bound_B"] = inst.bound_B;
  if (inst.noise == LabelNoise::rademacher) j["label_noise"] = "rademacher";
  return j.dump();
}

Instance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("instance json: ") + e.what());
  }
  static const char* keys[] = {"dim", "arms", "stream_points", "stream_probs",
                               "theta_star", "noise_sigma", "bound_B", "label_noise"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(std::begin(keys), std::end(keys), [&](const char* k) { return it.key() == k; }) == std::end(keys))
      throw InvalidInput("instance json: unknown key '" + it.key() + "'");
  }
  try {
    Instance inst;
    int d = j.at("dim").get<int>();
    if (d < 1) throw InvalidInput("instance json: dim must be >= 1");
    for (const auto& a : j.at("arms")) inst.arms.push_back(json_vec(a, d, "arms[i]"));
    for (const auto& a : j.at("stream_points")) inst.stream_points.push_back(json_vec(a, d, "stream_points[i]"));
    inst.stream_probs = j.at("stream_probs").get<std::vector<double>>();
    inst.theta_star = json_vec(j.at("theta_star"), d, "theta_star");
    inst.noise_sigma = j.at("noise_sigma").get<double>();
    inst.bound_B = j.at("bound_B").get<double>();
    if (j.contains("label_noise")) {
      std::string s = j["label_noise"].get<std::string>();
      if (s == "rademacher") inst.noise = LabelNoise::rademacher;
      else if (s != "gaussian") throw InvalidInput("instance json: label_noise must be gaussian or rademacher");
    }
    inst.validate();
    return inst;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("instance json: ") + e.what());
  }
}

}  // namespace selsamp
