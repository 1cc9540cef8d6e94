#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "selsamp/errors.hpp"
#include "selsamp/sampler.hpp"

using namespace selsamp;

namespace {

void check_accounting(const RunResult& r, double tau) {
  long u = 0, l = 0;
  for (const auto& lg : r.rounds) {
    CHECK(lg.unlabeled_seen == static_cast<long>(tau));
    CHECK(lg.labels_requested <= lg.unlabeled_seen);
    u += lg.unlabeled_seen;
    l += lg.labels_requested;
  }
  CHECK(r.total_unlabeled == u);
  CHECK(r.total_labels == l);
  CHECK(r.total_unlabeled == static_cast<long>(r.rounds.size()) * static_cast<long>(tau));
  CHECK(r.total_labels <= r.total_unlabeled);
}

SolverParams small_solver() {
  SolverParams p;
  p.sga.iters = 20000;
  p.sga.rescale_samples = 20000;
  return p;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("naive mode queries every point") {
  const Instance b = benchmark_instance();
  for (unsigned seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const RunResult r = run(b, 4e4, 0.05, SamplerMode::naive, SolverParams{}, rng);
    CHECK(r.total_labels == r.total_unlabeled);
    check_accounting(r, 4e4);
  }
}

TEST_CASE("accounting and round count in oracle and learned modes") {
  const Instance b = benchmark_instance();
  const int cap = static_cast<int>(std::ceil(std::log2(4.0 / gap_and_best(b).gap)));
  CHECK(cap == 6);
  for (auto mode : {SamplerMode::oracle, SamplerMode::learned}) {
    OracleCache cache;
    for (unsigned seed = 0; seed < 4; ++seed) {
      Rng rng(seed);
      const RunResult r = run(b, 1e5, 0.05, mode, small_solver(), rng, &cache);
      check_accounting(r, 1e5);
      CHECK(r.total_labels < r.total_unlabeled);
      if (r.correct) CHECK(static_cast<int>(r.rounds.size()) <= cap);
      for (size_t l = 0; l < r.rounds.size(); ++l) {
        CHECK(r.rounds[l].round == static_cast<int>(l) + 1);
        CHECK(r.rounds[l].eps == std::ldexp(1.0, -static_cast<int>(l) - 1));
        if (mode == SamplerMode::learned && !r.rounds[l].design_saturated)
          CHECK(r.rounds[l].rule_certificate.has_value());
      }
    }
  }
}

TEST_CASE("best arm survives and the active set shrinks by gap") {
  const Instance b = benchmark_instance();
  const BestArm best = gap_and_best(b);
  OracleCache cache;
  int survival_failures = 0, correct = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    Rng rng(trial_seed(77, 4e4, SamplerMode::oracle, t));
    const RunResult r = run(b, 4e4, 0.05, SamplerMode::oracle, SolverParams{}, rng, &cache);
    correct += r.correct;
    bool survived = true;
    for (size_t l = 0; l < r.rounds.size(); ++l) {
      const auto& act = r.rounds[l].active_arms;
      if (std::find(act.begin(), act.end(), best.index) == act.end()) {
        survived = false;
        break;
      }
      // round l+1 survived into round l+2
      if (l + 1 < r.rounds.size()) {
        const double bound = 4.0 * std::ldexp(1.0, -static_cast<int>(l) - 2);
        for (int z : r.rounds[l + 1].active_arms)
          CHECK((b.arms[best.index] - b.arms[z]).dot(b.theta_star) <= bound);
      }
    }
    survival_failures += !survived;
  }
  const double se = std::sqrt(0.05 * 0.95 / trials);
  CHECK(survival_failures <= trials * (0.05 + 3.0 * se));
  CHECK(correct >= trials * (0.95 - 3.0 * se));
}

TEST_CASE("noiseless naive runs always identify the best arm") {
  Instance b = benchmark_instance();
  b.noise_sigma = 0.0;
  for (unsigned seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    CHECK(run(b, 1e4, 0.05, SamplerMode::naive, SolverParams{}, rng).correct);
  }
}

TEST_CASE("learned mode below the feasible budget") {
  const Instance b = benchmark_instance();
  Rng rng(1);
  try {
    run(b, 100.0, 0.05, SamplerMode::learned, small_solver(), rng);
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    CHECK(e.required > 100.0);
    CHECK(std::string(e.what()).find("tau") != std::string::npos);
  }
  const auto cells = label_complexity_sweep(b, {100.0}, 0.05, {SamplerMode::learned, SamplerMode::oracle}, 3, 1,
                                            small_solver());
  for (const auto& c : cells) {
    CHECK(c.infeasible);
    CHECK(c.completed == 0);
    CHECK(!c.error.empty());
  }
  CHECK_THROWS_AS(run(b, 0.5, 0.05, SamplerMode::naive, SolverParams{}, rng), InvalidInput);
  CHECK_THROWS_AS(run(b, 1e4, 1.0, SamplerMode::naive, SolverParams{}, rng), InvalidInput);
}

TEST_CASE("sweeps are deterministic and independent of jobs") {
  const Instance b = benchmark_instance();
  const std::vector<double> grid{4e4, 1e5};
  const std::vector<SamplerMode> modes{SamplerMode::naive, SamplerMode::oracle, SamplerMode::learned};
  const auto a = sweep_csv(label_complexity_sweep(b, grid, 0.05, modes, 3, 9, small_solver(), 1));
  const auto c = sweep_csv(label_complexity_sweep(b, grid, 0.05, modes, 3, 9, small_solver(), 1));
  const auto d = sweep_csv(label_complexity_sweep(b, grid, 0.05, modes, 3, 9, small_solver(), 3));
  CHECK(a == c);
  CHECK(a == d);
  const auto e = sweep_csv(label_complexity_sweep(b, grid, 0.05, modes, 3, 10, small_solver(), 1));
  CHECK(a != e);
}

TEST_CASE("oracle labels fall as tau grows") {
  const Instance b = benchmark_instance();
  const std::vector<double> grid{4e4, 8e4, 1.6e5, 3.2e5};
  const auto cells = label_complexity_sweep(b, grid, 0.05, {SamplerMode::oracle}, 20, 3, SolverParams{});
  int inversions = 0;
  for (size_t i = 1; i < cells.size(); ++i) {
    const double se = std::hypot(cells[i].std_labels, cells[i - 1].std_labels) / std::sqrt(20.0);
    if (cells[i].mean_labels > cells[i - 1].mean_labels) {
      ++inversions;
      CHECK(cells[i].mean_labels - cells[i - 1].mean_labels <= se);
    }
  }
  CHECK(inversions <= 1);
}

TEST_CASE("trial seeds differ across cells") {
  std::set<std::uint64_t> seen;
  for (double tau : {4e4, 1e5})
    for (auto m : {SamplerMode::naive, SamplerMode::oracle, SamplerMode::learned})
      for (int t = 0; t < 50; ++t) seen.insert(trial_seed(7, tau, m, t));
  CHECK(seen.size() == 300);
  CHECK(trial_seed(7, 4e4, SamplerMode::naive, 0) == trial_seed(7, 4e4, SamplerMode::naive, 0));
}

TEST_CASE("csv formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(4e5) == "4e+05");
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  SweepCell c;
  c.tau = 1e5;
  c.mode = SamplerMode::oracle;
  c.trials = 2;
  c.mean_labels = 10.5;
  c.success_rate = NAN;
  const std::string s = sweep_csv({c});
  CHECK(s == "tau,mode,trials,mean_labels,std_labels,mean_unlabeled,success_rate,mean_rounds\n"
             "1e+05,oracle,2,10.5,0,0,nan,0\n");
  CHECK(parse_mode("learned") == SamplerMode::learned);
  CHECK_THROWS_AS(parse_mode("greedy"), InvalidInput);
}

}  // TEST_SUITE
