#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "selsamp/cli.hpp"
#include "selsamp/errors.hpp"

using namespace selsamp;

int main(int argc, char** argv) {
  CLI::App app{"Selective sampling for best-arm identification: sweeps, designs and trade-off curves"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out;
  double tau = 0.0;

  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sc->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { seed = s; seed_set = true; },
                                           "RNG seed (overrides the config)");
    sc->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sc->add_option("--out", out, "output directory (overrides the config)");
  };
  auto* sweep = app.add_subcommand("sweep", "label-complexity sweep over the tau grid");
  auto* dump = app.add_subcommand("dump-design", "oracle and learned selection probabilities per stream point");
  auto* trade = app.add_subcommand("tradeoff", "lower and upper label curves over unlabeled budgets");
  auto* classify = app.add_subcommand("classify-demo", "threshold classification through the bandit reduction");
  for (auto* sc : {sweep, dump, trade, classify}) add_common(sc);
  dump->add_option("--tau", tau, "unlabeled budget per round (overrides design_tau)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::config_error;
  }

  return cli::guarded(
      [&]() {
        std::string text = "{}";
        if (!config_path.empty()) {
          std::ifstream f(config_path);
          std::stringstream ss;
          ss << f.rdbuf();
          text = ss.str();
        }
        cli::ExperimentConfig cfg = cli::parse_config(text);
        if (seed_set) cfg.seed = seed;
        if (!out.empty()) cfg.output_dir = out;
        if (tau > 0.0) cfg.design_tau = tau;
        if (*sweep) return cli::cmd_sweep(cfg, jobs, std::cerr);
        if (*dump) return cli::cmd_dump_design(cfg, std::cerr);
        if (*trade) return cli::cmd_tradeoff(cfg, std::cerr);
        return cli::cmd_classify_demo(cfg, jobs, std::cerr);
      },
      std::cerr);
}
