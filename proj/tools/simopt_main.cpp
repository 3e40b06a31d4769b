// simopt command line: run experiments, sweep KN's indifference zone, and
// compare two solver configurations.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "simopt/config.hpp"
#include "simopt/errors.hpp"
#include "simopt/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitWorker = 3;

std::vector<double> parse_deltas(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw simopt::ConfigError("bad delta value '" + item + "'");
    }
  }
  return out;
}

void print_tally(const simopt::ExperimentResult& result) {
  for (const auto& t : simopt::tally_verdicts(result.verdicts)) {
    std::cout << t.solver_a << " vs " << t.solver_b << " over " << t.tests << " tests: better "
              << simopt::format_double(t.better) << ", comparable " << simopt::format_double(t.comparable)
              << ", worse " << simopt::format_double(t.worse) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete simulation optimization: KN, stochastic ruler, adaptive hyperbox"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run the configured solvers for every trial");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides master_seed)");

  std::string sweep_config, deltas_csv = "0.10,0.05,0.02", sweep_out;
  auto* sweep = app.add_subcommand("sweep-delta", "KN evaluations to completion as a function of delta");
  sweep->add_option("--config", sweep_config, "Experiment config with a kn solver")->required();
  sweep->add_option("--deltas", deltas_csv, "Comma-separated indifference-zone widths");
  sweep->add_option("--out", sweep_out, "Also write delta_curve.csv into this directory");

  std::string config_a, config_b, compare_out;
  std::size_t tests = 10;
  auto* compare = app.add_subcommand("compare", "Paired t-test comparison of two solver configurations");
  compare->add_option("--config-a", config_a, "First config")->required();
  compare->add_option("--config-b", config_b, "Second config")->required();
  compare->add_option("--tests", tests, "Number of paired tests");
  compare->add_option("--out", compare_out, "Output directory (defaults to config A's output.dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      auto cfg = simopt::load_config(config_path);
      if (*seed_opt) cfg.master_seed = seed;
      if (!out_dir.empty()) cfg.output.dir = out_dir;
      const auto result = simopt::run_experiment(cfg);
      simopt::write_outputs(cfg, result, cfg.output.dir);
      for (std::size_t s = 0; s < result.trials.size(); ++s) {
        std::size_t hits = 0;
        for (const auto& t : result.trials[s]) hits += t.found_optimum.value_or(false) ? 1 : 0;
        std::cout << result.solver_labels[s] << ": " << result.trials[s].size() << " trials";
        if (result.trials[s].front().found_optimum) std::cout << ", optimum found in " << hits;
        std::cout << "\n";
      }
      print_tally(result);
      std::cout << "outputs written to " << cfg.output.dir.string() << "\n";
    } else if (*sweep) {
      const auto cfg = simopt::load_config(sweep_config);
      const auto curve = simopt::emit_delta_curve(cfg, parse_deltas(deltas_csv));
      const auto csv = simopt::delta_curve_csv(curve);
      std::cout << csv;
      if (!sweep_out.empty()) {
        std::filesystem::create_directories(sweep_out);
        std::ofstream(std::filesystem::path(sweep_out) / "delta_curve.csv") << csv;
      }
    } else if (*compare) {
      const auto a = simopt::load_config(config_a);
      const auto b = simopt::load_config(config_b);
      const auto result = simopt::compare_configs(a, b, tests);
      const std::filesystem::path dir = compare_out.empty() ? a.output.dir : std::filesystem::path(compare_out);
      simopt::write_outputs(a, result, dir);
      print_tally(result);
    }
  } catch (const simopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const simopt::WorkerError& e) {
    std::cerr << "worker failure: " << e.what() << "\n";
    return kExitWorker;
  } catch (const simopt::AbortedRun& e) {
    std::cerr << e.what() << "\n";
    try {
      if (e.cause()) std::rethrow_exception(e.cause());
    } catch (const simopt::WorkerError&) {
      return kExitWorker;
    } catch (...) {
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
