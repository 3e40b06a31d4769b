#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "simopt/ah.hpp"
#include "simopt/kn.hpp"
#include "simopt/objective.hpp"
#include "simopt/space.hpp"
#include "simopt/sr.hpp"

namespace simopt {

struct ObjectiveSpec {
  enum class Kind { synthetic, external };
  Kind kind = Kind::synthetic;
  // synthetic
  std::vector<double> means;
  NoiseModel noise = GaussianNoise{0.0};
  Bounds bounds{0.0, 1.0};
  // external
  std::vector<std::string> command;
  std::size_t workers = 1;
};

enum class SolverKind { kn, sr, ah, baseline_rs };

std::string_view to_string(SolverKind kind) noexcept;

struct SolverSpec {
  SolverKind kind = SolverKind::kn;
  std::string label;
  KnConfig kn;
  SrConfig sr;
  /// SR stop target "optimum": resolved against the synthetic optimum.
  bool sr_target_optimum = false;
  AhConfig ah;
  /// Solver-level evaluation budget; overrides the experiment budget.
  std::optional<std::uint64_t> budget;
};

struct BudgetSpec {
  std::optional<std::uint64_t> max_evals;
  std::optional<double> max_wall_seconds;
};

struct OutputSpec {
  std::filesystem::path dir = "simopt_out";
  bool record_wall_time = false;
};

struct ExperimentConfig {
  SearchSpace space;
  ObjectiveSpec objective;
  std::vector<SolverSpec> solvers;
  BudgetSpec budget;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  /// Fresh replicates drawn for each reported solution after a run.
  std::size_t replicates = 25;
  OutputSpec output;
  Execution exec = Execution::parallel;
};

/// Throws ConfigError on any schema violation.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Accepts an index array [i0, i1, ...] or an object {axis: level, ...}.
Solution parse_solution(const nlohmann::json& j, const SearchSpace& space);

Level parse_level(const nlohmann::json& j);

}  // namespace simopt
