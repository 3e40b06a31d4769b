#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simopt/config.hpp"
#include "simopt/objective.hpp"
#include "simopt/stats.hpp"

namespace simopt {

std::shared_ptr<const Objective> make_objective(const ObjectiveSpec& spec);

struct BaselineResult {
  Solution best;
  double best_value = 0.0;
  std::uint64_t evaluations = 0;
};

/// `budget` uniform draws (with replacement), one evaluation each; returns
/// the draw with the highest single observation (first one on ties).
BaselineResult baseline_random_search(ObjectiveHandle& handle, std::uint64_t budget, const SeedPolicy& seeds);

/// Seed policy for trial `trial` of an experiment with `master_seed`.
SeedPolicy trial_policy(std::uint64_t master_seed, std::size_t trial);

struct TrialOutcome {
  std::size_t trial = 0;
  std::string solver;
  SolverKind kind = SolverKind::kn;
  /// The solver's nominal answer.
  Solution answer;
  std::optional<Solution> best_observed;
  std::optional<Solution> initial;
  /// Fresh replicates of the answer drawn after the run.
  std::vector<double> answer_replicates;
  TrialSummary summary;
  std::optional<double> answer_true_mean;
  std::optional<bool> found_optimum;
  std::optional<std::size_t> kn_survivors;
  /// RunRecord JSONL lines for this trial and solver.
  std::vector<std::string> records;
};

struct VerdictRow {
  std::size_t test = 0;
  std::string solver_a;
  std::string solver_b;
  double mean_a = 0.0;
  double mean_b = 0.0;
  TTestResult ttest;
  Verdict verdict = Verdict::comparable;
};

struct VerdictTally {
  std::string solver_a;
  std::string solver_b;
  std::size_t tests = 0;
  double better = 0.0;
  double comparable = 0.0;
  double worse = 0.0;
};

struct ExperimentResult {
  std::vector<std::string> solver_labels;
  /// trials[s][t] for solver s, trial t.
  std::vector<std::vector<TrialOutcome>> trials;
  std::vector<VerdictRow> verdicts;
};

/// Runs one trial of solver `solver_index`.
TrialOutcome run_trial(const ExperimentConfig& config, std::shared_ptr<const Objective> objective,
                       std::size_t solver_index, std::size_t trial);

/// All trials of all solvers, plus t-test verdicts of solver 0 against each
/// other solver on every trial.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::vector<VerdictRow> pairwise_verdicts(const std::vector<TrialOutcome>& a, const std::vector<TrialOutcome>& b);
std::vector<VerdictTally> tally_verdicts(const std::vector<VerdictRow>& rows);

/// runs.jsonl, trials.csv, summary.csv, verdicts.csv, verdict_table.csv.
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                   const std::filesystem::path& dir);

/// First solver of each config, `tests` paired trials, verdicts of A vs B.
ExperimentResult compare_configs(const ExperimentConfig& a, const ExperimentConfig& b, std::size_t tests);

struct DeltaPoint {
  double delta = 0.0;
  double mean_evaluations = 0.0;
  double sd_evaluations = 0.0;
  std::size_t trials = 0;
};

/// KN run to completion at each delta; rows sorted by delta descending.
std::vector<DeltaPoint> emit_delta_curve(const ExperimentConfig& config, std::vector<double> deltas);
std::string delta_curve_csv(const std::vector<DeltaPoint>& points);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace simopt
