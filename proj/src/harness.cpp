#include "simopt/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "simopt/ah.hpp"
#include "simopt/errors.hpp"
#include "simopt/kernels.hpp"
#include "simopt/kn.hpp"
#include "simopt/sr.hpp"
#include "simopt/worker_client.hpp"

namespace simopt {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::shared_ptr<const Objective> make_objective(const ObjectiveSpec& spec) {
  if (spec.kind == ObjectiveSpec::Kind::synthetic) {
    return std::make_shared<SyntheticObjective>(spec.means, spec.noise, spec.bounds);
  }
  return std::make_shared<ExternalObjective>(spec.command, spec.workers);
}

BaselineResult baseline_random_search(ObjectiveHandle& handle, std::uint64_t budget, const SeedPolicy& seeds) {
  if (budget == 0) throw ConfigError("baseline-rs: budget must be >= 1");
  const auto start = handle.evaluations();
  Rng rng(seeds.child(Stream::rs_sample).master_seed);
  ReplicationLedger replications(seeds.child(Stream::objective));
  BaselineResult best;
  bool have = false;
  for (std::uint64_t i = 0; i < budget; ++i) {
    const Solution x = handle.space().random_solution(rng);
    handle.set_stage(static_cast<std::int64_t>(i));
    const auto obs = handle.evaluate(x, replications.next_seed(handle.space().flat_index(x)));
    if (!have || obs.value > best.best_value) {
      best.best = x;
      best.best_value = obs.value;
      have = true;
    }
  }
  best.evaluations = handle.evaluations() - start;
  return best;
}

SeedPolicy trial_policy(std::uint64_t master_seed, std::size_t trial) {
  return SeedPolicy{master_seed}.child(Stream::trial).child(static_cast<std::uint64_t>(trial));
}

namespace {

std::optional<std::uint64_t> solver_budget(const ExperimentConfig& config, const SolverSpec& spec) {
  if (spec.budget) return spec.budget;
  return config.budget.max_evals;
}

std::string record_line(std::size_t trial, const std::string& solver, const char* phase, const Observation& o,
                        bool wall) {
  nlohmann::ordered_json j;
  j["trial"] = trial;
  j["solver"] = solver;
  j["phase"] = phase;
  j["eval_index"] = o.eval_index;
  j["solution"] = o.solution_id;
  j["seed"] = o.seed;
  j["value"] = o.value;
  j["stage"] = o.stage;
  if (wall) j["wall_nanos"] = o.wall_nanos;
  return j.dump();
}

std::vector<double> replicate(ObjectiveHandle& handle, const Solution& x, std::size_t n, const SeedPolicy& seeds,
                              Execution exec) {
  const SolutionId id = handle.space().flat_index(x);
  std::vector<EvalRequest> requests;
  for (std::size_t j = 0; j < n; ++j) requests.push_back({x, derive_seed(seeds, id, j)});
  std::vector<double> values;
  for (const auto& o : handle.evaluate_batch(requests, exec)) values.push_back(o.value);
  return values;
}

}  // namespace

TrialOutcome run_trial(const ExperimentConfig& config, std::shared_ptr<const Objective> objective,
                       std::size_t solver_index, std::size_t trial) {
  const SolverSpec& spec = config.solvers.at(solver_index);
  const SeedPolicy seeds = trial_policy(config.master_seed, trial);
  const auto budget = solver_budget(config, spec);
  const auto* synthetic = dynamic_cast<const SyntheticObjective*>(objective.get());

  TrialOutcome out;
  out.trial = trial;
  out.solver = spec.label;
  out.kind = spec.kind;

  ObjectiveHandle handle(objective, config.space);
  const char* phase = "search";
  const bool wall = config.output.record_wall_time;
  handle.set_sink([&](const Observation& o) { out.records.push_back(record_line(trial, spec.label, phase, o, wall)); });
  handle.set_eval_cap(budget);

  const auto started = std::chrono::steady_clock::now();
  switch (spec.kind) {
    case SolverKind::kn: {
      KnConfig kn = spec.kn;
      if (!kn.budget || (budget && *budget < *kn.budget)) kn.budget = budget;
      kn.exec = config.exec;
      const auto res = run_kn(handle, kn, seeds);
      out.answer = config.space.solution_at(res.winner ? *res.winner : best_survivor(res).id);
      out.summary.stages = res.iterations;
      out.kn_survivors = res.survivors.size();
      break;
    }
    case SolverKind::sr: {
      SrConfig sr = spec.sr;
      if (!sr.stop.max_evals || (budget && *budget < *sr.stop.max_evals)) sr.stop.max_evals = budget;
      if (!sr.stop.max_wall_seconds) sr.stop.max_wall_seconds = config.budget.max_wall_seconds;
      if (spec.sr_target_optimum) sr.stop.target = config.space.solution_at(synthetic->optimum());
      const auto res = run_sr(handle, sr, seeds);
      out.answer = res.final_solution;
      out.best_observed = res.best_observed;
      out.initial = res.initial;
      out.summary.stages = res.stages_count;
      break;
    }
    case SolverKind::ah: {
      AhConfig ah = spec.ah;
      ah.budget = *budget;
      ah.exec = config.exec;
      const auto res = run_ah(handle, ah, seeds);
      out.answer = res.answer;
      out.initial = res.initial;
      out.summary.stages = res.iterations.size();
      SolutionId best_id = res.visited.begin()->first;
      for (const auto& [id, v] : res.visited) {
        if (v.mean() > res.visited.at(best_id).mean()) best_id = id;
      }
      out.best_observed = config.space.solution_at(best_id);
      break;
    }
    case SolverKind::baseline_rs: {
      const auto res = baseline_random_search(handle, *budget, seeds);
      out.answer = res.best;
      out.best_observed = res.best;
      out.summary.stages = res.evaluations;
      break;
    }
  }
  out.summary.evaluations = handle.evaluations();
  out.summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  // Post-run re-evaluation; not charged to the solver.
  handle.set_eval_cap(std::nullopt);
  handle.set_stage(-1);
  phase = "reeval";
  const SeedPolicy reeval = seeds.child(Stream::reeval);
  out.answer_replicates = replicate(handle, out.answer, config.replicates, reeval, config.exec);
  out.summary.final_value = mean(out.answer_replicates);
  if (out.initial) {
    const auto init = replicate(handle, *out.initial, config.replicates, reeval, config.exec);
    out.summary.initial_value = mean(init);
    out.summary.improvement = out.summary.final_value - *out.summary.initial_value;
  }
  if (synthetic) {
    const SolutionId id = config.space.flat_index(out.answer);
    out.answer_true_mean = synthetic->true_mean(id);
    out.found_optimum = synthetic->true_mean(id) == synthetic->true_mean(synthetic->optimum());
  }
  return out;
}

std::vector<VerdictRow> pairwise_verdicts(const std::vector<TrialOutcome>& a, const std::vector<TrialOutcome>& b) {
  std::vector<VerdictRow> rows;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t t = 0; t < n; ++t) {
    VerdictRow row;
    row.test = t;
    row.solver_a = a[t].solver;
    row.solver_b = b[t].solver;
    row.mean_a = mean(a[t].answer_replicates);
    row.mean_b = mean(b[t].answer_replicates);
    row.ttest = t_test_two_sample(a[t].answer_replicates, b[t].answer_replicates);
    row.verdict = verdict(row.ttest);
    rows.push_back(row);
  }
  return rows;
}

std::vector<VerdictTally> tally_verdicts(const std::vector<VerdictRow>& rows) {
  std::vector<VerdictTally> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.solver_a, r.solver_b);
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) out.push_back({r.solver_a, r.solver_b, 0, 0, 0, 0});
    auto& t = out[it->second];
    t.tests += 1;
    (r.verdict == Verdict::better ? t.better : r.verdict == Verdict::worse ? t.worse : t.comparable) += 1.0;
  }
  for (auto& t : out) {
    t.better /= static_cast<double>(t.tests);
    t.comparable /= static_cast<double>(t.tests);
    t.worse /= static_cast<double>(t.tests);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto objective = make_objective(config.objective);
  ExperimentResult result;
  for (const auto& s : config.solvers) result.solver_labels.push_back(s.label);

  using PerTrial = std::vector<TrialOutcome>;
  const auto per_trial = kernels::run_trials<PerTrial>(config.trials, config.exec, [&](std::size_t t) {
    PerTrial row;
    for (std::size_t s = 0; s < config.solvers.size(); ++s) row.push_back(run_trial(config, objective, s, t));
    return row;
  });

  result.trials.assign(config.solvers.size(), {});
  for (const auto& row : per_trial) {
    for (std::size_t s = 0; s < row.size(); ++s) result.trials[s].push_back(row[s]);
  }
  for (std::size_t s = 1; s < config.solvers.size(); ++s) {
    auto rows = pairwise_verdicts(result.trials[0], result.trials[s]);
    result.verdicts.insert(result.verdicts.end(), rows.begin(), rows.end());
  }
  return result;
}

ExperimentResult compare_configs(const ExperimentConfig& a, const ExperimentConfig& b, std::size_t tests) {
  if (tests == 0) throw ConfigError("compare needs at least one test");
  ExperimentConfig ca = a;
  ExperimentConfig cb = b;
  ca.trials = cb.trials = tests;
  ca.solvers.resize(1);
  cb.solvers.resize(1);
  if (ca.solvers[0].label == cb.solvers[0].label) {
    ca.solvers[0].label += "-a";
    cb.solvers[0].label += "-b";
  }
  const auto ra = run_experiment(ca);
  const auto rb = run_experiment(cb);
  ExperimentResult out;
  out.solver_labels = {ca.solvers[0].label, cb.solvers[0].label};
  out.trials = {ra.trials[0], rb.trials[0]};
  out.verdicts = pairwise_verdicts(out.trials[0], out.trials[1]);
  return out;
}

namespace {

std::string opt_csv(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace

void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const bool wall = config.output.record_wall_time;
  const std::size_t n_trials = result.trials.empty() ? 0 : result.trials[0].size();

  std::ostringstream runs, trials, summary, verdicts, table;
  trials << "trial,solver,answer,best_observed,initial,initial_value,final_value,improvement,stages,evaluations,"
            "true_mean,found_optimum,kn_survivors"
         << (wall ? ",wall_seconds" : "") << "\n";
  const auto& space = config.space;
  for (std::size_t t = 0; t < n_trials; ++t) {
    for (const auto& per_solver : result.trials) {
      const auto& o = per_solver[t];
      for (const auto& line : o.records) runs << line << "\n";
      trials << o.trial << ',' << o.solver << ',' << space.flat_index(o.answer) << ','
             << (o.best_observed ? std::to_string(space.flat_index(*o.best_observed)) : "") << ','
             << (o.initial ? std::to_string(space.flat_index(*o.initial)) : "") << ','
             << opt_csv(o.summary.initial_value) << ',' << format_double(o.summary.final_value) << ','
             << opt_csv(o.summary.improvement) << ',' << o.summary.stages << ',' << o.summary.evaluations << ','
             << opt_csv(o.answer_true_mean) << ','
             << (o.found_optimum ? (*o.found_optimum ? "1" : "0") : "") << ','
             << (o.kn_survivors ? std::to_string(*o.kn_survivors) : "");
      if (wall) trials << ',' << format_double(o.summary.wall_seconds);
      trials << "\n";
    }
  }

  summary << "solver,trials,mean_improvement,sd_improvement,mean_final,sd_final,mean_stages,mean_evaluations,"
             "sd_evaluations,optimum_rate\n";
  for (std::size_t s = 0; s < result.trials.size(); ++s) {
    const auto& per = result.trials[s];
    if (per.empty()) continue;
    std::vector<TrialSummary> sums;
    std::size_t hits = 0, known = 0;
    for (const auto& o : per) {
      sums.push_back(o.summary);
      if (o.found_optimum) {
        ++known;
        hits += *o.found_optimum ? 1 : 0;
      }
    }
    const auto agg = summarize_trials(sums);
    const bool has_improvement = per.front().summary.improvement.has_value();
    summary << result.solver_labels[s] << ',' << agg.trials << ','
            << (has_improvement ? format_double(agg.mean_improvement) : "") << ','
            << (has_improvement ? format_double(agg.sd_improvement) : "") << ',' << format_double(agg.mean_final)
            << ',' << format_double(agg.sd_final) << ',' << format_double(agg.mean_stages) << ','
            << format_double(agg.mean_evaluations) << ',' << format_double(agg.sd_evaluations) << ','
            << (known ? format_double(static_cast<double>(hits) / static_cast<double>(known)) : "") << "\n";
  }

  verdicts << "test,solver_a,solver_b,mean_a,mean_b,t,df,p,verdict\n";
  for (const auto& r : result.verdicts) {
    verdicts << r.test << ',' << r.solver_a << ',' << r.solver_b << ',' << format_double(r.mean_a) << ','
             << format_double(r.mean_b) << ',' << format_double(r.ttest.t_stat) << ',' << format_double(r.ttest.df)
             << ',' << format_double(r.ttest.p_value) << ',' << to_string(r.verdict) << "\n";
  }
  table << "solver_a,solver_b,tests,better,comparable,worse\n";
  for (const auto& t : tally_verdicts(result.verdicts)) {
    table << t.solver_a << ',' << t.solver_b << ',' << t.tests << ',' << format_double(t.better) << ','
          << format_double(t.comparable) << ',' << format_double(t.worse) << "\n";
  }

  write_file(dir / "runs.jsonl", runs.str());
  write_file(dir / "trials.csv", trials.str());
  write_file(dir / "summary.csv", summary.str());
  write_file(dir / "verdicts.csv", verdicts.str());
  write_file(dir / "verdict_table.csv", table.str());
}

std::vector<DeltaPoint> emit_delta_curve(const ExperimentConfig& config, std::vector<double> deltas) {
  if (config.solvers.empty() || config.solvers[0].kind != SolverKind::kn) {
    throw ConfigError("sweep-delta needs a kn solver");
  }
  if (deltas.empty()) throw ConfigError("sweep-delta needs at least one delta");
  for (double d : deltas) {
    if (!(d > 0.0)) throw ConfigError("every delta must be > 0");
  }
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  const auto objective = make_objective(config.objective);

  std::vector<DeltaPoint> out;
  for (double delta : deltas) {
    KnConfig kn = config.solvers[0].kn;
    kn.delta = delta;
    kn.budget.reset();
    kn.exec = config.exec;
    const auto evals = kernels::run_trials<double>(config.trials, config.exec, [&](std::size_t t) {
      ObjectiveHandle handle(objective, config.space);
      return static_cast<double>(run_kn(handle, kn, trial_policy(config.master_seed, t)).evaluations_used);
    });
    out.push_back({delta, mean(evals), sample_sd(evals), evals.size()});
  }
  return out;
}

std::string delta_curve_csv(const std::vector<DeltaPoint>& points) {
  std::ostringstream os;
  os << "delta,mean_evaluations,sd_evaluations,trials\n";
  for (const auto& p : points) {
    os << format_double(p.delta) << ',' << format_double(p.mean_evaluations) << ','
       << format_double(p.sd_evaluations) << ',' << p.trials << "\n";
  }
  return os.str();
}

}  // namespace simopt
