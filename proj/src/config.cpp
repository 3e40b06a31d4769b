#include "simopt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "simopt/errors.hpp"

namespace simopt {

using nlohmann::json;

std::string_view to_string(SolverKind kind) noexcept {
  switch (kind) {
    case SolverKind::kn: return "kn";
    case SolverKind::sr: return "sr";
    case SolverKind::ah: return "ah";
    case SolverKind::baseline_rs: return "baseline-rs";
  }
  return "kn";
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::optional<std::uint64_t> opt_u64(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number_unsigned() && !(j[key].is_number_integer() && j[key].get<std::int64_t>() >= 0)) {
    throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
  }
  return j[key].get<std::uint64_t>();
}

Bounds parse_bounds(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(what) + " must be [a, b]");
  }
  Bounds b{j[0].get<double>(), j[1].get<double>()};
  if (!(b.lower < b.upper)) throw ConfigError(std::string(what) + " needs a < b");
  return b;
}

SearchSpace parse_space(const json& j) {
  if (!j.is_object() || !j.contains("axes") || !j["axes"].is_array()) throw ConfigError("space.axes must be an array");
  std::vector<Axis> axes;
  for (const auto& a : j["axes"]) {
    if (!a.contains("name") || !a["name"].is_string()) throw ConfigError("every axis needs a string name");
    if (!a.contains("levels") || !a["levels"].is_array()) throw ConfigError("axis levels must be an array");
    Axis axis{a["name"].get<std::string>(), {}};
    for (const auto& l : a["levels"]) axis.levels.push_back(parse_level(l));
    axes.push_back(std::move(axis));
  }
  return SearchSpace(std::move(axes));
}

std::vector<double> peak_means(const json& j, const SearchSpace& space) {
  const auto center = parse_solution(j.at("center"), space);
  const double top = get_or(j, "top", 0.9);
  const double decay = get_or(j, "decay", 0.05);
  const double floor = get_or(j, "floor", 0.0);
  std::vector<double> means(space.cardinality());
  for (SolutionId id = 0; id < space.cardinality(); ++id) {
    const auto x = space.solution_at(id);
    double dist = 0.0;
    for (std::size_t d = 0; d < space.dimension(); ++d) {
      dist += std::abs(static_cast<double>(x.indices[d]) - static_cast<double>(center.indices[d]));
    }
    means[id] = std::max(floor, top - decay * dist);
  }
  return means;
}

ObjectiveSpec parse_objective(const json& j, const SearchSpace& space) {
  ObjectiveSpec spec;
  const auto type = get_or<std::string>(j, "type", "synthetic");
  if (type == "synthetic") {
    spec.kind = ObjectiveSpec::Kind::synthetic;
    if (j.contains("bounds")) spec.bounds = parse_bounds(j["bounds"], "objective.bounds");
    if (j.contains("means")) {
      spec.means = j["means"].get<std::vector<double>>();
    } else if (j.contains("peak")) {
      spec.means = peak_means(j["peak"], space);
    } else {
      throw ConfigError("synthetic objective needs 'means' or 'peak'");
    }
    if (spec.means.size() != space.cardinality()) {
      throw ConfigError("synthetic objective has " + std::to_string(spec.means.size()) + " means for " +
                        std::to_string(space.cardinality()) + " solutions");
    }
    const json noise = j.value("noise", json::object());
    const auto kind = get_or<std::string>(noise, "kind", "gaussian");
    if (kind == "gaussian") {
      spec.noise = GaussianNoise{get_or(noise, "sigma", 0.0)};
    } else if (kind == "bernoulli") {
      spec.noise = BernoulliAccuracy{get_or<std::uint32_t>(noise, "n_val", 100)};
    } else {
      throw ConfigError("unknown noise kind '" + kind + "'");
    }
    SyntheticObjective check(spec.means, spec.noise, spec.bounds);
  } else if (type == "external") {
    spec.kind = ObjectiveSpec::Kind::external;
    if (!j.contains("command") || !j["command"].is_array() || j["command"].empty()) {
      throw ConfigError("external objective needs a non-empty 'command' array");
    }
    spec.command = j["command"].get<std::vector<std::string>>();
    spec.workers = get_or<std::size_t>(j, "workers", 1);
    if (spec.workers == 0) throw ConfigError("external objective needs workers >= 1");
  } else {
    throw ConfigError("unknown objective type '" + type + "'");
  }
  return spec;
}

KnConfig parse_kn(const json& j) {
  KnConfig kn;
  kn.r0 = get_or<std::size_t>(j, "r0", kn.r0);
  kn.delta = get_or(j, "delta", kn.delta);
  kn.p = get_or(j, "p", kn.p);
  kn.budget = opt_u64(j, "budget");
  validate(kn);
  return kn;
}

MkSchedule parse_mk(const json& j) {
  if (j.is_null()) return mk_schedule_default;
  const auto kind = get_or<std::string>(j, "kind", "default");
  if (kind == "default") return mk_schedule_default;
  if (kind == "constant") {
    const auto v = get_or<std::uint64_t>(j, "value", 1);
    if (v == 0) throw ConfigError("mk.value must be >= 1");
    return [v](std::uint64_t) { return v; };
  }
  throw ConfigError("unknown mk kind '" + kind + "'");
}

SolverSpec parse_solver(const json& j, const SearchSpace& space) {
  if (!j.is_object() || !j.contains("solver")) throw ConfigError("solver entry needs a 'solver' key");
  SolverSpec s;
  const auto name = j["solver"].get<std::string>();
  s.budget = opt_u64(j, "budget");
  if (s.budget && *s.budget == 0) throw ConfigError("solver budget must be > 0");
  if (name == "kn") {
    s.kind = SolverKind::kn;
    s.kn = parse_kn(j);
  } else if (name == "sr") {
    s.kind = SolverKind::sr;
    if (j.contains("ruler")) s.sr.ruler = parse_bounds(j["ruler"], "sr.ruler");
    s.sr.alpha = get_or(j, "alpha", 1.0);
    const auto hood = get_or<std::string>(j, "neighborhood", "n2");
    if (hood == "n1") {
      s.sr.neighborhood = NeighborhoodKind::n1;
    } else if (hood == "n2") {
      s.sr.neighborhood = NeighborhoodKind::n2;
    } else {
      throw ConfigError("sr.neighborhood must be 'n1' or 'n2'");
    }
    s.sr.mk = parse_mk(j.value("mk", json()));
    if (j.contains("initial") && !(j["initial"].is_string() && j["initial"] == "random")) {
      s.sr.initial = parse_solution(j["initial"], space);
    }
    const json stop = j.value("stop", json::object());
    if (stop.contains("target")) {
      if (stop["target"].is_string() && stop["target"] == "optimum") {
        s.sr_target_optimum = true;
      } else {
        s.sr.stop.target = parse_solution(stop["target"], space);
      }
    }
    s.sr.stop.max_evals = opt_u64(stop, "max_evals");
    if (stop.contains("max_wall_seconds")) s.sr.stop.max_wall_seconds = stop["max_wall_seconds"].get<double>();
    if (!(s.sr.alpha > 0.0 && s.sr.alpha <= 1.0)) throw ConfigError("sr.alpha must lie in (0, 1]");
  } else if (name == "ah") {
    s.kind = SolverKind::ah;
    s.ah.m = get_or<std::size_t>(j, "m", 3);
    if (j.contains("initial") && !(j["initial"].is_string() && j["initial"] == "random")) {
      s.ah.initial = parse_solution(j["initial"], space);
    }
    s.ah.cleanup_kn = get_or(j, "cleanup_kn", false);
    if (j.contains("cleanup")) s.ah.cleanup = parse_kn(j["cleanup"]);
    s.ah.cleanup_budget = get_or<std::uint64_t>(j, "cleanup_budget", 0);
  } else if (name == "baseline-rs") {
    s.kind = SolverKind::baseline_rs;
  } else {
    throw ConfigError("unknown solver '" + name + "'");
  }
  s.label = get_or<std::string>(j, "label", std::string(to_string(s.kind)));
  return s;
}

}  // namespace

Level parse_level(const json& j) {
  if (j.is_number_integer()) return Level{j.get<std::int64_t>()};
  if (j.is_number_float()) return Level{j.get<double>()};
  if (j.is_string()) return Level{j.get<std::string>()};
  throw ConfigError("axis levels must be numbers or strings, got " + j.dump());
}

Solution parse_solution(const json& j, const SearchSpace& space) {
  Solution x;
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError("solution indices must be >= 0");
      x.indices.push_back(v.get<std::size_t>());
    }
  } else if (j.is_object()) {
    x.indices.resize(space.dimension());
    if (j.size() != space.dimension()) throw ConfigError("solution object must name every axis");
    for (std::size_t d = 0; d < space.dimension(); ++d) {
      const auto& axis = space.axes()[d];
      if (!j.contains(axis.name)) throw ConfigError("solution is missing axis '" + axis.name + "'");
      const Level want = parse_level(j[axis.name]);
      auto it = std::find(axis.levels.begin(), axis.levels.end(), want);
      if (it == axis.levels.end()) {
        throw ConfigError("level " + j[axis.name].dump() + " not on axis '" + axis.name + "'");
      }
      x.indices[d] = static_cast<std::size_t>(it - axis.levels.begin());
    }
  } else {
    throw ConfigError("solution must be an index array or an axis->level object");
  }
  try {
    space.validate(x);
  } catch (const InvalidSolutionError& e) {
    throw ConfigError(e.what());
  }
  return x;
}

ExperimentConfig parse_config(const json& doc) {
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig cfg;
    cfg.space = parse_space(doc.at("space"));
    cfg.objective = parse_objective(doc.at("objective"), cfg.space);

    if (doc.contains("solvers")) {
      for (const auto& s : doc["solvers"]) cfg.solvers.push_back(parse_solver(s, cfg.space));
    } else if (doc.contains("solver")) {
      cfg.solvers.push_back(parse_solver(doc["solver"], cfg.space));
    }
    if (cfg.solvers.empty()) throw ConfigError("config needs 'solver' or a non-empty 'solvers' array");
    std::set<std::string> labels;
    for (const auto& s : cfg.solvers) {
      if (!labels.insert(s.label).second) throw ConfigError("duplicate solver label '" + s.label + "'");
    }

    if (doc.contains("budget")) {
      const auto& b = doc["budget"];
      if (b.is_number()) {
        cfg.budget.max_evals = opt_u64(doc, "budget");
      } else {
        cfg.budget.max_evals = opt_u64(b, "max_evals");
        if (b.contains("max_wall_seconds")) cfg.budget.max_wall_seconds = b["max_wall_seconds"].get<double>();
      }
      if (cfg.budget.max_evals && *cfg.budget.max_evals == 0) throw ConfigError("budget must be > 0");
      if (cfg.budget.max_wall_seconds && !(*cfg.budget.max_wall_seconds > 0.0)) {
        throw ConfigError("budget.max_wall_seconds must be > 0");
      }
    }
    cfg.trials = get_or<std::size_t>(doc, "trials", 1);
    if (cfg.trials == 0) throw ConfigError("trials must be >= 1");
    cfg.master_seed = get_or<std::uint64_t>(doc, "master_seed", 0);
    cfg.replicates = get_or<std::size_t>(doc, "replicates", 25);
    if (cfg.replicates < 2) throw ConfigError("replicates must be >= 2 for t-tests");
    if (doc.contains("output")) {
      const auto& o = doc["output"];
      cfg.output.dir = get_or<std::string>(o, "dir", cfg.output.dir.string());
      cfg.output.record_wall_time = get_or(o, "record_wall_time", false);
    }
    const auto exec = get_or<std::string>(doc, "execution", "parallel");
    if (exec == "serial") {
      cfg.exec = Execution::serial;
    } else if (exec == "parallel") {
      cfg.exec = Execution::parallel;
    } else {
      throw ConfigError("execution must be 'serial' or 'parallel'");
    }

    for (const auto& s : cfg.solvers) {
      if (s.sr_target_optimum && cfg.objective.kind != ObjectiveSpec::Kind::synthetic) {
        throw ConfigError("sr stop target 'optimum' needs a synthetic objective");
      }
      const bool budgeted = s.budget || cfg.budget.max_evals;
      if ((s.kind == SolverKind::ah || s.kind == SolverKind::baseline_rs) && !budgeted) {
        throw ConfigError("solver '" + s.label + "' needs an evaluation budget");
      }
      if (s.kind == SolverKind::sr && !budgeted && !s.sr.stop.max_evals && !s.sr.stop.target &&
          !s.sr_target_optimum && !s.sr.stop.max_wall_seconds && !cfg.budget.max_wall_seconds) {
        throw ConfigError("solver '" + s.label + "' has no stopping criterion");
      }
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidSolutionError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

}  // namespace simopt
