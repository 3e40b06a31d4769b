#include "simopt/space.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

#include "simopt/errors.hpp"

namespace simopt {

std::string to_string(const Level& level) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          std::ostringstream os;
          os << v;
          return os.str();
        }
      },
      level);
}

SearchSpace::SearchSpace(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw ConfigError("search space needs at least one axis");
  std::set<std::string> names;
  for (const auto& axis : axes_) {
    if (axis.levels.empty()) throw ConfigError("axis '" + axis.name + "' has no levels");
    if (!names.insert(axis.name).second) throw ConfigError("duplicate axis name '" + axis.name + "'");
    for (std::size_t i = 0; i < axis.levels.size(); ++i) {
      for (std::size_t j = i + 1; j < axis.levels.size(); ++j) {
        if (axis.levels[i] == axis.levels[j]) {
          throw ConfigError("axis '" + axis.name + "' repeats level " + to_string(axis.levels[i]));
        }
      }
    }
  }
  strides_.assign(axes_.size(), 1);
  std::uint64_t card = 1;
  for (std::size_t d = axes_.size(); d-- > 0;) {
    strides_[d] = card;
    const std::uint64_t a = axes_[d].arity();
    if (card > std::numeric_limits<std::uint64_t>::max() / a) {
      throw ConfigError("search space cardinality overflows 64 bits");
    }
    card *= a;
  }
  cardinality_ = card;
}

SearchSpace SearchSpace::from_arities(const std::vector<std::size_t>& arities) {
  std::vector<Axis> axes;
  axes.reserve(arities.size());
  for (std::size_t d = 0; d < arities.size(); ++d) {
    Axis axis{"x" + std::to_string(d), {}};
    for (std::size_t i = 0; i < arities[d]; ++i) axis.levels.emplace_back(static_cast<std::int64_t>(i));
    axes.push_back(std::move(axis));
  }
  return SearchSpace(std::move(axes));
}

bool SearchSpace::contains(const Solution& x) const noexcept {
  if (x.indices.size() != axes_.size()) return false;
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    if (x.indices[d] >= axes_[d].arity()) return false;
  }
  return true;
}

void SearchSpace::validate(const Solution& x) const {
  if (x.indices.size() != axes_.size()) {
    throw InvalidSolutionError("solution has " + std::to_string(x.indices.size()) +
                               " coordinates, space has " + std::to_string(axes_.size()));
  }
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    if (x.indices[d] >= axes_[d].arity()) {
      throw InvalidSolutionError("index " + std::to_string(x.indices[d]) + " out of range for axis '" +
                                 axes_[d].name + "'");
    }
  }
}

SolutionId SearchSpace::flat_index(const Solution& x) const {
  validate(x);
  SolutionId id = 0;
  for (std::size_t d = 0; d < axes_.size(); ++d) id += x.indices[d] * strides_[d];
  return id;
}

Solution SearchSpace::solution_at(SolutionId id) const {
  if (id >= cardinality_) {
    throw std::out_of_range("solution id " + std::to_string(id) + " outside [0, " +
                            std::to_string(cardinality_) + ")");
  }
  Solution x;
  x.indices.resize(axes_.size());
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    x.indices[d] = static_cast<std::size_t>(id / strides_[d]);
    id %= strides_[d];
  }
  return x;
}

Solution SearchSpace::random_solution(Rng& rng) const {
  return solution_at(rng.below(cardinality_));
}

std::vector<Solution> neighborhood_n1(const SearchSpace& space, const Solution& x) {
  const SolutionId self = space.flat_index(x);
  if (space.cardinality() < 2) throw EmptyNeighborhoodError("N1 is empty on a single-point space");
  std::vector<Solution> out;
  out.reserve(space.cardinality() - 1);
  for (SolutionId id = 0; id < space.cardinality(); ++id) {
    if (id != self) out.push_back(space.solution_at(id));
  }
  return out;
}

std::vector<std::size_t> axis_neighbors(std::size_t index, std::size_t arity) {
  std::vector<std::size_t> out{index, (index + 1) % arity, (index + arity - 1) % arity};
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Solution> neighborhood_n2(const SearchSpace& space, const Solution& x) {
  space.validate(x);
  const std::size_t n = space.dimension();
  std::vector<std::vector<std::size_t>> per_axis(n);
  for (std::size_t d = 0; d < n; ++d) per_axis[d] = axis_neighbors(x.indices[d], space.arity(d));

  // Odometer over the per-axis sets; each set is sorted, so output is in
  // flat-index order and duplicates cannot arise.
  std::vector<Solution> out;
  std::vector<std::size_t> pos(n, 0);
  Solution y;
  y.indices.resize(n);
  while (true) {
    for (std::size_t d = 0; d < n; ++d) y.indices[d] = per_axis[d][pos[d]];
    if (y != x) out.push_back(y);
    std::size_t d = n;
    while (d > 0) {
      --d;
      if (++pos[d] < per_axis[d].size()) break;
      pos[d] = 0;
      if (d == 0) return out;
    }
  }
}

std::vector<Solution> neighborhood(const SearchSpace& space, const Solution& x, NeighborhoodKind kind) {
  return kind == NeighborhoodKind::n1 ? neighborhood_n1(space, x) : neighborhood_n2(space, x);
}

Solution sample_neighbor(const SearchSpace& space, const Solution& x, NeighborhoodKind kind, Rng& rng) {
  if (kind == NeighborhoodKind::n1) {
    const SolutionId self = space.flat_index(x);
    if (space.cardinality() < 2) throw EmptyNeighborhoodError("N1 is empty on a single-point space");
    SolutionId pick = rng.below(space.cardinality() - 1);
    if (pick >= self) ++pick;
    return space.solution_at(pick);
  }
  auto hood = neighborhood_n2(space, x);
  if (hood.empty()) throw EmptyNeighborhoodError("N2 is empty: every axis has arity 1");
  return hood[rng.below(hood.size())];
}

}  // namespace simopt
