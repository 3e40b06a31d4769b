#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "simopt/rng.hpp"

namespace simopt {

/// A level value; opaque to solvers, carried for the external worker.
using Level = std::variant<std::int64_t, double, std::string>;

std::string to_string(const Level& level);

struct Axis {
  std::string name;
  std::vector<Level> levels;

  std::size_t arity() const noexcept { return levels.size(); }
};

/// Flat (mixed-radix) solution identifier, axis 0 most significant.
using SolutionId = std::uint64_t;

struct Solution {
  std::vector<std::size_t> indices;

  friend bool operator==(const Solution&, const Solution&) = default;
  friend auto operator<=>(const Solution&, const Solution&) = default;
};

enum class NeighborhoodKind { n1, n2 };

/// Cartesian product of ordered finite axes.
class SearchSpace {
 public:
  SearchSpace() = default;
  /// Throws ConfigError on empty axes, duplicate levels or names, or a
  /// cardinality that overflows 64 bits.
  explicit SearchSpace(std::vector<Axis> axes);

  /// Convenience for tests and synthetic problems: axes named x0, x1, ...
  /// with integer levels 0..arity-1.
  static SearchSpace from_arities(const std::vector<std::size_t>& arities);

  const std::vector<Axis>& axes() const noexcept { return axes_; }
  std::size_t dimension() const noexcept { return axes_.size(); }
  std::uint64_t cardinality() const noexcept { return cardinality_; }
  std::size_t arity(std::size_t axis) const { return axes_.at(axis).arity(); }

  bool contains(const Solution& x) const noexcept;
  void validate(const Solution& x) const;

  SolutionId flat_index(const Solution& x) const;
  Solution solution_at(SolutionId id) const;

  Solution random_solution(Rng& rng) const;

 private:
  std::vector<Axis> axes_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t cardinality_ = 0;
};

/// Every solution except x, in flat-index order.
std::vector<Solution> neighborhood_n1(const SearchSpace& space, const Solution& x);

/// Cartesian product of per-axis {i-1, i, i+1} with wraparound at both
/// ends, deduplicated, minus x itself. Sorted by flat index.
std::vector<Solution> neighborhood_n2(const SearchSpace& space, const Solution& x);

std::vector<Solution> neighborhood(const SearchSpace& space, const Solution& x,
                                   NeighborhoodKind kind);

/// Uniform draw from N(x). For n1 this avoids enumerating the space.
/// Throws EmptyNeighborhoodError when N(x) is empty.
Solution sample_neighbor(const SearchSpace& space, const Solution& x,
                         NeighborhoodKind kind, Rng& rng);

/// Distinct per-axis neighbor indices of `index` on an axis of `arity`,
/// including `index` itself, ascending.
std::vector<std::size_t> axis_neighbors(std::size_t index, std::size_t arity);

}  // namespace simopt
