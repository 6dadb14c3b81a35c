#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcd/contracts.hpp"
#include "dcd/envs.hpp"

namespace dcd {

/// Closed dyadic cube in increment space: side 2^-depth, minimum corner at
/// corner[i] * 2^-depth. The root cell is [0,1]^m.
struct Cell {
  int depth = 0;
  std::vector<std::int64_t> corner;  // size m, each in [0, 2^depth)

  static Cell root(int m) { return Cell{0, std::vector<std::int64_t>(m, 0)}; }

  int m() const { return static_cast<int>(corner.size()); }
  double side() const;
  double lo(int i) const;
  double hi(int i) const;
  Vec min_corner() const;
  Vec max_corner() const;
  /// CLI/census notation "j:(k1,...,km)".
  std::string to_string() const;
  /// Closed-cube membership of an increment vector.
  bool contains(const Vec& increments) const;

  bool operator==(const Cell& other) const = default;
};

/// Ordering used for deterministic tie-breaks: depth first, then
/// lexicographic minimum corner.
bool cell_less(const Cell& a, const Cell& b);

/// The 2^m dyadic children of half the side whose union is the cell; each
/// has the cell's center as a corner. Throws once the depth cap is reached.
std::vector<Cell> quadrants(const Cell& cell, int depth_cap);

enum class CellCount { Zero, One, Many };

struct CountResult {
  CellCount kind = CellCount::Zero;
  std::optional<Contract> unique;  // present iff kind == One
};

/// Candidate contracts: a uniform mesh, the full space of bounded monotone
/// contracts, or an explicit list. All variants answer count-in-cell queries.
class CandidateSet {
 public:
  enum class Kind { UniformMesh, FullSpace, ExplicitList };

  /// Uniform mesh with granularity delta: increment vectors on the delta-grid
  /// whose payments stay within [0,1], i.e. grid indices summing to at most
  /// floor(1/delta). delta is interpreted as the nearest rational with
  /// denominator 1e9 so that boundary classification is exact integer
  /// arithmetic, never floating comparison.
  static CandidateSet uniform_mesh(double delta, int m);

  /// All bounded monotone contracts (increment sum <= 1).
  static CandidateSet full_space(int m);

  static CandidateSet explicit_list(std::vector<Contract> contracts);

  Kind kind() const { return kind_; }
  int m() const { return m_; }
  bool finite() const { return kind_ != Kind::FullSpace; }

  /// Number of candidate contracts inside the closed cell, collapsed to
  /// zero/one/many. Cells sharing a boundary both count boundary candidates.
  CountResult count_in_cell(const Cell& cell) const;

  /// Visits every candidate in canonical (lexicographic) order. Finite only.
  void for_each_candidate(const std::function<void(const Contract&)>& fn) const;

  std::vector<Contract> enumerate() const;
  std::size_t size() const;

  // Uniform-mesh details.
  double delta() const { return delta_; }
  std::int64_t grid_max() const { return grid_max_; }

 private:
  CandidateSet() = default;

  Kind kind_ = Kind::FullSpace;
  int m_ = 0;
  // uniform mesh: step = num/den (reduced), grid_max = floor(den/num)
  double delta_ = 0.0;
  std::int64_t num_ = 0, den_ = 0, grid_max_ = 0;
  std::vector<Contract> contracts_;  // explicit list
};

/// The contracts the algorithm may post from a cell: the minimal and maximal
/// corners of a composite cell, or the unique candidate of an atomic one.
/// Full-space cells at the depth cap are treated as atomic with the minimal
/// corner as their anchor (it always lies in the bounded simplex).
struct Anchors {
  bool atomic = false;
  Contract lo;  // x^-; the sole anchor when atomic
  Contract hi;  // x^+; equals lo when atomic

  const Contract& minus() const { return lo; }
  const Contract& plus() const { return hi; }
};

Anchors anchors_of(const CandidateSet& set, const Cell& cell, int depth_cap);

/// OPT(fine mesh) - OPT(coarse mesh), both by exhaustive search against the
/// exact oracle. Requires fine_step <= coarse_delta / 10.
double discretization_error(const Environment& env, double fine_step,
                            double coarse_delta);

}  // namespace dcd
