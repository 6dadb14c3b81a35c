#include "dcd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dcd {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return a / b + (a % b != 0 && (a ^ b) >= 0 ? 1 : 0);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  return a / b - (a % b != 0 && (a ^ b) < 0 ? 1 : 0);
}

}  // namespace

double Cell::side() const { return std::ldexp(1.0, -depth); }

double Cell::lo(int i) const {
  return std::ldexp(static_cast<double>(corner[i]), -depth);
}

double Cell::hi(int i) const {
  return std::ldexp(static_cast<double>(corner[i] + 1), -depth);
}

Vec Cell::min_corner() const {
  Vec v(m());
  for (int i = 0; i < m(); ++i) v(i) = lo(i);
  return v;
}

Vec Cell::max_corner() const {
  Vec v(m());
  for (int i = 0; i < m(); ++i) v(i) = hi(i);
  return v;
}

std::string Cell::to_string() const {
  std::ostringstream os;
  os << depth << ":(";
  for (int i = 0; i < m(); ++i) {
    if (i) os << ",";
    os << corner[i];
  }
  os << ")";
  return os.str();
}

bool Cell::contains(const Vec& increments) const {
  for (int i = 0; i < m(); ++i) {
    if (increments(i) < lo(i) || increments(i) > hi(i)) return false;
  }
  return true;
}

bool cell_less(const Cell& a, const Cell& b) {
  if (a.depth != b.depth) return a.depth < b.depth;
  return std::lexicographical_compare(a.corner.begin(), a.corner.end(),
                                      b.corner.begin(), b.corner.end());
}

std::vector<Cell> quadrants(const Cell& cell, int depth_cap) {
  if (cell.depth >= depth_cap)
    throw std::runtime_error("quadrants: depth cap exceeded at " +
                             cell.to_string());
  const int m = cell.m();
  std::vector<Cell> out;
  out.reserve(std::size_t{1} << m);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    Cell child{cell.depth + 1, std::vector<std::int64_t>(m)};
    for (int i = 0; i < m; ++i) {
      child.corner[i] = 2 * cell.corner[i] + ((mask >> i) & 1);
    }
    out.push_back(std::move(child));
  }
  return out;
}

CandidateSet CandidateSet::uniform_mesh(double delta, int m) {
  require(m >= 1, "uniform_mesh: m >= 1");
  require(delta > 1e-6 && delta <= 1.0, "uniform_mesh: delta in (1e-6, 1]");
  CandidateSet set;
  set.kind_ = Kind::UniformMesh;
  set.m_ = m;
  set.delta_ = delta;
  std::int64_t num = std::llround(delta * 1e9);
  std::int64_t den = 1'000'000'000;
  const std::int64_t g = std::gcd(num, den);
  set.num_ = num / g;
  set.den_ = den / g;
  set.grid_max_ = set.den_ / set.num_;  // floor(1/delta)
  require(set.grid_max_ >= 1, "uniform_mesh: delta too large");
  return set;
}

CandidateSet CandidateSet::full_space(int m) {
  require(m >= 1, "full_space: m >= 1");
  CandidateSet set;
  set.kind_ = Kind::FullSpace;
  set.m_ = m;
  return set;
}

CandidateSet CandidateSet::explicit_list(std::vector<Contract> contracts) {
  require(!contracts.empty(), "explicit_list: needs at least one contract");
  CandidateSet set;
  set.kind_ = Kind::ExplicitList;
  set.m_ = contracts.front().m();
  for (const auto& c : contracts)
    require(c.m() == set.m_, "explicit_list: mixed dimensions");
  set.contracts_ = std::move(contracts);
  return set;
}

namespace {

// Counts lattice points g with lo[i] <= g[i] <= hi[i] and sum g <= budget,
// stopping as soon as `limit` points are found. Fills `point` along the way
// so the unique candidate can be recovered when the count is exactly one.
std::int64_t count_lattice(const std::vector<std::int64_t>& lo,
                           const std::vector<std::int64_t>& hi,
                           std::int64_t budget, std::size_t dim,
                           std::int64_t limit,
                           std::vector<std::int64_t>& point,
                           std::vector<std::int64_t>* found) {
  if (dim == lo.size()) {
    if (found && found->empty()) *found = point;
    return 1;
  }
  std::int64_t total = 0;
  const std::int64_t top = std::min(hi[dim], budget);
  for (std::int64_t g = lo[dim]; g <= top; ++g) {
    point[dim] = g;
    total += count_lattice(lo, hi, budget - g, dim + 1, limit - total, point,
                           found);
    if (total >= limit) return total;
  }
  return total;
}

}  // namespace

CountResult CandidateSet::count_in_cell(const Cell& cell) const {
  require(cell.m() == m_, "count_in_cell: dimension mismatch");
  if (kind_ == Kind::FullSpace) {
    // Relevant iff the minimum corner lies in the bounded simplex.
    std::int64_t corner_sum = 0;
    for (auto k : cell.corner) corner_sum += k;
    if (corner_sum > (std::int64_t{1} << cell.depth)) return {CellCount::Zero, {}};
    return {CellCount::Many, {}};
  }
  if (kind_ == Kind::ExplicitList) {
    CountResult out;
    std::int64_t n = 0;
    for (const auto& c : contracts_) {
      if (cell.contains(c.increments())) {
        if (++n == 1) out.unique = c;
        if (n >= 2) break;
      }
    }
    out.kind = n == 0 ? CellCount::Zero : (n == 1 ? CellCount::One : CellCount::Many);
    if (out.kind != CellCount::One) out.unique.reset();
    return out;
  }
  // Uniform mesh: integer bounds per dimension. g * num / den lies in
  // [k/2^j, (k+1)/2^j] iff k*den <= g*num*2^j <= (k+1)*den.
  const std::int64_t scale = num_ << cell.depth;
  std::vector<std::int64_t> lo(m_), hi(m_);
  for (int i = 0; i < m_; ++i) {
    lo[i] = std::max<std::int64_t>(0, ceil_div(cell.corner[i] * den_, scale));
    hi[i] = std::min(grid_max_,
                     floor_div((cell.corner[i] + 1) * den_, scale));
    if (lo[i] > hi[i]) return {CellCount::Zero, {}};
  }
  std::vector<std::int64_t> point(m_), found;
  const std::int64_t n =
      count_lattice(lo, hi, grid_max_, 0, 2, point, &found);
  CountResult out;
  out.kind = n == 0 ? CellCount::Zero : (n == 1 ? CellCount::One : CellCount::Many);
  if (out.kind == CellCount::One) {
    Vec w(m_);
    for (int i = 0; i < m_; ++i) w(i) = static_cast<double>(found[i]) * delta_;
    out.unique = Contract(std::move(w));
  }
  return out;
}

void CandidateSet::for_each_candidate(
    const std::function<void(const Contract&)>& fn) const {
  if (kind_ == Kind::FullSpace)
    throw std::invalid_argument("for_each_candidate: infinite candidate set");
  if (kind_ == Kind::ExplicitList) {
    for (const auto& c : contracts_) fn(c);
    return;
  }
  // Lexicographic DFS over grid indices with sum <= grid_max.
  std::vector<std::int64_t> g(m_, 0);
  Vec w(m_);
  auto rec = [&](auto&& self, int dim, std::int64_t budget) -> void {
    if (dim == m_) {
      for (int i = 0; i < m_; ++i) w(i) = static_cast<double>(g[i]) * delta_;
      fn(Contract(w));
      return;
    }
    for (std::int64_t v = 0; v <= budget; ++v) {
      g[dim] = v;
      self(self, dim + 1, budget - v);
    }
    g[dim] = 0;
  };
  rec(rec, 0, grid_max_);
}

std::vector<Contract> CandidateSet::enumerate() const {
  std::vector<Contract> out;
  for_each_candidate([&](const Contract& c) { out.push_back(c); });
  return out;
}

std::size_t CandidateSet::size() const {
  if (kind_ == Kind::ExplicitList) return contracts_.size();
  std::size_t n = 0;
  for_each_candidate([&](const Contract&) { ++n; });
  return n;
}

Anchors anchors_of(const CandidateSet& set, const Cell& cell, int depth_cap) {
  const auto count = set.count_in_cell(cell);
  if (count.kind == CellCount::Zero)
    throw std::invalid_argument("anchors_of: irrelevant cell " + cell.to_string());
  if (count.kind == CellCount::One)
    return {true, *count.unique, *count.unique};
  if (set.kind() == CandidateSet::Kind::FullSpace && cell.depth >= depth_cap) {
    Contract anchor(cell.min_corner());
    return {true, anchor, anchor};
  }
  return {false, Contract(cell.min_corner()), Contract(cell.max_corner())};
}

double discretization_error(const Environment& env, double fine_step,
                            double coarse_delta) {
  require(fine_step <= coarse_delta / 10.0 + 1e-15,
          "discretization_error: fine_step must be <= coarse delta / 10");
  auto opt_over = [&](const CandidateSet& set) {
    double best = -std::numeric_limits<double>::infinity();
    set.for_each_candidate([&](const Contract& c) {
      best = std::max(best, env.exact_utility(c).utility);
    });
    return best;
  };
  const double fine = opt_over(CandidateSet::uniform_mesh(fine_step, env.m()));
  const double coarse =
      opt_over(CandidateSet::uniform_mesh(coarse_delta, env.m()));
  return fine - coarse;
}

}  // namespace dcd
