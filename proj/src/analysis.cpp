#include "dcd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dcd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return false;
}

}  // namespace

OptResult opt_search(const Environment& env, const CandidateSet& set,
                     double fullspace_grid_step) {
  if (!set.finite()) {
    OptResult out = opt_search(
        env, CandidateSet::uniform_mesh(fullspace_grid_step, set.m()));
    out.grid_step = fullspace_grid_step;
    return out;
  }
  OptResult out;
  bool have = false;
  set.for_each_candidate([&](const Contract& c) {
    const double u = env.exact_utility(c).utility;
    if (!have || u > out.value ||
        (u == out.value && lex_less(c.increments(), out.argmax.increments()))) {
      out.argmax = c;
      out.value = u;
      have = true;
    }
  });
  require(have, "opt_search: empty candidate set");
  return out;
}

PaymentOptResult opt_search_payments(const Environment& env, double grid_step) {
  const auto* fm = env.finite_mixture();
  require(fm != nullptr, "opt_search_payments: finite-mixture environment only");
  const int m = env.m();
  const auto steps = static_cast<std::int64_t>(std::floor(1.0 / grid_step + 1e-9));

  PaymentOptResult out;
  out.payments = Vec::Zero(m + 1);
  out.value = -kInf;

  Vec payments = Vec::Zero(m + 1);
  std::vector<std::int64_t> g(m, 0);
  auto rec = [&](auto&& self, int dim) -> void {
    if (dim == m) {
      double value = 0.0, payment = 0.0;
      for (std::size_t i = 0; i < fm->types.size(); ++i) {
        const auto b =
            breakdown_for_payments(fm->types[i], env.outcomes(), payments);
        const double w = fm->weights(static_cast<Eigen::Index>(i));
        value += w * b.value;
        payment += w * b.payment;
      }
      const double u = value - payment;
      if (u > out.value) {
        out.value = u;
        out.payments = payments;
      }
      return;
    }
    for (std::int64_t v = 0; v <= steps; ++v) {
      payments(dim + 1) = static_cast<double>(v) * grid_step;
      self(self, dim + 1);
    }
  };
  rec(rec, 0);
  return out;
}

double exact_virtual_width(const Environment& env, const Cell& cell) {
  const Contract lo(cell.min_corner());
  const Contract hi(cell.max_corner());
  if (env.is_inventory()) {
    const double p_lo = lo.increment(0), p_hi = hi.increment(0);
    return p_hi * env.sale_probability(p_lo) -
           p_lo * env.sale_probability(p_hi);
  }
  const auto at_lo = env.exact_utility(lo);
  const auto at_hi = env.exact_utility(hi);
  return (at_hi.value - at_lo.payment) - (at_lo.value - at_hi.payment);
}

CellScan scan_cell_utilities(const Environment& env, const Cell& cell,
                             int steps_per_side) {
  require(steps_per_side >= 1, "scan_cell_utilities: steps_per_side >= 1");
  const int m = cell.m();
  const double side = cell.side();
  CellScan scan{kInf, -kInf, -kInf};

  Vec w(m);
  auto rec = [&](auto&& self, int dim) -> void {
    if (dim == m) {
      const double u = env.exact_utility(Contract(w)).utility;
      scan.min_utility = std::min(scan.min_utility, u);
      scan.max_utility = std::max(scan.max_utility, u);
      if (w.sum() <= 1.0 + 1e-12)
        scan.max_candidate_utility = std::max(scan.max_candidate_utility, u);
      return;
    }
    for (int r = 0; r <= steps_per_side; ++r) {
      w(dim) = cell.lo(dim) + side * static_cast<double>(r) /
                                  static_cast<double>(steps_per_side);
      self(self, dim + 1);
    }
  };
  rec(rec, 0);
  return scan;
}

double exact_width(const Environment& env, const Cell& cell, double grid_step) {
  require(grid_step <= cell.side() / 8.0 + 1e-15,
          "exact_width: grid_step must be <= cell side / 8");
  const int steps =
      static_cast<int>(std::ceil(cell.side() / grid_step - 1e-9));
  const CellScan scan = scan_cell_utilities(env, cell, steps);
  return scan.max_utility - scan.min_utility;
}

double exact_cell_round_utility(const Environment& env, const Anchors& anchors) {
  if (anchors.atomic) return env.exact_utility(anchors.minus()).utility;
  return 0.5 * (env.exact_utility(anchors.plus()).utility +
                env.exact_utility(anchors.minus()).utility);
}

RegretReport regret_report(const std::vector<RunRecord>& records,
                           const Environment& env, const CandidateSet& set,
                           double fullspace_grid_step) {
  require(!records.empty(), "regret_report: no runs");
  const std::int64_t T = records.front().T;
  for (const auto& r : records) {
    require(r.T == T, "regret_report: mismatched horizons across runs");
    require(static_cast<std::int64_t>(r.rows.size()) == T,
            "regret_report: runs must carry full round logs");
  }
  const OptResult opt = opt_search(env, set, fullspace_grid_step);

  RegretReport report;
  report.opt = opt.value;
  report.opt_grid_step = opt.grid_step;
  report.T = T;
  report.runs = records.size();

  // exact utilities cached per distinct posted contract
  std::map<std::vector<double>, double> utility_of;
  auto exact_of = [&](const Contract& c) {
    std::vector<double> key(c.increments().data(),
                            c.increments().data() + c.m());
    auto it = utility_of.find(key);
    if (it == utility_of.end()) {
      it = utility_of.emplace(std::move(key), env.exact_utility(c).utility)
               .first;
    }
    return it->second;
  };

  long double realized_sum = 0.0L, realized_sq = 0.0L;
  long double uhat_sum = 0.0L, uhat_sq = 0.0L;
  for (const auto& run : records) {
    // oracle route: T*OPT - sum over rounds of U(x_t)
    long double posted_sum = 0.0L;
    for (const auto& row : run.rows) posted_sum += exact_of(row.posted);
    report.oracle_route.push_back(static_cast<double>(
        static_cast<long double>(T) * opt.value - posted_sum));

    // badness route: sum over distinct contracts of n(x) * Delta(x)
    std::map<std::vector<double>, std::int64_t> pulls;
    for (const auto& row : run.rows) {
      std::vector<double> key(row.posted.increments().data(),
                              row.posted.increments().data() + row.posted.m());
      pulls[std::move(key)] += 1;
    }
    long double badness = 0.0L;
    for (const auto& [key, n] : pulls) {
      badness += static_cast<long double>(n) *
                 (static_cast<long double>(opt.value) - utility_of.at(key));
    }
    report.badness_route.push_back(static_cast<double>(badness));

    const double realized =
        static_cast<double>(T) * opt.value - run.cumulative_utility;
    realized_sum += realized;
    realized_sq += static_cast<long double>(realized) * realized;
    const double uhat = run.cumulative_utility / static_cast<double>(T);
    uhat_sum += uhat;
    uhat_sq += static_cast<long double>(uhat) * uhat;
  }

  const auto n = static_cast<double>(records.size());
  report.realized_regret_mean = static_cast<double>(realized_sum) / n;
  report.uhat_mean = static_cast<double>(uhat_sum) / n;
  if (records.size() > 1) {
    const double var_r = std::max(
        0.0, (static_cast<double>(realized_sq) -
              n * report.realized_regret_mean * report.realized_regret_mean) /
                 (n - 1.0));
    const double var_u =
        std::max(0.0, (static_cast<double>(uhat_sq) -
                       n * report.uhat_mean * report.uhat_mean) /
                          (n - 1.0));
    report.realized_regret_se = std::sqrt(var_r / n);
    report.uhat_se = std::sqrt(var_u / n);
  }
  return report;
}

namespace {

WidthDimFit fit_width_dimension(const std::vector<double>& eps,
                                const std::vector<std::int64_t>& counts) {
  WidthDimFit fit;
  fit.eps = eps;
  fit.counts = counts;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (counts[i] > 0) {
      xs.push_back(std::log(1.0 / eps[i]));
      ys.push_back(std::log(static_cast<double>(counts[i])));
    }
  }
  const std::size_t n = xs.size();
  if (n < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom <= 0) return fit;
  fit.slope = (dn * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / dn;
  const double ss_tot = syy - sy * sy / dn;
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace

CensusResult cell_census(const Environment& env, const CandidateSet& set,
                         int max_depth, const std::vector<double>& eps_list,
                         double beta, int grid_steps_per_side,
                         std::int64_t max_cells) {
  require(beta > 0, "cell_census: beta > 0");
  CensusResult result;
  const OptResult opt = opt_search(env, set);
  result.opt = opt.value;

  std::deque<Cell> frontier;
  const Cell root = Cell::root(set.m());
  require(set.count_in_cell(root).kind != CellCount::Zero,
          "cell_census: empty candidate set");
  frontier.push_back(root);

  while (!frontier.empty()) {
    const Cell cell = frontier.front();
    frontier.pop_front();
    result.feasible_cells += 1;
    require(result.feasible_cells <= max_cells,
            "cell_census: feasible-cell guard exceeded");

    const auto count = set.count_in_cell(cell);
    CensusRow row;
    row.cell = cell;
    if (count.kind == CellCount::One) {
      const double u = env.exact_utility(*count.unique).utility;
      row.composite = false;
      row.badness = opt.value - u;
      row.candidate_best_utility = u;
    } else {
      row.composite = true;
      row.vw = exact_virtual_width(env, cell);
      const CellScan scan = scan_cell_utilities(env, cell, grid_steps_per_side);
      row.width = scan.max_utility - scan.min_utility;
      row.badness = opt.value - scan.min_utility;
      if (set.finite()) {
        // max exact utility over lattice candidates inside the cell
        double best = -kInf;
        set.for_each_candidate([&](const Contract& c) {
          if (cell.contains(c.increments()))
            best = std::max(best, env.exact_utility(c).utility);
        });
        row.candidate_best_utility = best;
      } else {
        row.candidate_best_utility = scan.max_candidate_utility;
      }
      if (cell.depth < max_depth) {
        for (Cell& child : quadrants(cell, max_depth)) {
          if (set.count_in_cell(child).kind != CellCount::Zero)
            frontier.push_back(std::move(child));
        }
      }
    }
    result.rows.push_back(std::move(row));
  }

  std::vector<std::int64_t> counts;
  counts.reserve(eps_list.size());
  for (double eps : eps_list) {
    std::int64_t n = 0;
    for (const auto& row : result.rows) {
      if (row.composite && row.vw >= eps * beta &&
          row.candidate_best_utility >= opt.value - eps)
        ++n;
    }
    counts.push_back(n);
  }
  result.fit = fit_width_dimension(eps_list, counts);
  return result;
}

Environment random_fosd_mixture(Rng& rng, int max_m, int max_efforts,
                                int max_types) {
  const int m = 1 + static_cast<int>(rng.uniform_index(
                        static_cast<std::uint64_t>(max_m)));
  Vec values(m + 1);
  values(0) = 0.0;
  {
    std::vector<double> v(m);
    for (auto& x : v) x = rng.uniform();
    std::sort(v.begin(), v.end());
    for (int i = 0; i < m; ++i) values(i + 1) = v[i];
  }
  const int n_types = 1 + static_cast<int>(rng.uniform_index(
                              static_cast<std::uint64_t>(max_types)));
  FiniteMixtureModel fm;
  std::vector<double> weights(n_types);
  for (auto& w : weights) w = 0.05 + rng.uniform();
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);

  for (int i = 0; i < n_types; ++i) {
    const int extra = 1 + static_cast<int>(rng.uniform_index(
                              static_cast<std::uint64_t>(max_efforts - 1)));
    const int E = 1 + extra;
    // Upper-cumulative rows F(pi|e) for pi = 2..m: columns sorted across
    // efforts (the FOSD chain), then rows sorted descending across outcomes
    // (valid distributions). Row sorting preserves the column order.
    std::vector<std::vector<double>> F(extra, std::vector<double>(m - 1 > 0 ? m - 1 : 0));
    for (int c = 0; c + 1 < m; ++c) {
      std::vector<double> col(extra);
      for (auto& x : col) x = rng.uniform();
      std::sort(col.begin(), col.end());
      for (int e = 0; e < extra; ++e) F[e][c] = col[e];
    }
    for (auto& frow : F) std::sort(frow.begin(), frow.end(), std::greater<>());

    WorkerType t;
    t.costs = Vec::Zero(E);
    {
      std::vector<double> c(extra);
      for (auto& x : c) x = rng.uniform(0.0, 0.8);
      std::sort(c.begin(), c.end());
      for (int e = 0; e < extra; ++e) t.costs(e + 1) = c[e];
    }
    t.production = Mat::Zero(E, m + 1);
    t.production(0, 0) = 1.0;
    for (int e = 0; e < extra; ++e) {
      const int row = e + 1;
      // F(1|e) = 1 always (null outcome unreachable from non-null effort)
      double prev = 1.0;
      for (int pi = 2; pi <= m; ++pi) {
        const double cur = F[e][pi - 2];
        t.production(row, pi - 1) = prev - cur;
        prev = cur;
      }
      t.production(row, m) = prev;
    }
    t.tiebreak = default_tiebreak_order(t);
    fm.types.push_back(std::move(t));
  }
  fm.weights = Vec(n_types);
  for (int i = 0; i < n_types; ++i) fm.weights(i) = weights[i] / wsum;
  // renormalize exactly so the mixture constructor's sum check passes
  fm.weights(n_types - 1) = 1.0 - fm.weights.head(n_types - 1).sum();
  return Environment(OutcomeSpace(std::move(values)), std::move(fm));
}

namespace {

PiecewiseLinear random_monotone_curve(Rng& rng, bool decreasing) {
  const int interior = 1 + static_cast<int>(rng.uniform_index(5));
  std::vector<double> xs = {0.0};
  for (int i = 0; i < interior; ++i) xs.push_back(rng.uniform(0.02, 0.98));
  xs.push_back(1.0);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> ys(xs.size());
  for (auto& y : ys) y = rng.uniform();
  std::sort(ys.begin(), ys.end());
  if (decreasing) std::reverse(ys.begin(), ys.end());
  return PiecewiseLinear(std::move(xs), std::move(ys));
}

}  // namespace

Environment random_task_pricing(Rng& rng) {
  return make_task_pricing(random_monotone_curve(rng, false),
                           rng.uniform(0.5, 1.0));
}

Environment random_inventory(Rng& rng) {
  return make_inventory_env(random_monotone_curve(rng, true));
}

Cell random_cell(Rng& rng, int m, int max_depth) {
  Cell cell;
  cell.depth = static_cast<int>(
      rng.uniform_index(static_cast<std::uint64_t>(max_depth + 1)));
  cell.corner.resize(m);
  for (int i = 0; i < m; ++i) {
    cell.corner[i] = static_cast<std::int64_t>(
        rng.uniform_index(std::uint64_t{1} << cell.depth));
  }
  return cell;
}

WidthCheckResult verify_lemma1(const InstanceGen& gen, int trials,
                               int cells_per_trial, int grid_steps_per_side,
                               Rng& rng) {
  WidthCheckResult result;
  result.worst_margin = kInf;
  for (int trial = 0; trial < trials; ++trial) {
    const Environment env = gen(rng);
    for (int c = 0; c < cells_per_trial; ++c) {
      const Cell cell = random_cell(rng, env.m());
      const double vw = exact_virtual_width(env, cell);
      const CellScan scan = scan_cell_utilities(env, cell, grid_steps_per_side);
      const double width = scan.max_utility - scan.min_utility;
      const double margin = vw - width;
      result.cells_checked += 1;
      result.worst_margin = std::min(result.worst_margin, margin);
      if (width > vw + 1e-9 && result.pass) {
        result.pass = false;
        std::ostringstream os;
        os << "trial " << trial << " env " << env.kind() << " cell "
           << cell.to_string() << ": width " << width << " > vw " << vw;
        result.counterexample = os.str();
      }
    }
  }
  return result;
}

}  // namespace dcd
