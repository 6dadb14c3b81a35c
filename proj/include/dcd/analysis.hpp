#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dcd/envs.hpp"
#include "dcd/mesh.hpp"
#include "dcd/zooming.hpp"

namespace dcd {

struct OptResult {
  Contract argmax{Vec::Zero(1)};
  double value = 0.0;
  double grid_step = 0.0;  // > 0 when the full space was approximated by a grid
};

/// Exhaustive exact-oracle maximization over a finite candidate set; the full
/// space is approximated by a uniform mesh with the given step (recorded in
/// the result). Ties break toward the lexicographically smallest increments.
OptResult opt_search(const Environment& env, const CandidateSet& set,
                     double fullspace_grid_step = 0.01);

struct PaymentOptResult {
  Vec payments;  // size m+1, payments(0) = 0
  double value = 0.0;
};

/// Brute force over arbitrary (possibly non-monotone) payment vectors on the
/// step-grid of [0,1]^m. Finite-mixture environments only; used to compare
/// the unrestricted optimum against the monotone-contract benchmark.
PaymentOptResult opt_search_payments(const Environment& env, double grid_step);

/// Exact virtual width of a cell from its corner anchors:
/// (V(x+) - P(x-)) - (V(x-) - P(x+)); inventory environments use the
/// two-outcome form p+ * S(p-) - p- * S(p+).
double exact_virtual_width(const Environment& env, const Cell& cell);

struct CellScan {
  double min_utility = 0.0;
  double max_utility = 0.0;
  /// Max utility over grid points inside the bounded simplex (candidates of
  /// the full space); -inf when the grid misses it.
  double max_candidate_utility = 0.0;
};

/// Exact utilities over the (steps+1)^m grid spanning the closed cell.
CellScan scan_cell_utilities(const Environment& env, const Cell& cell,
                             int steps_per_side);

/// Grid supremum of |U(x) - U(y)| over the closed cell: a certified lower
/// bound on the true width, converging as the grid refines. Requires
/// grid_step <= side / 8.
double exact_width(const Environment& env, const Cell& cell, double grid_step);

/// Expected single-round utility of choosing a cell: the average of the
/// anchors' exact utilities (the posted anchor is a fair coin).
double exact_cell_round_utility(const Environment& env, const Anchors& anchors);

struct RegretReport {
  double opt = 0.0;
  double opt_grid_step = 0.0;
  std::int64_t T = 0;
  std::size_t runs = 0;
  std::vector<double> oracle_route;   // per run: T*OPT - sum_t U(x_t)
  std::vector<double> badness_route;  // per run: sum_x n(x) * Delta(x)
  double realized_regret_mean = 0.0;  // Monte-Carlo route, vs realized utility
  double realized_regret_se = 0.0;
  double uhat_mean = 0.0;  // time-averaged cumulative utility
  double uhat_se = 0.0;
};

/// Computes regret against OPT(set) along both exact routes plus the
/// realized Monte-Carlo route. Runs must share T and carry full round logs.
RegretReport regret_report(const std::vector<RunRecord>& records,
                           const Environment& env, const CandidateSet& set,
                           double fullspace_grid_step = 0.01);

struct CensusRow {
  Cell cell;
  bool composite = false;
  double vw = 0.0;
  double width = 0.0;
  double badness = 0.0;                 // sup over contracts in the cell
  double candidate_best_utility = 0.0;  // max U over candidates in the cell
};

struct WidthDimFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> eps;
  std::vector<std::int64_t> counts;  // N_{eps*beta}(X_eps) per eps
};

struct CensusResult {
  std::vector<CensusRow> rows;
  WidthDimFit fit;
  double opt = 0.0;
  std::int64_t feasible_cells = 0;
};

/// Enumerates feasible cells (root, then relevant quadrants, recursively,
/// stopping at atomic cells) to max_depth; tabulates vw, grid width and
/// badness per cell; counts composite cells with vw >= eps*beta overlapping
/// X_eps for each eps and fits the log-log growth slope.
CensusResult cell_census(const Environment& env, const CandidateSet& set,
                         int max_depth, const std::vector<double>& eps_list,
                         double beta, int grid_steps_per_side = 8,
                         std::int64_t max_cells = 1'000'000);

using InstanceGen = std::function<Environment(Rng&)>;

/// Random finite mixture satisfying the FOSD assumption by construction.
Environment random_fosd_mixture(Rng& rng, int max_m = 3, int max_efforts = 4,
                                int max_types = 5);

/// Random task-pricing environment with a random monotone acceptance curve.
Environment random_task_pricing(Rng& rng);

/// Random inventory environment with a random non-increasing demand curve.
Environment random_inventory(Rng& rng);

Cell random_cell(Rng& rng, int m, int max_depth = 4);

struct WidthCheckResult {
  bool pass = true;
  double worst_margin = 0.0;  // min over cells of vw - grid width
  std::int64_t cells_checked = 0;
  std::string counterexample;  // first failing instance + cell, if any
};

/// Samples random instances and random dyadic cells, asserting
/// grid-width <= virtual width + 1e-9 on each.
WidthCheckResult verify_lemma1(const InstanceGen& gen, int trials,
                               int cells_per_trial, int grid_steps_per_side,
                               Rng& rng);

}  // namespace dcd
