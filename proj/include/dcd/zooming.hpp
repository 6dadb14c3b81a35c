#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dcd/envs.hpp"
#include "dcd/mesh.hpp"
#include "dcd/rng.hpp"

namespace dcd {

/// Per-cell running statistics. n counts every round the cell was chosen;
/// the anchor tallies split those rounds by which anchor was posted (atomic
/// cells use only the `minus` slot).
struct CellStats {
  struct AnchorTally {
    std::int64_t n = 0;
    double sum_value = 0.0;
    double sum_payment = 0.0;
    std::int64_t nonnull = 0;  // rounds with a non-null outcome
  };

  std::int64_t n = 0;
  double sum_utility = 0.0;
  AnchorTally plus, minus;

  double mean_utility() const { return sum_utility / static_cast<double>(n); }
};

enum class RadiusContext { Selection, Zooming };

enum class WidthEstimator { General, InventoryTwoOutcome };

struct ZoomConfig {
  enum class Mode { Theoretical, Constant };

  Mode mode = Mode::Constant;
  // Theoretical mode: rad = sqrt(c_rad * ln(horizon) / n), c_rad >= 16.
  double c_rad = 16.0;
  double horizon = 0.0;
  // Constant mode: rad = c / sqrt(n) with c depending on the context
  // (selection rule vs zooming rule).
  double c_select = 1.0;
  double c_zoom = 0.6;

  int depth_cap = 20;
  WidthEstimator width_estimator = WidthEstimator::General;
  /// Check Invariant 1(a-c) after every round; violations throw.
  bool debug_asserts = false;

  /// Theoretical-mode preconditions: c_rad >= 16 and T >= max(2^m + 1, 18).
  void validate(std::int64_t T, int m) const;
};

/// Sampling-uncertainty term; +infinity for an unplayed cell.
double confidence_radius(std::int64_t n, const ZoomConfig& cfg,
                         RadiusContext context);

/// Estimate of the virtual width of a composite cell from the anchor
/// tallies. Zero while either anchor is unsampled; may be negative and is
/// not clamped. The inventory variant uses the two-outcome form
/// p+ * S^-(hat) - p- * S^+(hat) from the empirical sale rates.
double virtual_width_estimate(const CellStats& stats, const Anchors& anchors,
                              const ZoomConfig& cfg);

struct ActiveCell {
  Cell cell;
  Anchors anchors;
  CellStats stats;
};

/// Upper confidence index: U_t + rad for atomic cells,
/// U_t + W_t + 5*rad for composite ones; +infinity when unplayed.
double cell_index(const ActiveCell& cell, const ZoomConfig& cfg);

struct ZoomEvent {
  std::int64_t round = 0;
  Cell cell;
};

struct AlgorithmState {
  std::vector<ActiveCell> active;
  std::int64_t t = 0;  // rounds completed
  double cumulative_utility = 0.0;
  std::vector<ZoomEvent> zoom_log;
};

AlgorithmState initial_state(const CandidateSet& set, const ZoomConfig& cfg);

/// Index of the active cell with the maximal index; ties (including several
/// unplayed cells) break toward smaller depth, then lexicographic corner.
std::size_t select_cell(const AlgorithmState& state, const ZoomConfig& cfg);

/// One logged round, shared with the non-adaptive baselines (their cell
/// label carries the arm's contract and zoomed is always 0).
struct RoundRow {
  std::int64_t t = 0;
  std::string cell;      // "j:(k,...)" for cells, "(w,...)" for arms
  int anchor_sign = 0;   // +1 / -1 / 0 = atomic
  Contract posted{Vec::Zero(1)};
  RoundView obs;
  bool zoomed = false;
  std::size_t active_cells = 0;
};

/// Plays one round: select cell, post an anchor (fair coin between the two
/// anchors of a composite cell), record the feedback into that anchor's
/// tally, then apply the zooming rule.
RoundRow step(AlgorithmState& state, const Environment& env,
              const CandidateSet& set, const ZoomConfig& cfg, Rng& rng);

enum class LogMode { Summary, Utilities, Rows };

struct RunRecord {
  std::string policy;                // "zooming" or the baseline policy name
  std::uint64_t seed = 0;
  std::int64_t T = 0;
  double cumulative_utility = 0.0;
  std::vector<RoundRow> rows;        // LogMode::Rows
  std::vector<double> utilities;     // LogMode::Utilities (and Rows)
};

struct ZoomRunResult {
  RunRecord record;
  AlgorithmState state;
};

/// Runs T rounds from the initial state (active = {root}).
ZoomRunResult run_zooming(const Environment& env, const CandidateSet& set,
                          const ZoomConfig& cfg, std::int64_t T,
                          std::uint64_t seed, LogMode log_mode = LogMode::Rows);

std::string contract_label(const Contract& c);

}  // namespace dcd
