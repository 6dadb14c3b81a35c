#include "dcd/zooming.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dcd {

void ZoomConfig::validate(std::int64_t T, int m) const {
  if (mode == Mode::Theoretical) {
    if (c_rad < 16.0)
      throw std::invalid_argument("ZoomConfig: theoretical mode needs c_rad >= 16");
    const double t_min = std::max(std::pow(2.0, m) + 1.0, 18.0);
    if (static_cast<double>(T) < t_min || horizon < t_min)
      throw std::invalid_argument(
          "ZoomConfig: theoretical mode needs T >= max(2^m + 1, 18)");
  }
  if (depth_cap < 1) throw std::invalid_argument("ZoomConfig: depth_cap >= 1");
}

double confidence_radius(std::int64_t n, const ZoomConfig& cfg,
                         RadiusContext context) {
  if (n <= 0) return std::numeric_limits<double>::infinity();
  if (cfg.mode == ZoomConfig::Mode::Theoretical) {
    return std::sqrt(cfg.c_rad * std::log(cfg.horizon) / static_cast<double>(n));
  }
  const double c =
      context == RadiusContext::Selection ? cfg.c_select : cfg.c_zoom;
  return c / std::sqrt(static_cast<double>(n));
}

double virtual_width_estimate(const CellStats& stats, const Anchors& anchors,
                              const ZoomConfig& cfg) {
  if (anchors.atomic)
    throw std::invalid_argument("virtual_width_estimate: atomic cell");
  const auto& p = stats.plus;
  const auto& m = stats.minus;
  if (p.n == 0 || m.n == 0) return 0.0;
  if (cfg.width_estimator == WidthEstimator::InventoryTwoOutcome) {
    const double price_hi = anchors.plus().increment(0);
    const double price_lo = anchors.minus().increment(0);
    const double sale_lo = static_cast<double>(m.nonnull) / static_cast<double>(m.n);
    const double sale_hi = static_cast<double>(p.nonnull) / static_cast<double>(p.n);
    return price_hi * sale_lo - price_lo * sale_hi;
  }
  const double v_plus = p.sum_value / static_cast<double>(p.n);
  const double p_plus = p.sum_payment / static_cast<double>(p.n);
  const double v_minus = m.sum_value / static_cast<double>(m.n);
  const double p_minus = m.sum_payment / static_cast<double>(m.n);
  return (v_plus - p_minus) - (v_minus - p_plus);
}

double cell_index(const ActiveCell& cell, const ZoomConfig& cfg) {
  if (cell.stats.n == 0) return std::numeric_limits<double>::infinity();
  const double rad =
      confidence_radius(cell.stats.n, cfg, RadiusContext::Selection);
  if (cell.anchors.atomic) return cell.stats.mean_utility() + rad;
  const double w = virtual_width_estimate(cell.stats, cell.anchors, cfg);
  return cell.stats.mean_utility() + w + 5.0 * rad;
}

AlgorithmState initial_state(const CandidateSet& set, const ZoomConfig& cfg) {
  AlgorithmState state;
  const Cell root = Cell::root(set.m());
  if (set.count_in_cell(root).kind == CellCount::Zero)
    throw std::invalid_argument("initial_state: empty candidate set");
  state.active.push_back({root, anchors_of(set, root, cfg.depth_cap), {}});
  return state;
}

std::size_t select_cell(const AlgorithmState& state, const ZoomConfig& cfg) {
  if (state.active.empty())
    throw std::logic_error("select_cell: no active cells");
  std::size_t best = 0;
  double best_index = -std::numeric_limits<double>::infinity();
  bool have = false;
  for (std::size_t i = 0; i < state.active.size(); ++i) {
    const double idx = cell_index(state.active[i], cfg);
    if (!have || idx > best_index ||
        (idx == best_index &&
         cell_less(state.active[i].cell, state.active[best].cell))) {
      best = i;
      best_index = idx;
      have = true;
    }
  }
  return best;
}

namespace {

void check_invariants(const AlgorithmState& state, const CandidateSet& set,
                      const ZoomConfig& cfg) {
  // (a) all active cells are relevant
  for (const auto& ac : state.active) {
    if (set.count_in_cell(ac.cell).kind == CellCount::Zero)
      throw std::logic_error("Invariant 1(a) violated at round " +
                             std::to_string(state.t) + ", cell " +
                             ac.cell.to_string());
  }
  // (b) each candidate contract lies in some active (closed) cell;
  // checkable for finite candidate sets only. Membership uses plain double
  // comparison, independent of the integer counting path.
  if (set.finite()) {
    set.for_each_candidate([&](const Contract& c) {
      for (const auto& ac : state.active) {
        if (ac.cell.contains(c.increments())) return;
      }
      throw std::logic_error("Invariant 1(b) violated at round " +
                             std::to_string(state.t) + ": uncovered candidate " +
                             contract_label(c));
    });
  }
  // (c) W_t(C) <= 5 rad_t(C) for active composite cells with both anchors
  // sampled
  for (const auto& ac : state.active) {
    if (ac.anchors.atomic) continue;
    if (ac.stats.plus.n == 0 || ac.stats.minus.n == 0) continue;
    const double w = virtual_width_estimate(ac.stats, ac.anchors, cfg);
    const double rad =
        confidence_radius(ac.stats.n, cfg, RadiusContext::Zooming);
    if (w > 5.0 * rad + 1e-12)
      throw std::logic_error("Invariant 1(c) violated at round " +
                             std::to_string(state.t) + ", cell " +
                             ac.cell.to_string());
  }
}

}  // namespace

RoundRow step(AlgorithmState& state, const Environment& env,
              const CandidateSet& set, const ZoomConfig& cfg, Rng& rng) {
  const std::size_t idx = select_cell(state, cfg);
  ActiveCell& ac = state.active[idx];

  RoundRow row;
  row.t = state.t + 1;
  row.cell = ac.cell.to_string();

  const bool atomic = ac.anchors.atomic;
  const bool take_plus = !atomic && rng.bernoulli(0.5);
  row.anchor_sign = atomic ? 0 : (take_plus ? +1 : -1);
  row.posted = take_plus ? ac.anchors.plus() : ac.anchors.minus();

  row.obs = visible(env.play_round(row.posted, rng));

  ac.stats.n += 1;
  ac.stats.sum_utility += row.obs.utility;
  auto& tally = take_plus ? ac.stats.plus : ac.stats.minus;
  tally.n += 1;
  tally.sum_value += row.obs.value;
  tally.sum_payment += row.obs.payment;
  tally.nonnull += row.obs.outcome != 0 ? 1 : 0;

  // Zooming rule: replace a composite cell by its relevant quadrants once
  // the width estimate exceeds five confidence radii. Skipped while either
  // anchor is unsampled (W = 0) and at the depth cap.
  bool zoomed = false;
  if (!atomic && ac.cell.depth < cfg.depth_cap && ac.stats.plus.n > 0 &&
      ac.stats.minus.n > 0) {
    const double w = virtual_width_estimate(ac.stats, ac.anchors, cfg);
    const double rad =
        confidence_radius(ac.stats.n, cfg, RadiusContext::Zooming);
    if (5.0 * rad < w) {
      zoomed = true;
      const Cell zoomed_cell = ac.cell;
      std::vector<ActiveCell> children;
      for (const Cell& child : quadrants(zoomed_cell, cfg.depth_cap)) {
        if (set.count_in_cell(child).kind == CellCount::Zero) continue;
        // fresh statistics: n_t counts choices of the child itself
        children.push_back({child, anchors_of(set, child, cfg.depth_cap), {}});
      }
      state.active.erase(state.active.begin() +
                         static_cast<std::ptrdiff_t>(idx));
      for (auto& child : children) state.active.push_back(std::move(child));
      state.zoom_log.push_back({state.t + 1, zoomed_cell});
    }
  }

  state.t += 1;
  state.cumulative_utility += row.obs.utility;
  row.zoomed = zoomed;
  row.active_cells = state.active.size();

  if (cfg.debug_asserts) check_invariants(state, set, cfg);
  return row;
}

ZoomRunResult run_zooming(const Environment& env, const CandidateSet& set,
                          const ZoomConfig& cfg, std::int64_t T,
                          std::uint64_t seed, LogMode log_mode) {
  cfg.validate(T, set.m());
  ZoomRunResult out;
  out.state = initial_state(set, cfg);
  out.record.policy = "zooming";
  out.record.seed = seed;
  out.record.T = T;
  Rng rng(seed);
  if (log_mode == LogMode::Rows) out.record.rows.reserve(static_cast<std::size_t>(T));
  if (log_mode != LogMode::Summary)
    out.record.utilities.reserve(static_cast<std::size_t>(T));
  for (std::int64_t t = 0; t < T; ++t) {
    RoundRow row = step(out.state, env, set, cfg, rng);
    if (log_mode != LogMode::Summary) out.record.utilities.push_back(row.obs.utility);
    if (log_mode == LogMode::Rows) out.record.rows.push_back(std::move(row));
  }
  out.record.cumulative_utility = out.state.cumulative_utility;
  return out;
}

std::string contract_label(const Contract& c) {
  std::ostringstream os;
  os.precision(12);
  os << "(";
  for (int i = 0; i < c.m(); ++i) {
    if (i) os << ",";
    os << c.increment(i);
  }
  os << ")";
  return os.str();
}

}  // namespace dcd
