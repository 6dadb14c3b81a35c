#include <doctest.h>

#include <cmath>

#include "dcd/analysis.hpp"
#include "dcd/experiment.hpp"
#include "dcd/zooming.hpp"

using namespace dcd;

namespace {

ZoomConfig constant_cfg(double c_select = 1.0, double c_zoom = 0.6) {
  ZoomConfig cfg;
  cfg.mode = ZoomConfig::Mode::Constant;
  cfg.c_select = c_select;
  cfg.c_zoom = c_zoom;
  return cfg;
}

// accept-always task pricing: posting price p deterministically yields
// value 1 and payment p
Environment accept_always() {
  return make_task_pricing(PiecewiseLinear({0.0, 1.0}, {1.0, 1.0}), 1.0);
}

}  // namespace

TEST_CASE("confidence radius in both modes") {
  ZoomConfig theo;
  theo.mode = ZoomConfig::Mode::Theoretical;
  theo.c_rad = 16.0;
  theo.horizon = std::exp(4.0);
  CHECK(confidence_radius(16, theo, RadiusContext::Selection) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::isinf(confidence_radius(0, theo, RadiusContext::Selection)));

  const ZoomConfig constant = constant_cfg();
  CHECK(confidence_radius(4, constant, RadiusContext::Selection) ==
        doctest::Approx(0.5));
  CHECK(confidence_radius(4, constant, RadiusContext::Zooming) ==
        doctest::Approx(0.15));
  CHECK(std::isinf(confidence_radius(0, constant, RadiusContext::Zooming)));
}

TEST_CASE("virtual width estimate from anchor tallies") {
  const auto space = CandidateSet::full_space(2);
  const Anchors anchors = anchors_of(space, Cell::root(2), 20);
  const ZoomConfig cfg = constant_cfg();

  CellStats stats;
  stats.n = 2;
  stats.plus = {1, 0.8, 0.5, 1};   // V+ = 0.8, P+ = 0.5
  stats.minus = {1, 0.2, 0.1, 1};  // V- = 0.2, P- = 0.1
  CHECK(virtual_width_estimate(stats, anchors, cfg) ==
        doctest::Approx(1.0).epsilon(1e-12));

  stats.minus = {};  // one anchor unsampled
  CHECK(virtual_width_estimate(stats, anchors, cfg) == 0.0);

  Anchors atomic = anchors;
  atomic.atomic = true;
  CHECK_THROWS(virtual_width_estimate(stats, atomic, cfg));
}

TEST_CASE("inventory two-outcome width estimate") {
  const auto space = CandidateSet::full_space(1);
  // price interval [0.25, 0.5]
  const Anchors anchors = anchors_of(space, Cell{2, {1}}, 20);
  ZoomConfig cfg = constant_cfg();
  cfg.width_estimator = WidthEstimator::InventoryTwoOutcome;

  CellStats stats;
  stats.n = 6;
  stats.minus = {4, 0, 0, 3};  // sale rate 0.75 at price 0.25
  stats.plus = {2, 0, 0, 1};   // sale rate 0.5 at price 0.5
  CHECK(virtual_width_estimate(stats, anchors, cfg) ==
        doctest::Approx(0.5 * 0.75 - 0.25 * 0.5).epsilon(1e-12));
}

TEST_CASE("index arithmetic") {
  const ZoomConfig cfg = constant_cfg();
  const auto mesh1 = CandidateSet::uniform_mesh(0.5, 1);

  ActiveCell atomic{Cell{2, {2}}, anchors_of(mesh1, Cell{2, {2}}, 20), {}};
  REQUIRE(atomic.anchors.atomic);
  atomic.stats.n = 100;  // rad = 0.1
  atomic.stats.sum_utility = 30.0;
  CHECK(cell_index(atomic, cfg) == doctest::Approx(0.4).epsilon(1e-12));

  ActiveCell composite{Cell::root(2),
                       anchors_of(CandidateSet::full_space(2), Cell::root(2), 20),
                       {}};
  composite.stats.n = 400;  // rad = 0.05
  composite.stats.sum_utility = 80.0;           // mean 0.2
  composite.stats.plus = {1, 0.3, 0.1, 1};      // W = (0.3-0.1)-(0.2-0.1)
  composite.stats.minus = {1, 0.2, 0.1, 1};     //   = 0.1
  CHECK(cell_index(composite, cfg) ==
        doctest::Approx(0.2 + 0.1 + 0.25).epsilon(1e-12));

  composite.stats.n = 0;
  CHECK(std::isinf(cell_index(composite, cfg)));
}

TEST_CASE("cell selection and deterministic tie-breaks") {
  const ZoomConfig cfg = constant_cfg();
  const auto space = CandidateSet::full_space(1);

  AlgorithmState state;
  ActiveCell a{Cell{1, {0}}, anchors_of(space, Cell{1, {0}}, 20), {}};
  a.stats.n = 100;
  a.stats.sum_utility = 100.0 * (0.4 - 5.0 * 0.1);  // index 0.4
  a.stats.plus = {50, 0, 0, 0};
  a.stats.minus = {50, 0, 0, 0};
  ActiveCell b{Cell{1, {1}}, anchors_of(space, Cell{1, {1}}, 20), {}};
  b.stats.n = 100;
  b.stats.sum_utility = 100.0 * (0.55 - 5.0 * 0.1);  // index 0.55
  b.stats.plus = {50, 0, 0, 0};
  b.stats.minus = {50, 0, 0, 0};
  state.active = {a, b};
  CHECK(select_cell(state, cfg) == 1);

  // several unplayed cells: smaller depth wins, then lexicographic corner
  AlgorithmState fresh;
  fresh.active.push_back({Cell{2, {0}}, anchors_of(space, Cell{2, {0}}, 20), {}});
  fresh.active.push_back({Cell{1, {1}}, anchors_of(space, Cell{1, {1}}, 20), {}});
  fresh.active.push_back({Cell{1, {0}}, anchors_of(space, Cell{1, {0}}, 20), {}});
  CHECK(fresh.active[select_cell(fresh, cfg)].cell == Cell{1, {0}});

  const auto root_state = initial_state(CandidateSet::uniform_mesh(0.5, 2), cfg);
  CHECK(root_state.active.size() == 1);
  CHECK(select_cell(root_state, cfg) == 0);
}

TEST_CASE("zooming splits a composite cell once the rule fires") {
  const Environment env = accept_always();
  const auto mesh = CandidateSet::uniform_mesh(0.5, 1);
  ZoomConfig cfg = constant_cfg();
  cfg.debug_asserts = true;

  // anchors of the root are prices 0 and 1 with deterministic utilities
  // 1 and 0, so W_t = 1 exactly; the zooming rule 5 * 0.6 / sqrt(n) < 1
  // fires once n >= 10 and both anchors are sampled.
  const auto result = run_zooming(env, mesh, cfg, 60, 99, LogMode::Rows);
  REQUIRE_FALSE(result.state.zoom_log.empty());
  CHECK(result.state.zoom_log.front().cell == Cell::root(1));
  CHECK(result.state.zoom_log.front().round >= 10);
  // with the zooming-rule constant 0.6 the split happens long before the
  // selection constant 1.0 would allow (n > 25)
  CHECK(result.state.zoom_log.front().round <= 20);

  // tallies are consistent with the split of rounds across anchors
  for (const auto& ac : result.state.active) {
    if (!ac.anchors.atomic)
      CHECK(ac.stats.n == ac.stats.plus.n + ac.stats.minus.n);
  }
}

TEST_CASE("atomic cells never zoom") {
  const Environment env = accept_always();
  const auto single =
      CandidateSet::explicit_list({Contract((Vec(1) << 0.3).finished())});
  ZoomConfig cfg = constant_cfg();
  cfg.debug_asserts = true;
  const auto result = run_zooming(env, single, cfg, 100, 7, LogMode::Rows);
  CHECK(result.state.zoom_log.empty());
  CHECK(result.state.active.size() == 1);
  for (const auto& row : result.record.rows) {
    CHECK(row.anchor_sign == 0);
    CHECK(row.posted.increment(0) == doctest::Approx(0.3));
  }
}

TEST_CASE("run of length one posts one anchor of the root") {
  const Environment env = make_uniform_market();
  const auto mesh = CandidateSet::uniform_mesh(0.2, 2);
  const auto result =
      run_zooming(env, mesh, constant_cfg(), 1, 5, LogMode::Rows);
  REQUIRE(result.record.rows.size() == 1);
  CHECK(result.record.rows[0].cell == "0:(0,0)");
  CHECK(result.state.t == 1);
}

TEST_CASE("seeded runs reproduce byte-identical logs") {
  const Environment env = make_uniform_market();
  const auto mesh = CandidateSet::uniform_mesh(0.2, 2);
  const auto a = run_zooming(env, mesh, constant_cfg(), 400, 12345, LogMode::Rows);
  const auto b = run_zooming(env, mesh, constant_cfg(), 400, 12345, LogMode::Rows);
  CHECK(rounds_csv({a.record}, false) == rounds_csv({b.record}, false));
  const auto c = run_zooming(env, mesh, constant_cfg(), 400, 54321, LogMode::Rows);
  CHECK(rounds_csv({a.record}, false) != rounds_csv({c.record}, false));
}

TEST_CASE("theoretical-mode preconditions") {
  ZoomConfig cfg;
  cfg.mode = ZoomConfig::Mode::Theoretical;
  cfg.c_rad = 8.0;
  cfg.horizon = 1000;
  CHECK_THROWS(cfg.validate(1000, 2));
  cfg.c_rad = 16.0;
  CHECK_NOTHROW(cfg.validate(1000, 2));
  CHECK_THROWS(cfg.validate(10, 2));  // below max(2^m + 1, 18)
}

TEST_CASE("clean-execution frequency under the theoretical radius") {
  const Environment env = make_uniform_market();
  const auto mesh = CandidateSet::uniform_mesh(0.2, 2);
  const std::int64_t T = 1000;
  ZoomConfig cfg;
  cfg.mode = ZoomConfig::Mode::Theoretical;
  cfg.c_rad = 16.0;
  cfg.horizon = static_cast<double>(T);

  std::int64_t pairs = 0, violations = 0;
  for (int seed = 0; seed < 20; ++seed) {
    auto state = initial_state(mesh, cfg);
    Rng rng(derive_run_seed(606, seed));
    for (std::int64_t t = 0; t < T; ++t) {
      step(state, env, mesh, cfg, rng);
      for (const auto& ac : state.active) {
        if (ac.stats.n == 0) continue;
        pairs += 1;
        const double expected = exact_cell_round_utility(env, ac.anchors);
        const double rad =
            confidence_radius(ac.stats.n, cfg, RadiusContext::Selection);
        if (std::abs(ac.stats.mean_utility() - expected) > rad) violations += 1;
      }
    }
  }
  REQUIRE(pairs > 0);
  CHECK(static_cast<double>(violations) / static_cast<double>(pairs) < 0.05);
}

TEST_CASE("every activated cell satisfies width <= virtual width") {
  const Environment env = make_uniform_market();
  const auto mesh = CandidateSet::uniform_mesh(0.2, 2);
  const ZoomConfig cfg = constant_cfg();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto result = run_zooming(env, mesh, cfg, 500, seed, LogMode::Summary);
    std::vector<Cell> activated = {Cell::root(2)};
    for (const auto& event : result.state.zoom_log) {
      for (const auto& child : quadrants(event.cell, cfg.depth_cap)) {
        if (mesh.count_in_cell(child).kind != CellCount::Zero)
          activated.push_back(child);
      }
    }
    for (const auto& cell : activated) {
      if (mesh.count_in_cell(cell).kind != CellCount::Many) continue;
      const double vw = exact_virtual_width(env, cell);
      const double width = exact_width(env, cell, cell.side() / 8.0);
      CHECK(width <= vw + 1e-9);
    }
  }
}

TEST_CASE("anchor coin is roughly fair over a run") {
  const Environment env = make_uniform_market();
  const auto mesh = CandidateSet::uniform_mesh(0.2, 2);
  const auto result =
      run_zooming(env, mesh, constant_cfg(), 2000, 77, LogMode::Summary);
  for (const auto& ac : result.state.active) {
    if (ac.anchors.atomic || ac.stats.n < 16) continue;
    const double imbalance =
        std::abs(static_cast<double>(ac.stats.plus.n - ac.stats.minus.n));
    // flagged, not asserted: 5 sigma binomial concentration
    WARN_LE(imbalance, 5.0 * std::sqrt(static_cast<double>(ac.stats.n)) + 1.0);
  }
}
