#include "dcd/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dcd/analysis.hpp"
#include "dcd/baselines.hpp"
#include "dcd/experiment.hpp"

namespace dcd {

namespace {

using Clock = std::chrono::steady_clock;

// Frozen digest of a seeded reference run; regenerate deliberately if the
// algorithm's sampling sequence ever changes.
constexpr std::uint64_t kGoldenRunHash = 0x0ull;

struct Check {
  bool pass = true;
  std::ostringstream details;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      details << "FAILED: " << what << "; ";
    }
  }
  void note(const std::string& what) { details << what << "; "; }
};

Environment highlow_unit_market(double c_h) {
  FiniteMixtureModel fm;
  fm.types.push_back(high_low_type(c_h, 0.8));
  fm.weights = Vec::Ones(1);
  return Environment(OutcomeSpace((Vec(3) << 0, 0, 1).finished()),
                     std::move(fm));
}

Environment highlow_unit_two_type(double c1, double c2) {
  FiniteMixtureModel fm;
  fm.types.push_back(high_low_type(c1, 0.8));
  fm.types.push_back(high_low_type(c2, 0.8));
  fm.weights = (Vec(2) << 0.5, 0.5).finished();
  return Environment(OutcomeSpace((Vec(3) << 0, 0, 1).finished()),
                     std::move(fm));
}

AlgorithmSpec zooming_spec() {
  AlgorithmSpec algo;
  algo.name = "zooming";
  algo.kind = AlgorithmSpec::Kind::Zooming;
  algo.zoom.mode = ZoomConfig::Mode::Constant;
  algo.zoom.c_select = 1.0;
  algo.zoom.c_zoom = 0.6;
  return algo;
}

AlgorithmSpec ucb_constant_spec(double c = 1.0) {
  AlgorithmSpec algo;
  algo.name = "ucb1_constant";
  algo.kind = AlgorithmSpec::Kind::Baseline;
  algo.policy = {PolicyKind::Ucb1Constant, c};
  return algo;
}

SuiteResult finish(const char* name, Check& check, Clock::time_point start,
                   bool hard = true) {
  SuiteResult result;
  result.name = name;
  result.pass = check.pass;
  result.hard = hard;
  result.seconds =
      std::chrono::duration<double>(Clock::now() - start).count();
  result.details = check.details.str();
  return result;
}

// Criterion 1: random FOSD instances, 50 random dyadic cells each,
// grid-width <= virtual width + 1e-9 everywhere, under two minutes.
SuiteResult suite_lemma1_sweep() {
  const auto start = Clock::now();
  Check check;
  Rng rng(1001);
  const auto result = verify_lemma1(
      [](Rng& r) { return random_fosd_mixture(r, 3, 4, 5); }, 200, 50, 8, rng);
  check.expect(result.pass, "width exceeded virtual width: " +
                                result.counterexample);
  check.note("cells=" + std::to_string(result.cells_checked));
  {
    std::ostringstream os;
    os << "worst margin vw-width=" << result.worst_margin;
    check.note(os.str());
  }
  const double elapsed =
      std::chrono::duration<double>(Clock::now() - start).count();
  check.expect(elapsed < 120.0, "runtime exceeded 2 minutes");
  return finish("lemma1_sweep", check, start);
}

// Criterion 2: |U(x) - (S(p)(v-p) - x_low)| <= 1e-9 on 1000 random
// contracts over random high-low markets with zero low value. Half go
// through the finite-mixture best-response machinery, half through the
// parametric oracle.
SuiteResult suite_highlow_identity() {
  const auto start = Clock::now();
  Check check;
  Rng rng(2002);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const int n = 1 + static_cast<int>(rng.uniform_index(4));
    std::vector<double> costs(static_cast<std::size_t>(n)),
        thetas(static_cast<std::size_t>(n)),
        weights(static_cast<std::size_t>(n));
    FiniteMixtureModel fm;
    double wsum = 0.0;
    for (int k = 0; k < n; ++k) {
      costs[static_cast<std::size_t>(k)] = rng.uniform();
      thetas[static_cast<std::size_t>(k)] = rng.uniform(0.05, 1.0);
      weights[static_cast<std::size_t>(k)] = 0.1 + rng.uniform();
      wsum += weights[static_cast<std::size_t>(k)];
      fm.types.push_back(high_low_type(costs[static_cast<std::size_t>(k)],
                                       thetas[static_cast<std::size_t>(k)]));
    }
    fm.weights = Vec(n);
    for (int k = 0; k < n; ++k)
      fm.weights(k) = weights[static_cast<std::size_t>(k)] / wsum;
    fm.weights(n - 1) = 1.0 - fm.weights.head(n - 1).sum();
    const double v = rng.uniform(0.1, 1.0);
    const Environment env(OutcomeSpace((Vec(3) << 0, 0, v).finished()),
                          std::move(fm));

    const double b = rng.uniform(), p = rng.uniform();
    const Contract x((Vec(2) << b, p).finished());
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      // indicator uses the documented tie band: exact ties go to high effort
      if (costs[static_cast<std::size_t>(k)] <=
          thetas[static_cast<std::size_t>(k)] * p + kTieBand)
        s += env.finite_mixture()->weights(k) *
             thetas[static_cast<std::size_t>(k)];
    }
    const double claim = s * (v - p) - b;
    const double err = std::abs(env.exact_utility(x).utility - claim);
    worst = std::max(worst, err);
  }
  for (int i = 0; i < 500; ++i) {
    const double theta = rng.uniform(0.05, 1.0);
    const double v = rng.uniform(0.1, 1.0);
    std::vector<double> breaks = {0.0, rng.uniform(0.2, 0.8), 1.0};
    const double d1 = rng.uniform(0.25, 4.0);
    const double d2 = (1.0 - d1 * breaks[1]) / (1.0 - breaks[1]);
    if (d2 < 0.05) {
      --i;
      continue;
    }
    PiecewiseLinear cdf({0.0, breaks[1], 1.0},
                        {0.0, d1 * breaks[1], 1.0});
    const Environment env = make_high_low_market(v, 0.0, theta, cdf);
    const double b = rng.uniform(), p = rng.uniform();
    const Contract x((Vec(2) << b, p).finished());
    const double s = theta * cdf(theta * p);
    const double claim = s * (v - p) - b;
    const double err = std::abs(env.exact_utility(x).utility - claim);
    worst = std::max(worst, err);
  }
  {
    std::ostringstream os;
    os << "worst |U - claim| = " << worst;
    check.note(os.str());
  }
  check.expect(worst <= 1e-9, "identity violated beyond 1e-9");
  return finish("highlow_identity", check, start);
}

// Criterion 3: measured OPT gap <= 3*delta + 2*fine_step on three high-low
// markets with zero low value.
SuiteResult suite_discretization_bound() {
  const auto start = Clock::now();
  Check check;
  std::vector<std::pair<std::string, Environment>> markets;
  markets.emplace_back("uniform-cost", make_high_low_market(
                                           1.0, 0.0, 0.8,
                                           PiecewiseLinear::identity()));
  markets.emplace_back("homogeneous", highlow_unit_market(0.3));
  markets.emplace_back("two-type", highlow_unit_two_type(0.2, 0.9));
  for (const auto& [label, env] : markets) {
    for (double delta : {0.1, 0.05, 0.02}) {
      const double fine = delta / 10.0;
      const double gap = discretization_error(env, fine, delta);
      std::ostringstream os;
      os << label << " delta=" << delta << " gap=" << gap;
      check.note(os.str());
      check.expect(gap <= 3.0 * delta + 2.0 * fine + 1e-12,
                   label + ": gap exceeds 3*delta bound");
      check.expect(gap >= -1e-12, label + ": negative discretization error");
    }
  }
  return finish("discretization_bound", check, start);
}

// Criterion 4: brute force on the non-monotone instance recovers the
// unrestricted optimum x(2) = 0.40, utility 0.60, strictly above the
// monotone optimum 0.50.
SuiteResult suite_nonmonotone_optimum() {
  const auto start = Clock::now();
  Check check;
  const Environment env = make_nonmonotone_example(0.2);
  const auto unrestricted = opt_search_payments(env, 0.01);
  const auto monotone =
      opt_search(env, CandidateSet::uniform_mesh(0.01, env.m()));
  {
    std::ostringstream os;
    os << "unrestricted U=" << unrestricted.value << " at payments ("
       << unrestricted.payments(1) << "," << unrestricted.payments(2) << ","
       << unrestricted.payments(3) << "), monotone U=" << monotone.value;
    check.note(os.str());
  }
  check.expect(std::abs(unrestricted.value - 0.6) <= 0.01,
               "unrestricted optimum utility not 0.60 +- 0.01");
  check.expect(std::abs(unrestricted.payments(2) - 0.4) <= 0.01 + 1e-12,
               "x(2) not 0.40 +- 0.01");
  check.expect(std::abs(unrestricted.payments(1)) <= 1e-12,
               "x(1) not zero");
  check.expect(std::abs(unrestricted.payments(3)) <= 1e-12,
               "x(3) not zero");
  check.expect(std::abs(monotone.value - 0.5) <= 0.01,
               "monotone optimum not 0.50 +- 0.01");
  check.expect(unrestricted.value - monotone.value >= 0.1 - 0.02,
               "unrestricted advantage below 0.5*(v2-v1) - c - slack");
  return finish("nonmonotone_optimum", check, start);
}

// Criterion 5: 20 seeded zooming runs with per-round Invariant 1(a-c)
// assertions; any violation throws and fails the suite.
SuiteResult suite_invariant_suite() {
  const auto start = Clock::now();
  Check check;
  const Environment env = make_uniform_market();
  const auto set = CandidateSet::uniform_mesh(0.08, env.m());
  try {
    const auto records = run_batch(env, set, zooming_spec(), 5000, 20,
                                   777, /*debug_asserts=*/true,
                                   LogMode::Summary, 0);
    double uhat = 0.0;
    for (const auto& r : records)
      uhat += r.cumulative_utility / static_cast<double>(r.T);
    std::ostringstream os;
    os << "20 runs clean, mean Uhat=" << uhat / 20.0;
    check.note(os.str());
  } catch (const std::exception& e) {
    check.expect(false, std::string("invariant violation: ") + e.what());
  }
  return finish("invariant_suite", check, start);
}

// Criterion 6: oracle-route and badness-route regret agree to 1e-9 on every
// logged run (zooming and both baselines).
SuiteResult suite_regret_identity() {
  const auto start = Clock::now();
  Check check;
  const Environment env = make_uniform_market();
  const auto set = CandidateSet::uniform_mesh(0.08, env.m());

  auto check_batch = [&](const std::vector<RunRecord>& records,
                         const std::string& label) {
    const auto report = regret_report(records, env, set);
    double worst = 0.0;
    for (std::size_t i = 0; i < report.oracle_route.size(); ++i) {
      worst = std::max(worst, std::abs(report.oracle_route[i] -
                                       report.badness_route[i]));
    }
    std::ostringstream os;
    os << label << " worst route gap=" << worst;
    check.note(os.str());
    check.expect(worst <= 1e-9, label + ": regret routes disagree");
  };

  check_batch(run_batch(env, set, zooming_spec(), 2000, 10, 31,
                        false, LogMode::Rows, 0),
              "zooming");
  check_batch(run_batch(env, set, ucb_constant_spec(), 2000, 5, 32,
                        false, LogMode::Rows, 0),
              "ucb1_constant");
  AlgorithmSpec thompson;
  thompson.name = "thompson";
  thompson.kind = AlgorithmSpec::Kind::Baseline;
  thompson.policy = {PolicyKind::ThompsonGaussian, 0.0};
  check_batch(run_batch(env, set, thompson, 2000, 3, 33, false,
                        LogMode::Rows, 0),
              "thompson");
  return finish("regret_identity", check, start);
}

// Criterion 7: on the Uniform Worker Market at T = 5000, zooming's mean Uhat
// is never more than 2 combined SEs below constant-UCB and beats it by at
// least 3 combined SEs at delta = 0.02; also exceeds the null-contract
// utility 0.3 at delta = 0.08. Under ten minutes.
SuiteResult suite_figure1_property() {
  const auto start = Clock::now();
  Check check;
  const Environment env = make_uniform_market();
  const int runs = 50;
  const std::int64_t T = 5000;
  for (double delta : {0.02, 0.08, 0.2}) {
    const auto set = CandidateSet::uniform_mesh(delta, env.m());
    auto uhats = [&](const AlgorithmSpec& algo, std::uint64_t seed) {
      const auto records = run_batch(env, set, algo, T, runs, seed, false,
                                     LogMode::Summary, 0);
      std::vector<double> uhat;
      uhat.reserve(records.size());
      for (const auto& r : records)
        uhat.push_back(r.cumulative_utility / static_cast<double>(T));
      return uhat;
    };
    const auto zoom = uhats(zooming_spec(), 91);
    const auto ucb = uhats(ucb_constant_spec(), 92);
    const double mz = mean_of(zoom), sz = se_of(zoom);
    const double mu = mean_of(ucb), su = se_of(ucb);
    const double se_comb = std::sqrt(sz * sz + su * su);
    {
      std::ostringstream os;
      os << "delta=" << delta << " zoom=" << mz << "+-" << sz
         << " ucb=" << mu << "+-" << su;
      check.note(os.str());
    }
    check.expect(mz >= mu - 2.0 * se_comb,
                 "zooming below UCB by more than 2 SE at delta=" +
                     std::to_string(delta));
    if (delta == 0.02) {
      check.expect(mz - mu >= 3.0 * se_comb,
                   "zooming not 3 SE above UCB at delta=0.02");
    }
    if (delta == 0.08) {
      check.expect(mz > 0.3,
                   "zooming mean Uhat at delta=0.08 not above the null 0.3");
    }
  }
  const double elapsed =
      std::chrono::duration<double>(Clock::now() - start).count();
  check.expect(elapsed < 600.0, "runtime exceeded 10 minutes");
  return finish("figure1_property", check, start);
}

// Criterion 8: inventory width bound, width(C) <= vw2(C), over random
// non-increasing demand curves and random interval cells.
SuiteResult suite_inventory_width() {
  const auto start = Clock::now();
  Check check;
  Rng rng(8008);
  const auto result = verify_lemma1(
      [](Rng& r) { return random_inventory(r); }, 100, 50, 128, rng);
  check.expect(result.pass,
               "width exceeded vw2: " + result.counterexample);
  {
    std::ostringstream os;
    os << "cells=" << result.cells_checked
       << " worst margin=" << result.worst_margin;
    check.note(os.str());
  }
  return finish("inventory_width", check, start);
}

// Criterion 9 (flagged, not hard-failed): fitted width-dimension slope on a
// strongly Lipschitz-concave high-low instance stays below 0.75.
SuiteResult suite_census_dimension() {
  const auto start = Clock::now();
  Check check;
  const Environment env =
      make_high_low_market(1.0, 0.0, 0.8, PiecewiseLinear::identity());
  std::vector<double> eps;
  for (int j = 3; j <= 8; ++j) eps.push_back(std::ldexp(1.0, -j));
  const auto census = cell_census(env, CandidateSet::full_space(env.m()), 9,
                                  eps, 1.0, 8);
  {
    std::ostringstream os;
    os << "slope=" << census.fit.slope << " r2=" << census.fit.r2
       << " counts=";
    for (auto c : census.fit.counts) os << c << " ";
    os << "cells=" << census.feasible_cells;
    check.note(os.str());
  }
  check.expect(census.fit.slope <= 0.75,
               "fitted width-dimension slope above 0.75");
  return finish("census_dimension", check, start, /*hard=*/false);
}

// Criterion 10: classical UCB1 on a two-armed Bernoulli instance with gap
// 0.2 keeps cumulative pseudo-regret below 60 ln(T)/0.2 at T = 50000.
SuiteResult suite_ucb1_sanity() {
  const auto start = Clock::now();
  Check check;
  const std::int64_t T = 50000;
  const double means[2] = {0.5, 0.7};
  const Policy policy{PolicyKind::Ucb1, 0.0};
  double total_regret = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(derive_run_seed(4242, seed));
    ArmStats arms[2];
    double regret = 0.0;
    for (std::int64_t t = 1; t <= T; ++t) {
      int choice;
      if (t <= 2) {
        choice = static_cast<int>(t - 1);
      } else {
        const auto td = static_cast<double>(t);
        choice = ucb1_index(arms[0], td, policy) >=
                         ucb1_index(arms[1], td, policy)
                     ? 0
                     : 1;
      }
      const double reward = rng.bernoulli(means[choice]) ? 1.0 : 0.0;
      arms[choice].pulls += 1;
      arms[choice].reward_sum += reward;
      regret += means[1] - means[choice];
    }
    total_regret += regret;
  }
  const double mean_regret = total_regret / 20.0;
  const double bound = 60.0 * std::log(static_cast<double>(T)) / 0.2;
  {
    std::ostringstream os;
    os << "mean regret=" << mean_regret << " bound=" << bound;
    check.note(os.str());
  }
  check.expect(mean_regret < bound, "UCB1 regret above the sanity bound");
  return finish("ucb1_sanity", check, start);
}

// Regression anchor: a seeded reference run must reproduce byte-for-byte.
SuiteResult suite_golden_determinism() {
  const auto start = Clock::now();
  Check check;
  const Environment env = make_uniform_market();
  const auto set = CandidateSet::uniform_mesh(0.2, env.m());
  ZoomConfig cfg;
  cfg.mode = ZoomConfig::Mode::Constant;
  cfg.c_select = 1.0;
  cfg.c_zoom = 0.6;
  auto make_csv = [&] {
    const auto result = run_zooming(env, set, cfg, 300, 123456789, LogMode::Rows);
    return rounds_csv({result.record}, false);
  };
  const std::string csv = make_csv();
  check.expect(csv == make_csv(), "repeated seeded run diverged");
  const std::uint64_t hash = fnv1a_hash(csv);
  {
    std::ostringstream os;
    os << "csv hash=0x" << std::hex << hash;
    check.note(os.str());
  }
  if (kGoldenRunHash != 0) {
    check.expect(hash == kGoldenRunHash,
                 "golden run digest mismatch (sampling sequence changed)");
  } else {
    check.note("golden hash unset");
    check.expect(false, "golden hash not frozen yet");
  }
  return finish("golden_determinism", check, start);
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"lemma1_sweep",      "highlow_identity", "discretization_bound",
          "nonmonotone_optimum", "invariant_suite", "regret_identity",
          "figure1_property",  "inventory_width",  "census_dimension",
          "ucb1_sanity",       "golden_determinism"};
}

SuiteResult run_suite(const std::string& name) {
  if (name == "lemma1_sweep") return suite_lemma1_sweep();
  if (name == "highlow_identity") return suite_highlow_identity();
  if (name == "discretization_bound") return suite_discretization_bound();
  if (name == "nonmonotone_optimum") return suite_nonmonotone_optimum();
  if (name == "invariant_suite") return suite_invariant_suite();
  if (name == "regret_identity") return suite_regret_identity();
  if (name == "figure1_property") return suite_figure1_property();
  if (name == "inventory_width") return suite_inventory_width();
  if (name == "census_dimension") return suite_census_dimension();
  if (name == "ucb1_sanity") return suite_ucb1_sanity();
  if (name == "golden_determinism") return suite_golden_determinism();
  throw std::invalid_argument("unknown suite: " + name);
}

std::vector<SuiteResult> run_suites(const std::vector<std::string>& names) {
  if (names.empty()) throw std::invalid_argument("no suites selected");
  std::vector<SuiteResult> results;
  results.reserve(names.size());
  for (const auto& name : names) results.push_back(run_suite(name));
  return results;
}

bool all_passed(const std::vector<SuiteResult>& results) {
  for (const auto& r : results) {
    if (r.hard && !r.pass) return false;
  }
  return true;
}

std::uint64_t fnv1a_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace dcd
