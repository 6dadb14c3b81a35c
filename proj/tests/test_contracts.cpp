#include <doctest.h>

#include "dcd/analysis.hpp"
#include "dcd/contracts.hpp"
#include "dcd/envs.hpp"

using namespace dcd;

namespace {

// the standard high-low worker used throughout: c_h = 0.3, theta_h = 0.8
WorkerType hl() { return high_low_type(0.3, 0.8); }

OutcomeSpace unit_values() {
  return OutcomeSpace((Vec(3) << 0.0, 0.0, 1.0).finished());
}

Contract two(double b, double p) {
  return Contract((Vec(2) << b, p).finished());
}

}  // namespace

TEST_CASE("outcome space invariants") {
  CHECK_NOTHROW(OutcomeSpace((Vec(3) << 0.0, 0.3, 1.0).finished()));
  CHECK_THROWS(OutcomeSpace((Vec(2) << 0.1, 0.5).finished()));  // v(0) != 0
  CHECK_THROWS(OutcomeSpace((Vec(3) << 0.0, 0.5, 0.4).finished()));  // decreasing
  CHECK_THROWS(OutcomeSpace((Vec(2) << 0.0, 1.5).finished()));  // above 1
}

TEST_CASE("contract payments are prefix sums of increments") {
  const Contract x((Vec(3) << 0.1, 0.2, 0.3).finished());
  CHECK(x.payment(0) == doctest::Approx(0.0));
  CHECK(x.payment(1) == doctest::Approx(0.1));
  CHECK(x.payment(2) == doctest::Approx(0.3));
  CHECK(x.payment(3) == doctest::Approx(0.6));
  CHECK(x.bounded());
  CHECK(Contract((Vec(2) << 0.7, 0.6).finished()).bounded() == false);
  CHECK_THROWS(Contract((Vec(1) << -0.5).finished()));
  CHECK_THROWS(Contract((Vec(1) << 1.5).finished()));
}

TEST_CASE("pointwise dominance") {
  CHECK(dominates(two(0.5, 0.5), two(0.25, 0.5)));
  CHECK(dominates(two(0.25, 0.5), two(0.25, 0.5)));
  CHECK_FALSE(dominates(two(0.5, 0.1), two(0.25, 0.5)));
}

TEST_CASE("fosd_compare orders the high-low efforts") {
  const WorkerType t = hl();
  CHECK(fosd_compare(t, 2, 1) == FosdOrdering::FirstDominates);
  CHECK(fosd_compare(t, 1, 2) == FosdOrdering::SecondDominates);
  CHECK(fosd_compare(t, 1, 1) == FosdOrdering::Equal);
  CHECK(fosd_compare(t, 1, 0) == FosdOrdering::FirstDominates);
}

TEST_CASE("fosd_compare detects crossing cumulative rows") {
  // f(.|1) = (0, 0.5, 0, 0.5), f(.|2) = (0, 0, 1, 0) over m = 3
  WorkerType t;
  t.costs = (Vec(3) << 0.0, 0.1, 0.2).finished();
  t.production = Mat(3, 4);
  t.production << 1, 0, 0, 0, 0, 0.5, 0, 0.5, 0, 0, 1, 0;
  t.tiebreak = {0, 1, 2};
  CHECK(fosd_compare(t, 1, 2) == FosdOrdering::Incomparable);
}

TEST_CASE("validate_type reports the first violation") {
  CHECK(validate_type(hl()).ok);

  WorkerType bad = hl();
  bad.production(1, 0) = 0.1;
  bad.production(1, 1) = 0.9;
  const auto report = validate_type(bad);
  CHECK_FALSE(report.ok);
  CHECK(report.message == "null outcome reachable from non-null effort");

  WorkerType crossing;
  crossing.costs = (Vec(3) << 0.0, 0.1, 0.2).finished();
  crossing.production = Mat(3, 4);
  crossing.production << 1, 0, 0, 0, 0, 0.5, 0, 0.5, 0, 0, 1, 0;
  crossing.tiebreak = {0, 1, 2};
  const auto fosd_report = validate_type(crossing);
  CHECK_FALSE(fosd_report.ok);
  CHECK(fosd_report.message.find("FOSD fails for pair") != std::string::npos);

  WorkerType off_sum = hl();
  off_sum.production(2, 2) = 0.81;
  CHECK_FALSE(validate_type(off_sum).ok);
}

TEST_CASE("default tiebreak prefers dominant efforts") {
  const auto order = default_tiebreak_order(hl());
  CHECK(order == std::vector<int>{2, 1, 0});
}

TEST_CASE("best response follows the c_h/theta_h <= p threshold") {
  const WorkerType t = hl();
  // c_h / theta_h = 0.375
  CHECK(best_response(t, two(0.0, 0.5)) == 2);   // high
  CHECK(best_response(t, two(0.0, 0.3)) == 1);   // low
  CHECK(best_response(t, two(0.0, 0.375)) == 2); // exact tie goes high
  // zero contract: high costs 0.3, low ties null at 0 and outranks it
  CHECK(best_response(t, two(0.0, 0.0)) == 1);
}

TEST_CASE("best response is a pure function") {
  const WorkerType t = hl();
  const Contract x = two(0.17, 0.42);
  const int first = best_response(t, x);
  for (int i = 0; i < 10; ++i) CHECK(best_response(t, x) == first);
}

TEST_CASE("expected breakdown matches hand-computed high-low values") {
  const WorkerType t = hl();
  const OutcomeSpace values = unit_values();
  const auto high = expected_breakdown_for_type(t, values, two(0.0, 0.5));
  CHECK(high.value == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(high.payment == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(high.utility == doctest::Approx(0.4).epsilon(1e-12));

  const auto low = expected_breakdown_for_type(t, values, two(0.0, 0.3));
  CHECK(low.value == 0.0);
  CHECK(low.payment == 0.0);
  CHECK(low.utility == 0.0);
}

TEST_CASE("utility identity U = V - P on random inputs") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const Environment env = random_fosd_mixture(rng);
    Vec w(env.m());
    for (int j = 0; j < env.m(); ++j) w(j) = rng.uniform();
    const auto b = env.exact_utility(Contract(w));
    CHECK(std::abs(b.utility - (b.value - b.payment)) <= 1e-12);
  }
}

TEST_CASE("sample_outcome draws from the best-response row") {
  Rng rng(11);
  const WorkerType t = hl();

  SUBCASE("deterministic row") {
    WorkerType det;
    det.costs = (Vec(2) << 0.0, 0.0).finished();
    det.production = Mat(2, 3);
    det.production << 1, 0, 0, 0, 0, 1;
    det.tiebreak = {1, 0};
    for (int i = 0; i < 50; ++i)
      CHECK(sample_outcome(det, two(0.0, 0.0), rng) == 2);
  }

  SUBCASE("empirical frequency near 0.8") {
    int highs = 0;
    const int n = 100000;
    const Contract x = two(0.0, 0.5);
    for (int i = 0; i < n; ++i)
      if (sample_outcome(t, x, rng) == 2) ++highs;
    CHECK(static_cast<double>(highs) / n == doctest::Approx(0.8).epsilon(0.0125));
  }

  SUBCASE("null effort yields the null outcome") {
    WorkerType costly;
    costly.costs = (Vec(2) << 0.0, 0.5).finished();
    costly.production = Mat(2, 3);
    costly.production << 1, 0, 0, 0, 0.2, 0.8;
    costly.tiebreak = default_tiebreak_order(costly);
    for (int i = 0; i < 50; ++i)
      CHECK(sample_outcome(costly, two(0.0, 0.0), rng) == 0);
  }
}

TEST_CASE("dominating contracts never demote the induced effort (FOSD)") {
  Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    const Environment env = random_fosd_mixture(rng);
    const auto* fm = env.finite_mixture();
    const WorkerType& t = fm->types[rng.uniform_index(fm->types.size())];
    Vec lo(env.m()), hi(env.m());
    for (int j = 0; j < env.m(); ++j) {
      lo(j) = rng.uniform();
      hi(j) = lo(j) + (1.0 - lo(j)) * rng.uniform();
    }
    const int e_lo = best_response(t, Contract(lo));
    const int e_hi = best_response(t, Contract(hi));
    // the effort chosen at the dominated contract must not dominate the
    // effort chosen at the dominating one
    CHECK(fosd_compare(t, e_lo, e_hi) != FosdOrdering::FirstDominates);
  }
}

TEST_CASE("value and payment are monotone in pointwise dominance") {
  Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    const Environment env = random_fosd_mixture(rng);
    Vec lo(env.m()), hi(env.m());
    for (int j = 0; j < env.m(); ++j) {
      lo(j) = rng.uniform();
      hi(j) = lo(j) + (1.0 - lo(j)) * rng.uniform();
    }
    const auto at_lo = env.exact_utility(Contract(lo));
    const auto at_hi = env.exact_utility(Contract(hi));
    CHECK(at_hi.value >= at_lo.value - 1e-12);
    CHECK(at_hi.payment >= at_lo.payment - 1e-12);
  }
}
