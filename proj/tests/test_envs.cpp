#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>

#include "dcd/envs.hpp"

using namespace dcd;

namespace {

Contract two(double b, double p) {
  return Contract((Vec(2) << b, p).finished());
}

Contract one(double p) { return Contract((Vec(1) << p).finished()); }

Environment highlow_unit(double c_h) {
  FiniteMixtureModel fm;
  fm.types.push_back(high_low_type(c_h, 0.8));
  fm.weights = Vec::Ones(1);
  return Environment(OutcomeSpace((Vec(3) << 0, 0, 1).finished()),
                     std::move(fm));
}

}  // namespace

TEST_CASE("market builders assemble the simulation-study markets") {
  const Environment homog = make_homogeneous_market(0.3);
  REQUIRE(homog.finite_mixture() != nullptr);
  CHECK(homog.finite_mixture()->types.size() == 1);
  CHECK(homog.finite_mixture()->weights(0) == 1.0);
  CHECK(homog.outcomes().value(1) == doctest::Approx(0.3));
  CHECK(homog.outcomes().value(2) == doctest::Approx(1.0));

  const Environment two_type = make_two_type_market(0.2, 0.9);
  REQUIRE(two_type.finite_mixture() != nullptr);
  CHECK(two_type.finite_mixture()->types.size() == 2);
  CHECK(two_type.finite_mixture()->weights(0) == doctest::Approx(0.5));
  CHECK(two_type.finite_mixture()->weights(1) == doctest::Approx(0.5));
}

TEST_CASE("uniform market oracle: S(p) = 0.64 p and null contract pays 0.3") {
  const Environment env = make_uniform_market();
  // p = 0.5, b = 0 with v_low = 0.3: U = 0.3 + S(p) * (0.7 - p)
  const auto at_half = env.exact_utility(two(0.0, 0.5));
  CHECK(at_half.utility == doctest::Approx(0.3 + 0.32 * 0.2).epsilon(1e-12));
  // zero contract: almost every worker declines high effort, low outcome
  // is certain, value 0.3, payment 0
  const auto at_zero = env.exact_utility(two(0.0, 0.0));
  CHECK(at_zero.value == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(at_zero.payment == doctest::Approx(0.0));
}

TEST_CASE("high-low closed form matches the claim on a unit-value market") {
  // c_h ~ U[0,1], theta = 0.8, v = 1, v_low = 0: S(0.5) = 0.8 * P[c <= 0.4]
  const Environment env =
      make_high_low_market(1.0, 0.0, 0.8, PiecewiseLinear::identity());
  const auto b = env.exact_utility(two(0.0, 0.5));
  CHECK(b.utility == doctest::Approx(0.32 * 0.5).epsilon(1e-12));
  CHECK(env.exact_utility(two(0.0, 0.0)).utility == doctest::Approx(0.0));
}

TEST_CASE("play_round on a homogeneous unit market hits {0.5, 0}") {
  const Environment env = highlow_unit(0.3);
  Rng rng(23);
  int highs = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto r = env.play_round(two(0.0, 0.5), rng);
    const bool is_high = r.outcome == 2;
    CHECK(r.utility == doctest::Approx(is_high ? 0.5 : 0.0));
    highs += is_high ? 1 : 0;
  }
  CHECK(static_cast<double>(highs) / n == doctest::Approx(0.8).epsilon(0.03));
}

TEST_CASE("null contract on the study markets never loses money") {
  const Environment env = make_uniform_market();
  Rng rng(29);
  for (int i = 0; i < 200; ++i) {
    const auto r = env.play_round(two(0.0, 0.0), rng);
    CHECK(r.outcome == 1);  // low outcome certain at zero premium
    CHECK(r.utility == doctest::Approx(0.3));
  }
}

TEST_CASE("deterministic environment reproduces the oracle exactly") {
  // worker always accepts: S = 1 everywhere
  const Environment env =
      make_task_pricing(PiecewiseLinear({0.0, 1.0}, {1.0, 1.0}), 1.0);
  Rng rng(31);
  const auto r = env.play_round(one(0.25), rng);
  const auto b = env.exact_utility(one(0.25));
  CHECK(r.value == doctest::Approx(b.value));
  CHECK(r.payment == doctest::Approx(b.payment));
  CHECK(r.utility == doctest::Approx(b.utility));
}

TEST_CASE("task pricing oracle: U(p) = S(p) (v - p)") {
  const Environment env = make_task_pricing(PiecewiseLinear::identity(), 1.0);
  CHECK(env.exact_utility(one(0.5)).utility == doctest::Approx(0.25));
  CHECK_THROWS(env.exact_utility(two(0.1, 0.2)));  // dimension mismatch
}

TEST_CASE("piecewise uniform task pricing integrates the density") {
  const Environment env = make_piecewise_uniform_taskpricing(
      {0.0, 0.5, 1.0}, {0.5, 1.5}, 2.0, 1.0);
  CHECK(env.sale_probability(0.5) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(env.sale_probability(1.0) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS(make_piecewise_uniform_taskpricing({0.0, 0.5, 1.0}, {8.0, 0.5},
                                                  4.0, 1.0));
  CHECK_THROWS(make_piecewise_uniform_taskpricing({0.0, 1.0}, {0.9}, 4.0, 1.0));
}

TEST_CASE("staircase instance: comb at 1/4, bump at 1/4 + delta/4") {
  const double delta = 0.01;
  const Environment env = make_staircase_instance(delta);
  CHECK(env.exact_utility(one(0.4)).utility == doctest::Approx(0.25).epsilon(1e-12));
  const double p_star = staircase_bump_price(delta);
  CHECK(p_star == doctest::Approx(0.485));
  CHECK(env.exact_utility(one(p_star)).utility ==
        doctest::Approx(0.25 + delta / 4.0).epsilon(1e-12));
  CHECK(env.exact_utility(one(1.0)).utility == doctest::Approx(0.0));
  // construction keeps S non-decreasing (the environment validates), and
  // the bump is the unique optimum among comb and off-grid points
  for (double delta2 : {0.04, 0.02, 0.005}) {
    CHECK_NOTHROW(make_staircase_instance(delta2));
  }
  CHECK_THROWS(make_staircase_instance(0.06));
}

TEST_CASE("nonmonotone example is FOSD-valid with the documented range") {
  const Environment env = make_nonmonotone_example(0.2);
  const auto* fm = env.finite_mixture();
  REQUIRE(fm != nullptr);
  CHECK(validate_type(fm->types[0]).ok);
  CHECK(fosd_compare(fm->types[0], 2, 1) == FosdOrdering::FirstDominates);
  CHECK_THROWS(make_nonmonotone_example(0.4));   // above 0.5*(v2 - v1)
  CHECK_THROWS(make_nonmonotone_example(0.0));
}

TEST_CASE("inventory environment: revenue p * S(p)") {
  const Environment env =
      make_inventory_env(PiecewiseLinear({0.0, 1.0}, {1.0, 0.0}));
  CHECK(env.exact_utility(one(0.5)).utility == doctest::Approx(0.25));
  Rng rng(37);
  for (int i = 0; i < 100; ++i) {
    CHECK(env.play_round(one(0.0), rng).utility == doctest::Approx(0.0));
    CHECK(env.play_round(one(1.0), rng).utility == doctest::Approx(0.0));
  }
  // utility = value - payment holds with revenue as negative payment
  const auto r = env.play_round(one(0.3), rng);
  CHECK(r.utility == doctest::Approx(r.value - r.payment));
}

TEST_CASE("empirical sale frequency is non-increasing in the price") {
  const Environment env =
      make_inventory_env(PiecewiseLinear({0.0, 1.0}, {1.0, 0.0}));
  Rng rng(41);
  const int n = 20000;
  double prev = 1.1;
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    int sales = 0;
    for (int i = 0; i < n; ++i)
      if (env.play_round(one(p), rng).outcome == 1) ++sales;
    const double freq = static_cast<double>(sales) / n;
    CHECK(freq <= prev + 0.02);
    prev = freq;
  }
}

TEST_CASE("sampler agrees with the exact oracle on every family") {
  Rng rng(43);
  const int n = 100000;
  std::vector<Environment> envs;
  envs.push_back(make_uniform_market());
  envs.push_back(make_two_type_market(0.25, 0.85));
  envs.push_back(make_task_pricing(PiecewiseLinear::identity(), 0.9));
  envs.push_back(make_inventory_env(PiecewiseLinear({0.0, 1.0}, {0.9, 0.1})));
  for (const auto& env : envs) {
    Vec w(env.m());
    for (int j = 0; j < env.m(); ++j) w(j) = rng.uniform();
    const Contract x(w);
    const double exact = env.exact_utility(x).utility;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = env.play_round(x, rng).utility;
      sum += u;
      sumsq += u * u;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean - exact) <= 4.0 * se + 1e-9);
  }
}

TEST_CASE("identical seeds give identical round streams") {
  const Environment env = make_uniform_market();
  Rng a(4711), b(4711);
  for (int i = 0; i < 200; ++i) {
    const auto ra = env.play_round(two(0.1, 0.4), a);
    const auto rb = env.play_round(two(0.1, 0.4), b);
    CHECK(ra.outcome == rb.outcome);
    CHECK(ra.utility == rb.utility);
    CHECK(ra.type_id == rb.type_id);
    CHECK(ra.effort == rb.effort);
  }
}

TEST_CASE("environment JSON loading") {
  using nlohmann::json;
  CHECK(load_environment(json{{"market", "uniform"}}).high_low() != nullptr);
  CHECK(load_environment(json{{"market", "homogeneous"}, {"c_h", 0.3}})
            .finite_mixture() != nullptr);
  CHECK(load_environment(json{{"market", "staircase"}, {"delta", 0.01}})
            .is_task_pricing());

  const json mixture = {
      {"values", {0.0, 0.3, 1.0}},
      {"types",
       {{{"weight", 1.0},
         {"costs", {0.0, 0.0, 0.3}},
         {"production", {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.2, 0.8}}},
         {"tiebreak", {2, 1, 0}}}}}};
  const Environment env = load_environment(mixture);
  REQUIRE(env.finite_mixture() != nullptr);
  CHECK(env.exact_utility(two(0.0, 0.5)).utility ==
        doctest::Approx(0.3 + 0.8 * (0.7 - 0.5)).epsilon(1e-12));
  CHECK_THROWS(load_environment(json{{"market", "unknown_kind"}}));
}
