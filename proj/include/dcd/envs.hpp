#pragma once

#include <nlohmann/json_fwd.hpp>
#include <variant>
#include <vector>

#include "dcd/contracts.hpp"
#include "dcd/curves.hpp"

namespace dcd {

/// Everything realized in one round. Algorithms may only read the fields of
/// visible(); the sampled type and chosen effort are debug telemetry.
struct RoundOutcome {
  int outcome = 0;
  double value = 0.0;
  double payment = 0.0;
  double utility = 0.0;
  int type_id = -1;  // debug
  int effort = -1;   // debug
};

/// The algorithm-visible slice of a round.
struct RoundView {
  int outcome = 0;
  double value = 0.0;
  double payment = 0.0;
  double utility = 0.0;
};

inline RoundView visible(const RoundOutcome& r) {
  return {r.outcome, r.value, r.payment, r.utility};
}

/// Finite supply: worker types with mixture weights.
struct FiniteMixtureModel {
  std::vector<WorkerType> types;
  Vec weights;  // non-negative, sums to 1 within 1e-12
};

/// High-low market component: the cost c_h for high effort is drawn from the
/// given CDF; theta_h is the probability of the high outcome under high
/// effort. Acceptance probability S(p) = sum_k w_k theta_k CDF_k(theta_k p).
struct HighLowComponent {
  double weight = 1.0;
  double theta_h = 1.0;
  PiecewiseLinear cost_cdf;
};

struct HighLowModel {
  std::vector<HighLowComponent> components;
};

/// Single non-null outcome, buying side: the worker accepts a task at price p
/// with probability S(p), non-decreasing. Expected utility S(p) * (v - p).
struct TaskPricingModel {
  PiecewiseLinear accept_prob;
  double item_value = 1.0;
};

/// Single non-null outcome, selling side: a sale at price p happens with
/// probability S(p), non-increasing. Per-round reward p * 1{sale}, carried as
/// a negative payment so that utility = value - payment still holds.
struct InventoryModel {
  PiecewiseLinear sale_prob;
};

class Environment {
 public:
  Environment(OutcomeSpace outcomes, FiniteMixtureModel model);
  Environment(OutcomeSpace outcomes, HighLowModel model);
  Environment(OutcomeSpace outcomes, TaskPricingModel model);
  Environment(OutcomeSpace outcomes, InventoryModel model);

  const OutcomeSpace& outcomes() const { return outcomes_; }
  int m() const { return outcomes_.m(); }

  /// One simulated round: sample a worker i.i.d. from the supply, let it best
  /// respond, sample the outcome. Deterministic given the rng state.
  RoundOutcome play_round(const Contract& x, Rng& rng) const;

  /// Exact expected value/payment/utility of posting x, no sampling.
  UtilityBreakdown exact_utility(const Contract& x) const;

  bool is_inventory() const {
    return std::holds_alternative<InventoryModel>(model_);
  }
  bool is_task_pricing() const {
    return std::holds_alternative<TaskPricingModel>(model_);
  }

  /// S(p) for the single-price families (task pricing / inventory).
  double sale_probability(double price) const;

  const char* kind() const;

  const FiniteMixtureModel* finite_mixture() const {
    return std::get_if<FiniteMixtureModel>(&model_);
  }
  const HighLowModel* high_low() const {
    return std::get_if<HighLowModel>(&model_);
  }

 private:
  OutcomeSpace outcomes_;
  std::variant<FiniteMixtureModel, HighLowModel, TaskPricingModel,
               InventoryModel>
      model_;
};

/// A high-low worker type: efforts {null, low, high}, outcomes
/// {null, low, high}; high effort yields the high outcome with probability
/// theta_h, low effort the low outcome deterministically at zero cost. Ties
/// break high > low > null.
WorkerType high_low_type(double c_h, double theta_h);

// The simulation-study markets: values (0, 0.3, 1), theta_h = 0.8.
Environment make_uniform_market();
Environment make_homogeneous_market(double c_h);
Environment make_two_type_market(double c_h1, double c_h2);

/// Generic parametric high-low market with a single component.
Environment make_high_low_market(double v_high, double v_low, double theta_h,
                                 PiecewiseLinear cost_cdf);

Environment make_task_pricing(PiecewiseLinear accept_prob, double v);

/// Task pricing whose cost distribution is piecewise uniform with the given
/// densities on consecutive [breakpoints] intervals; densities must lie in
/// [1/lambda, lambda] and integrate to 1.
Environment make_piecewise_uniform_taskpricing(
    const std::vector<double>& breakpoints, const std::vector<double>& densities,
    double lambda, double v);

/// Task-pricing lower-bound instance: U(p) = 1/4 on the comb
/// {4*j*delta} within [2/5, 3/5], with a single off-grid point
/// p* = 4*j**delta + delta/2 where U(p*) = 1/4 + delta/4; S(0) = 0,
/// S(1) = 1, linear interpolation elsewhere. Requires 0 < delta < 1/20.
Environment make_staircase_instance(double delta);

/// The chosen off-grid bump location of the staircase instance.
double staircase_bump_price(double delta);

/// Single-type instance whose unique optimal (unrestricted) contract is not
/// monotone: low effort yields outcomes {1,3} equiprobably at zero cost, high
/// effort yields {2,3} equiprobably at cost cost_h < 0.5*(v2 - v1).
Environment make_nonmonotone_example(double cost_h,
                                     Vec values = (Vec(4) << 0, 0, 0.6, 1).finished());

Environment make_inventory_env(PiecewiseLinear sale_prob);

/// Environment from JSON: either {"values": [...], "types": [...]} for a
/// finite mixture, or {"market": "...", ...params} for the built-in families.
Environment load_environment(const nlohmann::json& spec);

WorkerType load_worker_type(const nlohmann::json& spec, int m);

}  // namespace dcd
