#include "dcd/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcd {

std::string policy_name(const Policy& policy) {
  switch (policy.kind) {
    case PolicyKind::Ucb1: return "ucb1";
    case PolicyKind::Ucb1Constant: return "ucb1_constant";
    default: return "thompson";
  }
}

double ucb1_index(const ArmStats& arm, double t, const Policy& policy) {
  if (arm.pulls <= 0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(arm.pulls);
  if (policy.kind == PolicyKind::Ucb1)
    return arm.mean() + std::sqrt(2.0 * std::log(t) / n);
  return arm.mean() + policy.c / std::sqrt(n);
}

GaussianPosterior thompson_posterior(const ArmStats& arm) {
  const double n = static_cast<double>(arm.pulls);
  return {(0.5 + arm.reward_sum) / (1.0 + n), 1.0 / (1.0 + n)};
}

double thompson_draw(const ArmStats& arm, Rng& rng) {
  const auto post = thompson_posterior(arm);
  return rng.normal(post.mean, std::sqrt(post.variance));
}

RunRecord nonadaptive_run(const Environment& env, const CandidateSet& set,
                          const Policy& policy, std::int64_t T,
                          std::uint64_t seed, LogMode log_mode) {
  if (!set.finite())
    throw std::invalid_argument("nonadaptive_run: infinite candidate set");
  std::vector<Contract> arms = set.enumerate();
  if (arms.empty())
    throw std::invalid_argument("nonadaptive_run: empty candidate set");

  Rng rng(seed);
  rng.shuffle(arms);
  std::vector<ArmStats> stats(arms.size());

  RunRecord record;
  record.policy = policy_name(policy);
  record.seed = seed;
  record.T = T;
  if (log_mode == LogMode::Rows) record.rows.reserve(static_cast<std::size_t>(T));
  if (log_mode != LogMode::Summary)
    record.utilities.reserve(static_cast<std::size_t>(T));

  const std::size_t A = arms.size();
  for (std::int64_t t = 1; t <= T; ++t) {
    std::size_t choice = 0;
    if (static_cast<std::size_t>(t) <= A) {
      choice = static_cast<std::size_t>(t - 1);  // initialization sweep
    } else if (policy.kind == PolicyKind::ThompsonGaussian) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < A; ++a) {
        const double draw = thompson_draw(stats[a], rng);
        if (draw > best) {
          best = draw;
          choice = a;
        }
      }
    } else {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < A; ++a) {
        const double idx = ucb1_index(stats[a], static_cast<double>(t), policy);
        if (idx > best) {
          best = idx;
          choice = a;
        }
      }
    }

    const RoundView obs = visible(env.play_round(arms[choice], rng));
    stats[choice].pulls += 1;
    stats[choice].reward_sum += obs.utility;
    record.cumulative_utility += obs.utility;

    if (log_mode != LogMode::Summary) record.utilities.push_back(obs.utility);
    if (log_mode == LogMode::Rows) {
      RoundRow row;
      row.t = t;
      row.cell = contract_label(arms[choice]);
      row.anchor_sign = 0;
      row.posted = arms[choice];
      row.obs = obs;
      row.zoomed = false;
      row.active_cells = A;
      record.rows.push_back(std::move(row));
    }
  }
  return record;
}

}  // namespace dcd
