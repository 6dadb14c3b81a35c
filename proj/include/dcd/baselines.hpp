#pragma once

#include <cstdint>
#include <string>

#include "dcd/envs.hpp"
#include "dcd/mesh.hpp"
#include "dcd/zooming.hpp"

namespace dcd {

struct ArmStats {
  std::int64_t pulls = 0;
  double reward_sum = 0.0;

  double mean() const { return reward_sum / static_cast<double>(pulls); }
};

enum class PolicyKind { Ucb1, Ucb1Constant, ThompsonGaussian };

struct Policy {
  PolicyKind kind = PolicyKind::Ucb1Constant;
  double c = 1.0;  // exploration constant for Ucb1Constant
};

std::string policy_name(const Policy& policy);

/// UCB index of an arm at round t: average reward plus the exploration
/// bonus (sqrt(2 ln t / n) classical, c / sqrt(n) constant variant).
/// +infinity for an unpulled arm.
double ucb1_index(const ArmStats& arm, double t, const Policy& policy);

struct GaussianPosterior {
  double mean = 0.5;
  double variance = 1.0;
};

/// Posterior under prior Normal(0.5, 1) and unit observation variance:
/// mean (0.5 + sum) / (1 + n), variance 1 / (1 + n).
GaussianPosterior thompson_posterior(const ArmStats& arm);

double thompson_draw(const ArmStats& arm, Rng& rng);

/// Non-adaptive baseline: treats the finite candidate set as bandit arms,
/// randomly permuted under the seed, each arm pulled once up front, then the
/// policy's choice each round. The log matches the zooming schema with the
/// cell column carrying the arm's contract.
RunRecord nonadaptive_run(const Environment& env, const CandidateSet& set,
                          const Policy& policy, std::int64_t T,
                          std::uint64_t seed, LogMode log_mode = LogMode::Rows);

}  // namespace dcd
