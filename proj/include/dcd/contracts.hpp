#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "dcd/rng.hpp"

namespace dcd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Utilities within this band of the maximum are treated as a tie and
/// resolved by the worker's fixed priority order.
inline constexpr double kTieBand = 1e-12;

/// Outcome set {0,1,...,m} with requester values. Index 0 is the null
/// outcome (task not completed): zero value, zero payment. Values are
/// non-decreasing in the index and lie in [0,1].
class OutcomeSpace {
 public:
  explicit OutcomeSpace(Vec values);

  int m() const { return static_cast<int>(values_.size()) - 1; }
  int count() const { return static_cast<int>(values_.size()); }
  double value(int pi) const { return values_(pi); }
  const Vec& values() const { return values_; }

 private:
  Vec values_;
};

/// Monotone contract in increment representation: w in [0,1]^m with payments
/// x(pi) = sum_{j<=pi} w_j and x(0) = 0. Always weakly bounded by
/// construction; bounded() additionally requires the payments to stay in
/// [0,1], i.e. the increments to sum to at most 1.
class Contract {
 public:
  explicit Contract(Vec increments);

  static Contract zero(int m) { return Contract(Vec::Zero(m)); }

  int m() const { return static_cast<int>(increments_.size()); }
  const Vec& increments() const { return increments_; }
  double increment(int j) const { return increments_(j); }

  /// x(pi); pi in [0, m], x(0) = 0.
  double payment(int pi) const;
  /// All payments as a vector of size m+1.
  Vec payments() const;
  /// Total payment x(m).
  double total() const { return increments_.sum(); }

  bool bounded(double tol = 1e-12) const { return total() <= 1.0 + tol; }

  bool operator==(const Contract& other) const {
    return increments_ == other.increments_;
  }

 private:
  Vec increments_;
};

/// True iff every increment of a is >= the corresponding increment of b.
bool dominates(const Contract& a, const Contract& b);

/// A worker: effort costs, production function, and a fixed priority order
/// used to break exact ties between effort levels. Effort 0 is the null
/// effort (cost 0, deterministically yields the null outcome).
struct WorkerType {
  Vec costs;                  // size E, costs(0) == 0
  Mat production;             // E x (m+1), row e = f(.|e), rows sum to 1
  std::vector<int> tiebreak;  // effort indices, most preferred first

  int efforts() const { return static_cast<int>(costs.size()); }
  int m() const { return static_cast<int>(production.cols()) - 1; }

  /// Upper-cumulative production, F(pi|e) = sum_{pi' >= pi} f(pi'|e).
  Mat upper_cumulative() const;
};

enum class FosdOrdering { FirstDominates, SecondDominates, Equal, Incomparable };

/// Compares two effort levels of a type by first-order stochastic dominance
/// of their upper-cumulative outcome distributions.
FosdOrdering fosd_compare(const WorkerType& type, int e, int e2);

/// Priority order sorting efforts descending by FOSD dominance, so that a
/// dominant effort wins exact ties. Requires the FOSD assumption to yield a
/// total order; equal rows keep their index order.
std::vector<int> default_tiebreak_order(const WorkerType& type);

struct TypeReport {
  bool ok = true;
  std::string message;
};

/// Checks all WorkerType invariants; reports the first violation instead of
/// aborting.
TypeReport validate_type(const WorkerType& type);

/// The worker's strategic effort choice under an arbitrary payment rule
/// (payments indexed by outcome, payments[0] expected to be 0): maximizes
/// expected payment minus cost, ties within kTieBand resolved by the type's
/// priority order.
int best_response_payments(const WorkerType& type,
                           const Eigen::Ref<const Vec>& payments);

int best_response(const WorkerType& type, const Contract& x);

struct UtilityBreakdown {
  double value = 0.0;    // expected requester value V
  double payment = 0.0;  // expected payment P
  double utility = 0.0;  // U = V - P
};

/// Exact expected value/payment/utility of a payment rule against one worker
/// type, via the worker's best response. No sampling.
UtilityBreakdown breakdown_for_payments(const WorkerType& type,
                                        const OutcomeSpace& outcomes,
                                        const Eigen::Ref<const Vec>& payments);

UtilityBreakdown expected_breakdown_for_type(const WorkerType& type,
                                             const OutcomeSpace& outcomes,
                                             const Contract& x);

/// Draws one outcome from the production row of the worker's best response.
int sample_outcome(const WorkerType& type, const Contract& x, Rng& rng);

}  // namespace dcd
