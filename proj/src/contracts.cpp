#include "dcd/contracts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dcd {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

OutcomeSpace::OutcomeSpace(Vec values) : values_(std::move(values)) {
  require(values_.size() >= 1, "OutcomeSpace: needs at least the null outcome");
  require(values_(0) == 0.0, "OutcomeSpace: null outcome must have value 0");
  for (int i = 0; i < values_.size(); ++i) {
    require(values_(i) >= 0.0 && values_(i) <= 1.0,
            "OutcomeSpace: values must lie in [0,1]");
    if (i > 0) {
      require(values_(i) >= values_(i - 1),
              "OutcomeSpace: values must be non-decreasing in the index");
    }
  }
}

Contract::Contract(Vec increments) : increments_(std::move(increments)) {
  require(increments_.size() >= 1, "Contract: needs at least one increment");
  for (int j = 0; j < increments_.size(); ++j) {
    double w = increments_(j);
    // Tolerate float dust from grid arithmetic (e.g. 50 * 0.02), then clamp.
    require(w >= -1e-12 && w <= 1.0 + 1e-9,
            "Contract: increments must lie in [0,1]");
    increments_(j) = std::min(1.0, std::max(0.0, w));
  }
}

double Contract::payment(int pi) const {
  double x = 0.0;
  for (int j = 0; j < pi; ++j) x += increments_(j);
  return x;
}

Vec Contract::payments() const {
  Vec x(m() + 1);
  x(0) = 0.0;
  for (int j = 0; j < m(); ++j) x(j + 1) = x(j) + increments_(j);
  return x;
}

bool dominates(const Contract& a, const Contract& b) {
  if (a.m() != b.m()) throw std::invalid_argument("dominates: dimension mismatch");
  return (a.increments().array() >= b.increments().array()).all();
}

Mat WorkerType::upper_cumulative() const {
  Mat F(production.rows(), production.cols());
  for (int e = 0; e < production.rows(); ++e) {
    double acc = 0.0;
    for (int pi = static_cast<int>(production.cols()) - 1; pi >= 0; --pi) {
      acc += production(e, pi);
      F(e, pi) = acc;
    }
  }
  return F;
}

FosdOrdering fosd_compare(const WorkerType& type, int e, int e2) {
  const Mat F = type.upper_cumulative();
  bool first_ge = true, second_ge = true, strict_first = false,
       strict_second = false;
  for (int pi = 0; pi <= type.m(); ++pi) {
    const double a = F(e, pi), b = F(e2, pi);
    if (a > b) {
      second_ge = false;
      strict_first = true;
    } else if (a < b) {
      first_ge = false;
      strict_second = true;
    }
  }
  if (first_ge && second_ge) return FosdOrdering::Equal;
  if (first_ge && strict_first) return FosdOrdering::FirstDominates;
  if (second_ge && strict_second) return FosdOrdering::SecondDominates;
  return FosdOrdering::Incomparable;
}

std::vector<int> default_tiebreak_order(const WorkerType& type) {
  std::vector<int> order(type.efforts());
  for (int e = 0; e < type.efforts(); ++e) order[e] = e;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return fosd_compare(type, a, b) == FosdOrdering::FirstDominates;
  });
  return order;
}

TypeReport validate_type(const WorkerType& type) {
  const int E = type.efforts();
  const int cols = static_cast<int>(type.production.cols());
  auto fail = [](std::string msg) { return TypeReport{false, std::move(msg)}; };

  if (E < 1 || type.production.rows() != E)
    return fail("production must have one row per effort level");
  if (cols < 1) return fail("production must cover the null outcome");
  if (type.costs(0) != 0.0) return fail("null effort must have zero cost");
  for (int e = 0; e < E; ++e) {
    if (type.costs(e) < 0.0) return fail("costs must be non-negative");
  }
  for (int e = 0; e < E; ++e) {
    double sum = 0.0;
    for (int pi = 0; pi < cols; ++pi) {
      if (type.production(e, pi) < 0.0)
        return fail("production probabilities must be non-negative");
      sum += type.production(e, pi);
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "production row " << e << " sums to " << sum << ", expected 1";
      return fail(os.str());
    }
  }
  if (type.production(0, 0) != 1.0)
    return fail("null effort must deterministically yield the null outcome");
  for (int e = 1; e < E; ++e) {
    if (type.production(e, 0) != 0.0)
      return fail("null outcome reachable from non-null effort");
  }
  for (int e = 0; e < E; ++e) {
    for (int e2 = e + 1; e2 < E; ++e2) {
      if (fosd_compare(type, e, e2) == FosdOrdering::Incomparable) {
        std::ostringstream os;
        os << "FOSD fails for pair (" << e << "," << e2 << ")";
        return fail(os.str());
      }
    }
  }
  if (static_cast<int>(type.tiebreak.size()) != E)
    return fail("tiebreak order must rank every effort level");
  std::vector<bool> seen(E, false);
  for (int e : type.tiebreak) {
    if (e < 0 || e >= E || seen[e])
      return fail("tiebreak order must be a permutation of the effort levels");
    seen[e] = true;
  }
  return TypeReport{};
}

int best_response_payments(const WorkerType& type,
                           const Eigen::Ref<const Vec>& payments) {
  const int E = type.efforts();
  Vec worker_utility(E);
  for (int e = 0; e < E; ++e) {
    worker_utility(e) = type.production.row(e).dot(payments) - type.costs(e);
  }
  const double best = worker_utility.maxCoeff();
  // Ties (within the band) go to the most preferred effort in the fixed
  // priority order, so the same tie resolves identically at every contract.
  for (int e : type.tiebreak) {
    if (worker_utility(e) >= best - kTieBand) return e;
  }
  return 0;  // unreachable for a valid tiebreak permutation
}

int best_response(const WorkerType& type, const Contract& x) {
  return best_response_payments(type, x.payments());
}

UtilityBreakdown breakdown_for_payments(const WorkerType& type,
                                        const OutcomeSpace& outcomes,
                                        const Eigen::Ref<const Vec>& payments) {
  const int e = best_response_payments(type, payments);
  UtilityBreakdown out;
  out.value = type.production.row(e).dot(outcomes.values());
  out.payment = type.production.row(e).dot(payments);
  out.utility = out.value - out.payment;
  return out;
}

UtilityBreakdown expected_breakdown_for_type(const WorkerType& type,
                                             const OutcomeSpace& outcomes,
                                             const Contract& x) {
  return breakdown_for_payments(type, outcomes, x.payments());
}

int sample_outcome(const WorkerType& type, const Contract& x, Rng& rng) {
  const int e = best_response(type, x);
  const double u = rng.uniform();
  double acc = 0.0;
  const int last = type.m();
  for (int pi = 0; pi <= last; ++pi) {
    acc += type.production(e, pi);
    if (u < acc) return pi;
  }
  return last;
}

}  // namespace dcd
