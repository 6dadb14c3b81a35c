#include "dcd/envs.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcd {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Environment::Environment(OutcomeSpace outcomes, FiniteMixtureModel model)
    : outcomes_(std::move(outcomes)), model_(std::move(model)) {
  auto& fm = std::get<FiniteMixtureModel>(model_);
  require(!fm.types.empty(), "FiniteMixture: needs at least one type");
  require(fm.weights.size() == static_cast<Eigen::Index>(fm.types.size()),
          "FiniteMixture: one weight per type");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < fm.weights.size(); ++i) {
    require(fm.weights(i) >= 0.0, "FiniteMixture: weights must be >= 0");
    sum += fm.weights(i);
  }
  require(std::abs(sum - 1.0) <= 1e-12, "FiniteMixture: weights must sum to 1");
  for (const auto& t : fm.types) {
    require(t.m() == outcomes_.m(), "FiniteMixture: type outcome count mismatch");
    auto report = validate_type(t);
    require(report.ok, "FiniteMixture: invalid type: " + report.message);
  }
}

Environment::Environment(OutcomeSpace outcomes, HighLowModel model)
    : outcomes_(std::move(outcomes)), model_(std::move(model)) {
  require(outcomes_.m() == 2, "HighLow: needs outcomes {null, low, high}");
  auto& hl = std::get<HighLowModel>(model_);
  require(!hl.components.empty(), "HighLow: needs at least one component");
  double sum = 0.0;
  for (const auto& c : hl.components) {
    require(c.weight >= 0.0, "HighLow: weights must be >= 0");
    require(c.theta_h >= 0.0 && c.theta_h <= 1.0, "HighLow: theta_h in [0,1]");
    require(c.cost_cdf.non_decreasing(), "HighLow: cost CDF must be non-decreasing");
    sum += c.weight;
  }
  require(std::abs(sum - 1.0) <= 1e-12, "HighLow: weights must sum to 1");
}

Environment::Environment(OutcomeSpace outcomes, TaskPricingModel model)
    : outcomes_(std::move(outcomes)), model_(std::move(model)) {
  require(outcomes_.m() == 1, "TaskPricing: single non-null outcome");
  auto& tp = std::get<TaskPricingModel>(model_);
  require(tp.accept_prob.non_decreasing(),
          "TaskPricing: S must be non-decreasing");
  for (double y : tp.accept_prob.values())
    require(y >= 0.0 && y <= 1.0, "TaskPricing: S must lie in [0,1]");
  require(outcomes_.value(1) == tp.item_value,
          "TaskPricing: outcome value must equal the item value");
}

Environment::Environment(OutcomeSpace outcomes, InventoryModel model)
    : outcomes_(std::move(outcomes)), model_(std::move(model)) {
  require(outcomes_.m() == 1, "Inventory: single non-null outcome");
  auto& inv = std::get<InventoryModel>(model_);
  require(inv.sale_prob.non_increasing(),
          "Inventory: S must be non-increasing in the price");
  for (double y : inv.sale_prob.values())
    require(y >= 0.0 && y <= 1.0, "Inventory: S must lie in [0,1]");
}

double Environment::sale_probability(double price) const {
  if (const auto* tp = std::get_if<TaskPricingModel>(&model_))
    return tp->accept_prob(price);
  if (const auto* inv = std::get_if<InventoryModel>(&model_))
    return inv->sale_prob(price);
  throw std::logic_error("sale_probability: not a single-price environment");
}

const char* Environment::kind() const {
  switch (model_.index()) {
    case 0: return "finite_mixture";
    case 1: return "high_low";
    case 2: return "task_pricing";
    default: return "inventory";
  }
}

namespace {

double high_low_S(const HighLowModel& hl, double p) {
  double s = 0.0;
  for (const auto& c : hl.components)
    s += c.weight * c.theta_h * c.cost_cdf(c.theta_h * p);
  return s;
}

}  // namespace

RoundOutcome Environment::play_round(const Contract& x, Rng& rng) const {
  require(x.m() == m(), "play_round: contract dimension mismatch");
  RoundOutcome r;
  if (const auto* fm = std::get_if<FiniteMixtureModel>(&model_)) {
    double u = rng.uniform();
    std::size_t i = 0;
    for (; i + 1 < fm->types.size(); ++i) {
      u -= fm->weights(static_cast<Eigen::Index>(i));
      if (u < 0.0) break;
    }
    const WorkerType& type = fm->types[i];
    const int e = best_response(type, x);
    const double draw = rng.uniform();
    double acc = 0.0;
    int pi = type.m();
    for (int o = 0; o <= type.m(); ++o) {
      acc += type.production(e, o);
      if (draw < acc) {
        pi = o;
        break;
      }
    }
    r.outcome = pi;
    r.value = outcomes_.value(pi);
    r.payment = x.payment(pi);
    r.type_id = static_cast<int>(i);
    r.effort = e;
  } else if (const auto* hl = std::get_if<HighLowModel>(&model_)) {
    double u = rng.uniform();
    std::size_t k = 0;
    for (; k + 1 < hl->components.size(); ++k) {
      u -= hl->components[k].weight;
      if (u < 0.0) break;
    }
    const auto& comp = hl->components[k];
    const double c_h = comp.cost_cdf.inverse(rng.uniform());
    const double p = x.increment(1);
    // high effort iff theta_h * p - c_h >= 0, ties toward high
    const bool high = comp.theta_h * p - c_h >= -kTieBand;
    int pi = 1;
    int effort = 1;
    if (high) {
      effort = 2;
      pi = rng.bernoulli(comp.theta_h) ? 2 : 1;
    }
    r.outcome = pi;
    r.value = outcomes_.value(pi);
    r.payment = x.payment(pi);
    r.type_id = static_cast<int>(k);
    r.effort = effort;
  } else if (const auto* tp = std::get_if<TaskPricingModel>(&model_)) {
    const double p = x.increment(0);
    const bool accept = rng.bernoulli(tp->accept_prob(p));
    r.outcome = accept ? 1 : 0;
    r.value = accept ? tp->item_value : 0.0;
    r.payment = accept ? p : 0.0;
    r.effort = accept ? 1 : 0;
  } else {
    const auto& inv = std::get<InventoryModel>(model_);
    const double p = x.increment(0);
    const bool sale = rng.bernoulli(inv.sale_prob(p));
    r.outcome = sale ? 1 : 0;
    r.value = 0.0;
    r.payment = sale ? -p : 0.0;  // revenue carried as negative payment
    r.effort = sale ? 1 : 0;
  }
  r.utility = r.value - r.payment;
  return r;
}

UtilityBreakdown Environment::exact_utility(const Contract& x) const {
  require(x.m() == m(), "exact_utility: contract dimension mismatch");
  UtilityBreakdown out;
  if (const auto* fm = std::get_if<FiniteMixtureModel>(&model_)) {
    for (std::size_t i = 0; i < fm->types.size(); ++i) {
      const auto b = expected_breakdown_for_type(fm->types[i], outcomes_, x);
      const double w = fm->weights(static_cast<Eigen::Index>(i));
      out.value += w * b.value;
      out.payment += w * b.payment;
    }
  } else if (const auto* hl = std::get_if<HighLowModel>(&model_)) {
    const double b = x.increment(0);
    const double p = x.increment(1);
    const double s = high_low_S(*hl, p);
    const double v_low = outcomes_.value(1), v_high = outcomes_.value(2);
    out.value = v_low + (v_high - v_low) * s;
    out.payment = b + p * s;
  } else if (const auto* tp = std::get_if<TaskPricingModel>(&model_)) {
    const double p = x.increment(0);
    const double s = tp->accept_prob(p);
    out.value = tp->item_value * s;
    out.payment = p * s;
  } else {
    const auto& inv = std::get<InventoryModel>(model_);
    const double p = x.increment(0);
    out.value = 0.0;
    out.payment = -p * inv.sale_prob(p);
  }
  out.utility = out.value - out.payment;
  return out;
}

WorkerType high_low_type(double c_h, double theta_h) {
  WorkerType t;
  t.costs = (Vec(3) << 0.0, 0.0, c_h).finished();
  t.production = Mat(3, 3);
  t.production << 1.0, 0.0, 0.0,             // null
      0.0, 1.0, 0.0,                          // low
      0.0, 1.0 - theta_h, theta_h;            // high
  t.tiebreak = {2, 1, 0};                     // high > low > null
  return t;
}

namespace {

OutcomeSpace study_outcomes() {
  return OutcomeSpace((Vec(3) << 0.0, 0.3, 1.0).finished());
}

}  // namespace

Environment make_uniform_market() {
  HighLowModel hl;
  hl.components.push_back({1.0, 0.8, PiecewiseLinear::identity()});
  return Environment(study_outcomes(), std::move(hl));
}

Environment make_homogeneous_market(double c_h) {
  require(c_h >= 0.0 && c_h <= 1.0, "make_homogeneous_market: c_h in [0,1]");
  FiniteMixtureModel fm;
  fm.types.push_back(high_low_type(c_h, 0.8));
  fm.weights = Vec::Ones(1);
  return Environment(study_outcomes(), std::move(fm));
}

Environment make_two_type_market(double c_h1, double c_h2) {
  require(c_h1 >= 0.0 && c_h1 <= 1.0 && c_h2 >= 0.0 && c_h2 <= 1.0,
          "make_two_type_market: costs in [0,1]");
  FiniteMixtureModel fm;
  fm.types.push_back(high_low_type(c_h1, 0.8));
  fm.types.push_back(high_low_type(c_h2, 0.8));
  fm.weights = (Vec(2) << 0.5, 0.5).finished();
  return Environment(study_outcomes(), std::move(fm));
}

Environment make_high_low_market(double v_high, double v_low, double theta_h,
                                 PiecewiseLinear cost_cdf) {
  HighLowModel hl;
  hl.components.push_back({1.0, theta_h, std::move(cost_cdf)});
  return Environment(OutcomeSpace((Vec(3) << 0.0, v_low, v_high).finished()),
                     std::move(hl));
}

Environment make_task_pricing(PiecewiseLinear accept_prob, double v) {
  TaskPricingModel tp{std::move(accept_prob), v};
  return Environment(OutcomeSpace((Vec(2) << 0.0, v).finished()),
                     std::move(tp));
}

Environment make_piecewise_uniform_taskpricing(
    const std::vector<double>& breakpoints, const std::vector<double>& densities,
    double lambda, double v) {
  require(lambda >= 1.0, "piecewise-uniform: lambda >= 1");
  require(breakpoints.size() == densities.size() + 1,
          "piecewise-uniform: needs one more breakpoint than densities");
  require(std::abs(breakpoints.front()) <= 1e-12 &&
              std::abs(breakpoints.back() - 1.0) <= 1e-12,
          "piecewise-uniform: support must be [0,1]");
  double mass = 0.0;
  std::vector<double> ys = {0.0};
  for (std::size_t i = 0; i < densities.size(); ++i) {
    require(breakpoints[i + 1] > breakpoints[i],
            "piecewise-uniform: breakpoints must increase");
    require(densities[i] >= 1.0 / lambda - 1e-12 &&
                densities[i] <= lambda + 1e-12,
            "piecewise-uniform: density outside [1/lambda, lambda]");
    mass += densities[i] * (breakpoints[i + 1] - breakpoints[i]);
    ys.push_back(mass);
  }
  require(std::abs(mass - 1.0) <= 1e-9,
          "piecewise-uniform: densities must integrate to 1");
  ys.back() = 1.0;
  return make_task_pricing(PiecewiseLinear(breakpoints, std::move(ys)), v);
}

double staircase_bump_price(double delta) {
  require(delta > 0.0 && delta < 0.05, "staircase: 0 < delta < 1/20");
  const auto j_min = static_cast<long long>(
      std::ceil(0.1 / delta - 0.125 - 1e-9));
  const auto j_max = static_cast<long long>(
      std::floor(0.15 / delta - 0.125 + 1e-9));
  auto j = static_cast<long long>(std::floor(0.125 / delta));
  j = std::min(std::max(j, j_min), j_max);
  return 4.0 * static_cast<double>(j) * delta + delta / 2.0;
}

Environment make_staircase_instance(double delta) {
  require(delta > 0.0 && delta < 0.05, "staircase: 0 < delta < 1/20");
  const auto j_lo = static_cast<long long>(std::ceil(0.1 / delta - 1e-9));
  const auto j_hi = static_cast<long long>(std::floor(0.15 / delta + 1e-9));
  require(j_lo <= j_hi, "staircase: empty comb");

  std::vector<std::pair<double, double>> knots;
  knots.emplace_back(0.0, 0.0);
  for (long long j = j_lo; j <= j_hi; ++j) {
    const double p = 4.0 * static_cast<double>(j) * delta;
    knots.emplace_back(p, 0.25 / (1.0 - p));
  }
  const double p_star = staircase_bump_price(delta);
  knots.emplace_back(p_star, (0.25 + delta / 4.0) / (1.0 - p_star));
  knots.emplace_back(1.0, 1.0);
  std::sort(knots.begin(), knots.end());

  std::vector<double> xs, ys;
  xs.reserve(knots.size());
  ys.reserve(knots.size());
  for (const auto& [x, y] : knots) {
    xs.push_back(x);
    ys.push_back(y);
  }
  return make_task_pricing(PiecewiseLinear(std::move(xs), std::move(ys)), 1.0);
}

Environment make_nonmonotone_example(double cost_h, Vec values) {
  OutcomeSpace outcomes(std::move(values));
  require(outcomes.m() == 3, "nonmonotone example: needs m = 3");
  require(cost_h > 0.0 &&
              cost_h < 0.5 * (outcomes.value(2) - outcomes.value(1)),
          "nonmonotone example: need 0 < cost_h < 0.5*(v(2)-v(1))");
  WorkerType t;
  t.costs = (Vec(3) << 0.0, 0.0, cost_h).finished();
  t.production = Mat(3, 4);
  t.production << 1.0, 0.0, 0.0, 0.0,  // null
      0.0, 0.5, 0.0, 0.5,              // low: outcomes {1,3} equally likely
      0.0, 0.0, 0.5, 0.5;              // high: outcomes {2,3} equally likely
  t.tiebreak = {2, 1, 0};
  FiniteMixtureModel fm;
  fm.types.push_back(std::move(t));
  fm.weights = Vec::Ones(1);
  return Environment(std::move(outcomes), std::move(fm));
}

Environment make_inventory_env(PiecewiseLinear sale_prob) {
  InventoryModel inv{std::move(sale_prob)};
  return Environment(OutcomeSpace((Vec(2) << 0.0, 0.0).finished()),
                     std::move(inv));
}

namespace {

PiecewiseLinear load_curve(const nlohmann::json& spec) {
  return PiecewiseLinear(spec.at("x").get<std::vector<double>>(),
                         spec.at("y").get<std::vector<double>>());
}

}  // namespace

WorkerType load_worker_type(const nlohmann::json& spec, int m) {
  WorkerType t;
  t.costs = to_vec(spec.at("costs").get<std::vector<double>>());
  const auto rows = spec.at("production").get<std::vector<std::vector<double>>>();
  t.production = Mat(static_cast<Eigen::Index>(rows.size()), m + 1);
  for (std::size_t e = 0; e < rows.size(); ++e) {
    require(static_cast<int>(rows[e].size()) == m + 1,
            "worker type: production row width mismatch");
    for (int pi = 0; pi <= m; ++pi)
      t.production(static_cast<Eigen::Index>(e), pi) = rows[e][pi];
  }
  if (spec.contains("tiebreak")) {
    t.tiebreak = spec.at("tiebreak").get<std::vector<int>>();
  } else {
    t.tiebreak = default_tiebreak_order(t);
  }
  return t;
}

Environment load_environment(const nlohmann::json& spec) {
  if (spec.contains("market")) {
    const std::string market = spec.at("market").get<std::string>();
    if (market == "uniform") return make_uniform_market();
    if (market == "homogeneous")
      return make_homogeneous_market(spec.at("c_h").get<double>());
    if (market == "two_type")
      return make_two_type_market(spec.at("c_h1").get<double>(),
                                  spec.at("c_h2").get<double>());
    if (market == "highlow")
      return make_high_low_market(
          spec.at("v_high").get<double>(), spec.at("v_low").get<double>(),
          spec.at("theta_h").get<double>(), load_curve(spec.at("cost_cdf")));
    if (market == "taskpricing") {
      const double v = spec.at("v").get<double>();
      if (spec.contains("curve")) {
        return make_task_pricing(load_curve(spec.at("curve")), v);
      }
      return make_piecewise_uniform_taskpricing(
          spec.at("breakpoints").get<std::vector<double>>(),
          spec.at("densities").get<std::vector<double>>(),
          spec.value("lambda", 4.0), v);
    }
    if (market == "staircase")
      return make_staircase_instance(spec.at("delta").get<double>());
    if (market == "nonmonotone") {
      if (spec.contains("values"))
        return make_nonmonotone_example(
            spec.at("cost_h").get<double>(),
            to_vec(spec.at("values").get<std::vector<double>>()));
      return make_nonmonotone_example(spec.at("cost_h").get<double>());
    }
    if (market == "inventory")
      return make_inventory_env(load_curve(spec.at("curve")));
    throw std::invalid_argument("unknown market: " + market);
  }
  OutcomeSpace outcomes(to_vec(spec.at("values").get<std::vector<double>>()));
  FiniteMixtureModel fm;
  std::vector<double> weights;
  for (const auto& type_spec : spec.at("types")) {
    weights.push_back(type_spec.at("weight").get<double>());
    fm.types.push_back(load_worker_type(type_spec, outcomes.m()));
  }
  fm.weights = to_vec(weights);
  return Environment(std::move(outcomes), std::move(fm));
}

}  // namespace dcd
