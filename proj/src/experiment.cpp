#include "dcd/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dcd {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

AlgorithmSpec AlgorithmSpec::from_json(const nlohmann::json& spec) {
  AlgorithmSpec algo;
  const std::string name = spec.at("name").get<std::string>();
  algo.name = name;
  if (name == "zooming") {
    algo.kind = Kind::Zooming;
    const std::string mode = spec.value("mode", std::string("constant"));
    if (mode == "theoretical") {
      algo.zoom.mode = ZoomConfig::Mode::Theoretical;
      algo.zoom.c_rad = spec.value("c_rad", 16.0);
    } else if (mode == "constant") {
      algo.zoom.mode = ZoomConfig::Mode::Constant;
      algo.zoom.c_select = spec.value("c_select", 1.0);
      algo.zoom.c_zoom = spec.value("c_zoom", 0.6);
    } else {
      throw std::invalid_argument("algorithm: unknown zooming mode " + mode);
    }
    algo.zoom.depth_cap = spec.value("depth_cap", 20);
    if (spec.value("width_estimator", std::string("general")) == "inventory")
      algo.zoom.width_estimator = WidthEstimator::InventoryTwoOutcome;
  } else if (name == "ucb1") {
    algo.kind = Kind::Baseline;
    algo.policy = {PolicyKind::Ucb1, 0.0};
  } else if (name == "ucb1_constant") {
    algo.kind = Kind::Baseline;
    algo.policy = {PolicyKind::Ucb1Constant, spec.value("c", 1.0)};
  } else if (name == "thompson") {
    algo.kind = Kind::Baseline;
    algo.policy = {PolicyKind::ThompsonGaussian, 0.0};
  } else {
    throw std::invalid_argument("algorithm: unknown name " + name);
  }
  return algo;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& spec) {
  ExperimentConfig cfg;
  if (spec.contains("environment")) cfg.env_spec = spec.at("environment");
  if (spec.contains("algorithms")) {
    cfg.algorithms.clear();
    for (const auto& a : spec.at("algorithms"))
      cfg.algorithms.push_back(AlgorithmSpec::from_json(a));
  }
  if (spec.contains("deltas"))
    cfg.deltas = spec.at("deltas").get<std::vector<double>>();
  cfg.T = spec.value("T", cfg.T);
  cfg.runs = spec.value("runs", cfg.runs);
  cfg.base_seed = spec.value("base_seed", cfg.base_seed);
  cfg.outdir = spec.value("outdir", cfg.outdir);
  cfg.debug_asserts = spec.value("debug_asserts", cfg.debug_asserts);
  cfg.per_round_logs = spec.value("per_round_logs", cfg.per_round_logs);
  if (spec.contains("checkpoints"))
    cfg.checkpoints = spec.at("checkpoints").get<std::vector<std::int64_t>>();
  if (spec.contains("census")) {
    const auto& c = spec.at("census");
    cfg.census_max_depth = c.value("max_depth", cfg.census_max_depth);
    if (c.contains("eps"))
      cfg.census_eps = c.at("eps").get<std::vector<double>>();
    cfg.census_beta = c.value("beta", cfg.census_beta);
    cfg.census_grid_steps = c.value("grid_steps", cfg.census_grid_steps);
  }
  cfg.threads = spec.value("threads", cfg.threads);
  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json algs = nlohmann::json::array();
  for (const auto& a : algorithms) {
    nlohmann::json one{{"name", a.name}};
    if (a.kind == AlgorithmSpec::Kind::Zooming) {
      one["mode"] = a.zoom.mode == ZoomConfig::Mode::Theoretical
                        ? "theoretical"
                        : "constant";
      one["c_select"] = a.zoom.c_select;
      one["c_zoom"] = a.zoom.c_zoom;
      one["c_rad"] = a.zoom.c_rad;
      one["depth_cap"] = a.zoom.depth_cap;
      one["width_estimator"] =
          a.zoom.width_estimator == WidthEstimator::InventoryTwoOutcome
              ? "inventory"
              : "general";
    } else if (a.policy.kind == PolicyKind::Ucb1Constant) {
      one["c"] = a.policy.c;
    }
    algs.push_back(std::move(one));
  }
  return nlohmann::json{{"environment", env_spec},
                        {"algorithms", algs},
                        {"deltas", deltas},
                        {"T", T},
                        {"runs", runs},
                        {"base_seed", base_seed},
                        {"outdir", outdir},
                        {"debug_asserts", debug_asserts},
                        {"per_round_logs", per_round_logs},
                        {"checkpoints", checkpoints},
                        {"census",
                         {{"max_depth", census_max_depth},
                          {"eps", census_eps_or_default()},
                          {"beta", census_beta},
                          {"grid_steps", census_grid_steps}}},
                        {"threads", threads}};
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw std::invalid_argument("config: runs >= 1");
  if (T < 1) throw std::invalid_argument("config: T >= 1");
  for (double d : deltas) {
    if (!(d > 0.0 && d <= 1.0))
      throw std::invalid_argument("config: deltas must lie in (0,1]");
  }
}

std::vector<double> ExperimentConfig::census_eps_or_default() const {
  if (!census_eps.empty()) return census_eps;
  std::vector<double> eps;
  for (int j = 3; j <= 8; ++j) eps.push_back(std::ldexp(1.0, -j));
  return eps;
}

std::vector<std::int64_t> default_checkpoints(std::int64_t T) {
  std::vector<std::int64_t> out;
  for (std::int64_t base = 10; base <= T; base *= 10) {
    out.push_back(base);
    if (2 * base <= T) out.push_back(2 * base);
  }
  if (out.empty() || out.back() != T) out.push_back(T);
  return out;
}

std::uint64_t derive_run_seed(std::uint64_t base_seed, int run_index) {
  return mix64(base_seed ^ mix64(static_cast<std::uint64_t>(run_index) + 1));
}

namespace {

void parallel_for(int jobs, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, jobs));
  if (threads == 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<RunRecord> run_batch(const Environment& env,
                                 const CandidateSet& set,
                                 const AlgorithmSpec& algo, std::int64_t T,
                                 int runs, std::uint64_t base_seed,
                                 bool debug_asserts, LogMode log_mode,
                                 int threads) {
  std::vector<RunRecord> records(static_cast<std::size_t>(runs));
  parallel_for(runs, threads, [&](int k) {
    const std::uint64_t seed = derive_run_seed(base_seed, k);
    if (algo.kind == AlgorithmSpec::Kind::Zooming) {
      ZoomConfig cfg = algo.zoom;
      cfg.debug_asserts = debug_asserts;
      if (cfg.mode == ZoomConfig::Mode::Theoretical && cfg.horizon <= 0.0)
        cfg.horizon = static_cast<double>(T);
      records[static_cast<std::size_t>(k)] =
          run_zooming(env, set, cfg, T, seed, log_mode).record;
    } else {
      records[static_cast<std::size_t>(k)] =
          nonadaptive_run(env, set, algo.policy, T, seed, log_mode);
    }
  });
  return records;
}

namespace {

SummaryRow summarize(const std::string& algorithm, double delta,
                     std::int64_t t, const std::vector<double>& xs) {
  return {algorithm, delta, t, mean_of(xs), se_of(xs),
          static_cast<int>(xs.size())};
}

}  // namespace

std::vector<SummaryRow> sweep_delta(const ExperimentConfig& cfg) {
  const Environment env = cfg.make_environment();
  std::vector<SummaryRow> rows;
  for (const auto& algo : cfg.algorithms) {
    for (double delta : cfg.deltas) {
      const auto set = CandidateSet::uniform_mesh(delta, env.m());
      const auto records =
          run_batch(env, set, algo, cfg.T, cfg.runs, cfg.base_seed,
                    cfg.debug_asserts, LogMode::Summary, cfg.threads);
      std::vector<double> uhat;
      uhat.reserve(records.size());
      for (const auto& r : records)
        uhat.push_back(r.cumulative_utility / static_cast<double>(r.T));
      rows.push_back(summarize(algo.name, delta, cfg.T, uhat));
    }
  }
  return rows;
}

std::vector<SummaryRow> over_time(const ExperimentConfig& cfg) {
  const Environment env = cfg.make_environment();
  const auto checkpoints =
      cfg.checkpoints.empty() ? default_checkpoints(cfg.T) : cfg.checkpoints;
  std::vector<SummaryRow> rows;
  for (const auto& algo : cfg.algorithms) {
    for (double delta : cfg.deltas) {
      const auto set = CandidateSet::uniform_mesh(delta, env.m());
      const auto records =
          run_batch(env, set, algo, cfg.T, cfg.runs, cfg.base_seed,
                    cfg.debug_asserts, LogMode::Utilities, cfg.threads);
      for (std::int64_t t : checkpoints) {
        if (t < 1 || t > cfg.T) continue;
        std::vector<double> uhat;
        uhat.reserve(records.size());
        for (const auto& r : records) {
          double cum = 0.0;
          for (std::int64_t i = 0; i < t; ++i)
            cum += r.utilities[static_cast<std::size_t>(i)];
          uhat.push_back(cum / static_cast<double>(t));
        }
        rows.push_back(summarize(algo.name, delta, t, uhat));
      }
    }
  }
  return rows;
}

std::vector<SummaryRow> limit_opt(const ExperimentConfig& cfg) {
  const Environment env = cfg.make_environment();
  const auto window =
      std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                    std::ceil(0.1 * static_cast<double>(cfg.T))));
  std::vector<SummaryRow> rows;
  for (const auto& algo : cfg.algorithms) {
    for (double delta : cfg.deltas) {
      const auto set = CandidateSet::uniform_mesh(delta, env.m());
      const auto records =
          run_batch(env, set, algo, cfg.T, cfg.runs, cfg.base_seed,
                    cfg.debug_asserts, LogMode::Utilities, cfg.threads);
      std::vector<double> window_means;
      window_means.reserve(records.size());
      for (const auto& r : records) {
        double cum = 0.0;
        for (std::int64_t i = cfg.T - window; i < cfg.T; ++i)
          cum += r.utilities[static_cast<std::size_t>(i)];
        window_means.push_back(cum / static_cast<double>(window));
      }
      rows.push_back(summarize(algo.name, delta, cfg.T, window_means));
    }
  }
  return rows;
}

std::string rounds_csv(const std::vector<RunRecord>& records,
                       bool include_policy) {
  std::ostringstream os;
  os << "run_id,t,cell,anchor,outcome,value,payment,utility,zoomed,active_cells";
  if (include_policy) os << ",policy";
  os << "\n";
  for (std::size_t run_id = 0; run_id < records.size(); ++run_id) {
    const auto& record = records[run_id];
    for (const auto& row : record.rows) {
      const char* anchor = row.anchor_sign > 0   ? "+"
                           : row.anchor_sign < 0 ? "-"
                                                 : "atomic";
      os << run_id << "," << row.t << "," << row.cell << "," << anchor << ","
         << row.obs.outcome << "," << fmt(row.obs.value) << ","
         << fmt(row.obs.payment) << "," << fmt(row.obs.utility) << ","
         << (row.zoomed ? 1 : 0) << "," << row.active_cells;
      if (include_policy) os << "," << record.policy;
      os << "\n";
    }
  }
  return os.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "algorithm,delta,t,mean_uhat,se,runs\n";
  for (const auto& row : rows) {
    os << row.algorithm << "," << fmt(row.delta) << "," << row.t << ","
       << fmt(row.mean) << "," << fmt(row.se) << "," << row.runs << "\n";
  }
  return os.str();
}

std::string census_csv(const CensusResult& census) {
  std::ostringstream os;
  os << "cell,composite,vw,width,badness,candidate_best_utility\n";
  for (const auto& row : census.rows) {
    os << row.cell.to_string() << "," << (row.composite ? 1 : 0) << ","
       << fmt(row.vw) << "," << fmt(row.width) << "," << fmt(row.badness)
       << "," << fmt(row.candidate_best_utility) << "\n";
  }
  return os.str();
}

nlohmann::json width_dim_json(const WidthDimFit& fit) {
  return nlohmann::json{{"slope", fit.slope},
                        {"intercept", fit.intercept},
                        {"r2", fit.r2},
                        {"eps_list", fit.eps},
                        {"counts", fit.counts}};
}

namespace {

std::string read_git_hash() {
  // best effort: resolve .git/HEAD relative to the working directory
  namespace fs = std::filesystem;
  fs::path dir = fs::current_path();
  for (int up = 0; up < 6; ++up) {
    const fs::path head = dir / ".git" / "HEAD";
    std::ifstream in(head);
    if (in) {
      std::string line;
      std::getline(in, line);
      if (line.rfind("ref: ", 0) == 0) {
        std::ifstream ref(dir / ".git" / line.substr(5));
        if (ref) {
          std::string hash;
          std::getline(ref, hash);
          return hash;
        }
      }
      return line;
    }
    if (!dir.has_parent_path() || dir.parent_path() == dir) break;
    dir = dir.parent_path();
  }
  return "unknown";
}

}  // namespace

nlohmann::json metadata_json(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(cfg.runs));
  for (int k = 0; k < cfg.runs; ++k)
    seeds.push_back(derive_run_seed(cfg.base_seed, k));
  nlohmann::json constants{
      {"tie_band", kTieBand},
      {"thompson_prior_mean", 0.5},
      {"thompson_prior_variance", 1.0},
      {"thompson_observation_variance", 1.0},
      {"staircase_bump", "delta/4"},
      {"checkpoint_schedule", "powers of 10 and their doublings"},
      {"limit_opt_window", "final 10% of rounds"},
  };
  nlohmann::json algs = nlohmann::json::array();
  for (const auto& a : cfg.algorithms) {
    if (a.kind == AlgorithmSpec::Kind::Zooming) {
      algs.push_back({{"name", a.name},
                      {"c_select", a.zoom.c_select},
                      {"c_zoom", a.zoom.c_zoom},
                      {"depth_cap", a.zoom.depth_cap}});
    } else {
      algs.push_back({{"name", a.name}, {"c", a.policy.c}});
    }
  }
  constants["algorithms"] = algs;
  return nlohmann::json{
      {"git_hash", read_git_hash()},
      {"config_hash", fnv1a(cfg.to_json().dump())},
      {"base_seed", cfg.base_seed},
      {"run_seeds", seeds},
      {"constants", constants},
  };
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double se_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const auto n = static_cast<double>(xs.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace dcd
