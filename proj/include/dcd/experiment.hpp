#pragma once

#include <nlohmann/json.hpp>
#include <iosfwd>
#include <string>
#include <vector>

#include "dcd/analysis.hpp"
#include "dcd/baselines.hpp"
#include "dcd/envs.hpp"
#include "dcd/zooming.hpp"

namespace dcd {

struct AlgorithmSpec {
  enum class Kind { Zooming, Baseline };

  std::string name;  // label used in output rows
  Kind kind = Kind::Zooming;
  ZoomConfig zoom;
  Policy policy;

  static AlgorithmSpec from_json(const nlohmann::json& spec);
};

struct ExperimentConfig {
  nlohmann::json env_spec = {{"market", "uniform"}};
  std::vector<AlgorithmSpec> algorithms;
  std::vector<double> deltas = {0.02, 0.08, 0.2};
  std::int64_t T = 5000;
  int runs = 50;
  std::uint64_t base_seed = 1;
  std::string outdir = "out";
  bool debug_asserts = false;
  bool per_round_logs = false;
  std::vector<std::int64_t> checkpoints;  // empty = default schedule
  int census_max_depth = 8;
  std::vector<double> census_eps;  // empty = {2^-3, ..., 2^-8}
  double census_beta = 1.0;
  int census_grid_steps = 8;
  int threads = 0;  // 0 = hardware concurrency

  static ExperimentConfig from_json(const nlohmann::json& spec);
  nlohmann::json to_json() const;
  void validate() const;

  Environment make_environment() const { return load_environment(env_spec); }
  std::vector<double> census_eps_or_default() const;
};

/// t = 10^k and 2*10^k up to T, plus T itself.
std::vector<std::int64_t> default_checkpoints(std::int64_t T);

/// Seed for run k of an experiment (independent streams per run).
std::uint64_t derive_run_seed(std::uint64_t base_seed, int run_index);

/// One summary point: mean/SE of Uhat(t) across seeded runs.
struct SummaryRow {
  std::string algorithm;
  double delta = 0.0;
  std::int64_t t = 0;
  double mean = 0.0;
  double se = 0.0;
  int runs = 0;
};

/// Runs `runs` seeded runs of one algorithm on one candidate mesh; results
/// are merged in run-id order regardless of scheduling.
std::vector<RunRecord> run_batch(const Environment& env,
                                 const CandidateSet& set,
                                 const AlgorithmSpec& algo, std::int64_t T,
                                 int runs, std::uint64_t base_seed,
                                 bool debug_asserts, LogMode log_mode,
                                 int threads);

std::vector<SummaryRow> sweep_delta(const ExperimentConfig& cfg);
std::vector<SummaryRow> over_time(const ExperimentConfig& cfg);
/// Average utility over the final 10% window of a long run, per delta.
std::vector<SummaryRow> limit_opt(const ExperimentConfig& cfg);

std::string rounds_csv(const std::vector<RunRecord>& records,
                       bool include_policy);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string census_csv(const CensusResult& census);
nlohmann::json width_dim_json(const WidthDimFit& fit);

/// Output metadata: config hash, seeds, and the pinned design constants.
nlohmann::json metadata_json(const ExperimentConfig& cfg);

double mean_of(const std::vector<double>& xs);
double se_of(const std::vector<double>& xs);

void write_file(const std::string& path, const std::string& content);

}  // namespace dcd
