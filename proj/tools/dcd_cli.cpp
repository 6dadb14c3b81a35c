// Command-line front end: seeded experiment batches, census diagnostics and
// the verification suites, all emitting CSV plus a JSON metadata sidecar.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dcd/analysis.hpp"
#include "dcd/experiment.hpp"
#include "dcd/verification.hpp"

namespace {

dcd::ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config: " + path);
  nlohmann::json spec;
  in >> spec;
  return dcd::ExperimentConfig::from_json(spec);
}

std::vector<dcd::AlgorithmSpec> default_algorithms() {
  nlohmann::json specs = nlohmann::json::array(
      {{{"name", "zooming"}, {"c_select", 1.0}, {"c_zoom", 0.6}},
       {{"name", "ucb1_constant"}, {"c", 1.0}},
       {{"name", "thompson"}}});
  std::vector<dcd::AlgorithmSpec> out;
  for (const auto& s : specs) out.push_back(dcd::AlgorithmSpec::from_json(s));
  return out;
}

void emit(const dcd::ExperimentConfig& cfg, const std::string& name,
          const std::string& content) {
  const std::string path = cfg.outdir + "/" + name;
  dcd::write_file(path, content);
  std::cout << "wrote " << path << "\n";
}

void emit_metadata(const dcd::ExperimentConfig& cfg, const std::string& name) {
  emit(cfg, name, dcd::metadata_json(cfg).dump(2) + "\n");
}

int cmd_summary(dcd::ExperimentConfig cfg, const std::string& command) {
  if (cfg.algorithms.empty()) cfg.algorithms = default_algorithms();
  std::vector<dcd::SummaryRow> rows;
  if (command == "sweep-delta") {
    rows = dcd::sweep_delta(cfg);
  } else if (command == "over-time") {
    rows = dcd::over_time(cfg);
  } else {
    rows = dcd::limit_opt(cfg);
  }
  emit(cfg, command + ".csv", dcd::summary_csv(rows));
  emit_metadata(cfg, command + "_metadata.json");
  return 0;
}

int cmd_run(dcd::ExperimentConfig cfg) {
  if (cfg.algorithms.empty()) cfg.algorithms = default_algorithms();
  const dcd::Environment env = cfg.make_environment();
  for (const auto& algo : cfg.algorithms) {
    for (double delta : cfg.deltas) {
      const auto set = dcd::CandidateSet::uniform_mesh(delta, env.m());
      const auto mode =
          cfg.per_round_logs ? dcd::LogMode::Rows : dcd::LogMode::Summary;
      const auto records =
          dcd::run_batch(env, set, algo, cfg.T, cfg.runs, cfg.base_seed,
                         cfg.debug_asserts, mode, cfg.threads);
      std::ostringstream stem;
      stem << algo.name << "_delta" << delta;
      if (cfg.per_round_logs) {
        emit(cfg, stem.str() + "_rounds.csv",
             dcd::rounds_csv(records, algo.kind ==
                                          dcd::AlgorithmSpec::Kind::Baseline));
      }
      std::vector<double> uhat;
      for (const auto& r : records)
        uhat.push_back(r.cumulative_utility / static_cast<double>(r.T));
      std::vector<dcd::SummaryRow> rows{{algo.name, delta, cfg.T,
                                         dcd::mean_of(uhat), dcd::se_of(uhat),
                                         cfg.runs}};
      emit(cfg, stem.str() + "_summary.csv", dcd::summary_csv(rows));
    }
  }
  emit_metadata(cfg, "run_metadata.json");
  return 0;
}

int cmd_census(const dcd::ExperimentConfig& cfg, bool full_space) {
  const dcd::Environment env = cfg.make_environment();
  const auto set = full_space
                       ? dcd::CandidateSet::full_space(env.m())
                       : dcd::CandidateSet::uniform_mesh(
                             cfg.deltas.empty() ? 0.1 : cfg.deltas.front(),
                             env.m());
  const auto census =
      dcd::cell_census(env, set, cfg.census_max_depth,
                       cfg.census_eps_or_default(), cfg.census_beta,
                       cfg.census_grid_steps);
  emit(cfg, "census.csv", dcd::census_csv(census));
  emit(cfg, "width_dimension.json", dcd::width_dim_json(census.fit).dump(2) + "\n");
  emit_metadata(cfg, "census_metadata.json");
  std::cout << "feasible cells: " << census.feasible_cells
            << ", fitted slope: " << census.fit.slope << "\n";
  return 0;
}

int cmd_verify(const std::vector<std::string>& selected,
               const std::string& outdir) {
  std::vector<std::string> names =
      selected.empty() ? dcd::suite_names() : selected;
  const auto results = dcd::run_suites(names);
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& r : results) {
    std::printf("%-22s %s%s  (%.2fs)  %s\n", r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.hard ? "" : " (soft)", r.seconds,
                r.details.c_str());
    verdicts.push_back({{"suite", r.name},
                        {"pass", r.pass},
                        {"hard", r.hard},
                        {"seconds", r.seconds},
                        {"details", r.details}});
  }
  if (!outdir.empty()) {
    dcd::write_file(outdir + "/verify.json", verdicts.dump(2) + "\n");
    std::cout << "wrote " << outdir << "/verify.json\n";
  }
  return dcd::all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic contract design laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string outdir;
  std::vector<std::string> suites;
  bool census_mesh = false;

  auto add_config = [&](CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--config", config_path,
                                "experiment config JSON file");
    if (required) opt->required();
    cmd->add_option("--out", outdir, "override output directory");
  };

  auto* sweep = app.add_subcommand("sweep-delta",
                                   "final Uhat(T) vs mesh granularity");
  add_config(sweep);
  auto* over = app.add_subcommand("over-time", "Uhat(t) at checkpoints");
  add_config(over);
  auto* limit = app.add_subcommand(
      "limit-opt", "average utility over the final 10% window of a long run");
  add_config(limit);
  auto* runcmd = app.add_subcommand("run", "seeded runs with optional logs");
  add_config(runcmd);
  auto* census = app.add_subcommand("census", "feasible-cell census and "
                                              "width-dimension fit");
  add_config(census);
  census->add_flag("--mesh", census_mesh,
                   "census over the uniform mesh instead of the full space");
  auto* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("--suites", suites, "subset of suites to run");
  verify->add_option("--out", outdir, "directory for verify.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      if (verify->count("--suites") > 0 && suites.empty()) {
        std::cerr << "error: no suites selected\n";
        return 2;
      }
      return cmd_verify(suites, outdir);
    }
    dcd::ExperimentConfig cfg = load_config(config_path);
    if (!outdir.empty()) cfg.outdir = outdir;
    if (sweep->parsed()) return cmd_summary(cfg, "sweep-delta");
    if (over->parsed()) return cmd_summary(cfg, "over-time");
    if (limit->parsed()) return cmd_summary(cfg, "limit-opt");
    if (runcmd->parsed()) return cmd_run(cfg);
    if (census->parsed()) return cmd_census(cfg, !census_mesh);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
