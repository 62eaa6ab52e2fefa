#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sce/coalescent.hpp"
#include "sce/config.hpp"
#include "sce/gelation.hpp"
#include "sce/solver.hpp"

namespace sce {

/// One row of checks.csv. verdict is PASS, FAIL or INCONCLUSIVE.
struct CheckRow {
  std::string name;
  std::string params;
  std::string verdict;
  double max_residual = 0.0;
  double tolerance = 0.0;

  bool failed() const { return verdict == "FAIL"; }
};

struct ExperimentResult {
  Trajectory trajectory;
  std::vector<CheckRow> checks;
  std::optional<GelReport> gel;

  bool any_failed() const;
};

/// Evaluates the configured checks on a finished trajectory.
std::vector<CheckRow> evaluate_checks(const Trajectory& traj, const SimConfig& cfg,
                                      std::optional<GelReport>* gel = nullptr);

/// Runs the solver and writes moments.csv, steps.csv, samples.csv,
/// u_<t>.csv snapshots, metadata.json, plot.py, and checks.csv /
/// gel_report.json when checks are configured.
ExperimentResult run_experiment(const SimConfig& cfg);

/// Rebuilds the trajectory written by run_experiment in dir (config taken
/// from its metadata.json). Throws Error{IoError} or Error{ParseError}.
std::pair<SimConfig, Trajectory> load_run(const std::filesystem::path& dir);

/// Re-evaluates the checks of a finished run directory and rewrites checks.csv.
std::vector<CheckRow> verify_run(const std::filesystem::path& dir);

/// R-sweep from cfg.gel.sweep (falls back to cfg's own R). Writes
/// gel_sweep.csv (R, T_gel, M1_final) and gel_report.json.
GelReport run_gel(const SimConfig& cfg);

/// Classification of cfg's kernel against every configured weight; written to classify.json.
nlohmann::json run_classify(const SimConfig& cfg);

/// Coalescent replicates; writes oracle_replicate_<k>.csv and oracle_aggregate.csv.
OracleAggregate run_oracle(const SimConfig& cfg);

void write_checks_csv(const std::filesystem::path& file, const std::vector<CheckRow>& rows);

/// Upper gel-time estimate 2 M^b(0) / (lambda M1(0)^2) for gelling kernels with mu = 0.
std::optional<double> gel_bound_for(const SimConfig& cfg, const State& initial);

}  // namespace sce
