#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sce/config.hpp"
#include "sce/error.hpp"
#include "sce/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitCheck = 3;

int exit_code_for(sce::ErrorCode c) {
  using sce::ErrorCode;
  switch (c) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::InvalidWeight:
    case ErrorCode::InvalidKernel:
    case ErrorCode::InvalidMeshParams:
    case ErrorCode::NegativeInitialData:
    case ErrorCode::InvalidParameters:
    case ErrorCode::InvalidSampler:
    case ErrorCode::IoError:
      return kExitValidation;
    default:
      return kExitNumerical;
  }
}

void apply_outdir(sce::SimConfig& cfg, const std::string& flag) {
  if (!flag.empty()) {
    cfg.outdir = flag;
  } else if (const char* env = std::getenv("SCE_OUTDIR"); env && *env) {
    cfg.outdir = env;
  }
  cfg.resolved["outputs"]["outdir"] = cfg.outdir.string();
}

void print_checks(const std::vector<sce::CheckRow>& rows) {
  for (const auto& r : rows)
    std::cout << r.verdict << "  " << r.name << "  " << r.params << "  residual=" << r.max_residual
              << " tol=" << r.tolerance << '\n';
}

int finish_run(const sce::SimConfig& cfg, bool strict) {
  const sce::ExperimentResult res = sce::run_experiment(cfg);
  const auto& s = res.trajectory.steps;
  std::cout << "wrote " << cfg.outdir.string() << "  steps=" << s.size() - 1
            << " rejected=" << res.trajectory.rejected_steps << " M1(T)/M1(0)=" << s.back().M1 / s.front().M1 << '\n';
  print_checks(res.checks);
  return strict && res.any_failed() ? kExitCheck : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume solver and diagnostics for the Smoluchowski coagulation equation"};
  app.require_subcommand(1);

  std::string path, outdir, name;
  bool strict = false;

  auto* run = app.add_subcommand("run", "Run a simulation from a JSON config");
  run->add_option("config", path, "Config file")->required();

  auto* preset = app.add_subcommand("preset", "Run a named preset (fig1, fig2, fig4b ... fig4f)");
  preset->add_option("name", name, "Preset name")->required();

  auto* classify = app.add_subcommand("classify", "Sampled condition checks for the configured kernel and weights");
  classify->add_option("config", path, "Config file")->required();

  auto* verify = app.add_subcommand("verify", "Re-run checks on a finished run directory");
  verify->add_option("dir", path, "Run directory")->required()->check(CLI::ExistingDirectory);

  auto* gel = app.add_subcommand("gel", "Gel-onset detection over an R sweep");
  gel->add_option("config", path, "Config file")->required();

  auto* oracle = app.add_subcommand("oracle", "Stochastic coalescent replicates");
  oracle->add_option("config", path, "Config file")->required();

  for (auto* sub : {run, preset, classify, gel, oracle})
    sub->add_option("-o,--outdir", outdir, "Output directory (overrides config and SCE_OUTDIR)");
  for (auto* sub : {run, preset, classify, verify, gel})
    sub->add_flag("--strict", strict, "Exit with status 3 when a check fails");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      sce::SimConfig cfg = sce::load_config(path);
      apply_outdir(cfg, outdir);
      return finish_run(cfg, strict);
    }
    if (*preset) {
      sce::SimConfig cfg = sce::config_from_json(nlohmann::json{{"preset", name}});
      apply_outdir(cfg, outdir);
      return finish_run(cfg, strict);
    }
    if (*classify) {
      sce::SimConfig cfg = sce::load_config(path);
      apply_outdir(cfg, outdir);
      const nlohmann::json rep = sce::run_classify(cfg);
      std::cout << rep.dump(2) << '\n';
      bool inconclusive = false;
      for (const auto& r : rep) inconclusive = inconclusive || r.at("verdict") == "Inconclusive";
      return strict && inconclusive ? kExitCheck : kExitOk;
    }
    if (*verify) {
      const auto rows = sce::verify_run(path);
      print_checks(rows);
      bool failed = false;
      for (const auto& r : rows) failed = failed || r.failed();
      return strict && failed ? kExitCheck : kExitOk;
    }
    if (*gel) {
      sce::SimConfig cfg = sce::load_config(path);
      apply_outdir(cfg, outdir);
      const sce::GelReport rep = sce::run_gel(cfg);
      for (const auto& r : rep.sweep)
        std::cout << "R=" << r.R << "  T_gel=" << (r.T_gel ? std::to_string(*r.T_gel) : "none")
                  << "  M1_final=" << r.M1_final << '\n';
      std::cout << sce::to_string(rep.verdict);
      if (rep.T_gel) std::cout << "  T_gel=" << *rep.T_gel;
      if (rep.T_bound) std::cout << "  T_bound=" << *rep.T_bound;
      std::cout << '\n';
      return strict && rep.verdict != sce::GelVerdict::GelDetected ? kExitCheck : kExitOk;
    }
    if (*oracle) {
      sce::SimConfig cfg = sce::load_config(path);
      apply_outdir(cfg, outdir);
      const sce::OracleAggregate a = sce::run_oracle(cfg);
      for (std::size_t q = 0; q < a.t.size(); ++q)
        std::cout << "t=" << a.t[q] << "  M0=" << a.mean_M0[q] << " +- " << a.se_M0[q]
                  << "  largest=" << a.mean_largest[q] << '\n';
      return kExitOk;
    }
  } catch (const sce::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
