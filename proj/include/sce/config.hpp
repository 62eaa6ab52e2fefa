#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sce/gelation.hpp"
#include "sce/sampling.hpp"
#include "sce/solver.hpp"

namespace sce {

struct TmiOptions {
  double r_fraction = 0.5;  // r = r_fraction * R
  double t = 0.0;           // 0 picks T/2
};

struct LBoundOptions {
  std::string weight;  // label of a configured weight
  double C2 = 0.0;     // 0 fits C2 with check_A2
};

struct M0DecayOptions {
  double eps_floor = 0.0;  // 0 uses the gelling kernel's epsilon, if any
  double theta = 1.0;
};

struct GelOptions {
  double theta = kDefaultGelTheta;
  std::size_t sustain = kDefaultSustain;
  std::vector<SweepEntry> sweep;
  std::string bound_weight;  // weight for the T_bound estimate; gelling weight by default
};

struct OracleOptions {
  std::size_t N0 = 10000;
  std::size_t replicates = 20;
  std::uint64_t seed = 1;
  std::vector<double> times;  // empty: 0, T/30, ..., T
};

struct SimConfig {
  std::string preset;
  SolverConfig solver;
  std::string u0_source = "exp(-x)";
  std::filesystem::path outdir = "out";
  std::vector<std::string> checks;
  TmiOptions tmi;
  LBoundOptions l_bound;
  M0DecayOptions m0_decay;
  GelOptions gel;
  PairSampler classify_sample;
  OracleOptions oracle;
  nlohmann::json resolved;  // full config after preset merge and defaults
};

/// Names accepted in the checks list.
inline const std::vector<std::string_view> kCheckNames = {"mass_balance", "monotone", "tmi",
                                                          "l_bound",      "m0_decay", "gel"};

std::vector<std::string> preset_names();

/// Raw JSON of a named preset. Throws Error{ValidationError} for unknown names.
nlohmann::json preset_json(std::string_view name);

/// Builds a config from JSON text (presets merged underneath when "preset"
/// is given). Throws Error{ParseError} with line and column, or
/// Error{ValidationError} naming the offending field path.
SimConfig parse_config(std::string_view text, std::string_view origin = "<config>");

SimConfig config_from_json(const nlohmann::json& j);

/// Reads and parses a file. Throws Error{IoError} if it cannot be read.
SimConfig load_config(const std::filesystem::path& path);

}  // namespace sce
