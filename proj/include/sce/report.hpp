#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sce/sampling.hpp"

namespace sce {

enum class Verdict { HoldsOnSample, Violated, Inconclusive };

std::string_view to_string(Verdict v);

/// Worst-case sample point for a sampled inequality and its margin there.
struct Witness {
  double x = 0.0;
  double y = 0.0;
  double margin = 0.0;
};

/// Outcome of a sampled check: verdict, fitted constants, witness and the
/// sample that produced them. Verdicts are sample-level evidence only.
struct ConditionReport {
  std::string condition;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::pair<std::string, double>> constants;
  std::optional<Witness> witness;
  PairSampler sample;
  std::string note;

  std::optional<double> constant(std::string_view name) const {
    for (const auto& [k, v] : constants)
      if (k == name) return v;
    return std::nullopt;
  }

  bool holds() const noexcept { return verdict == Verdict::HoldsOnSample; }
};

}  // namespace sce
