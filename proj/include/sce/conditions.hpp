#pragma once

#include <string_view>
#include <vector>

#include "sce/kernels.hpp"
#include "sce/report.hpp"
#include "sce/sampling.hpp"
#include "sce/weights.hpp"

namespace sce {

/// Relative change under box doubling below which a fitted constant counts as stable.
inline constexpr double kBoxStability = 0.05;
/// Infimum threshold for the kernel floor condition.
inline constexpr double kFloorThreshold = 1e-15;

/// (b(x)+x+1)(b(y)+y+1)
double comparison_kernel_1(const WeightSpec& b, double x, double y);
/// (b(y)+y+1)(x+1) + (b(x)+x+1)(y+1)
double comparison_kernel_2(const WeightSpec& b, double x, double y);

/// C1 = sup (x+y) K / K1^b. HOLDS when finite and stable under box doubling,
/// INCONCLUSIVE when it keeps growing. Throws Error{NonFiniteRatio}.
ConditionReport check_A1(const KernelSpec& k, const WeightSpec& b, const PairSampler& sample = {});

/// C2 = sup max(0, (b(x+y)-b(x)-b(y)) K) / K2^b, same verdict rules as A1.
ConditionReport check_A2(const KernelSpec& k, const WeightSpec& b, const PairSampler& sample = {});

/// Searches (lambda > 0, mu >= 0) with (b(x+y)-b(x)-b(y)) K <= -lambda xy + mu (x+y+1).
/// Tries mu = 0 first; otherwise bisects on lambda for the largest value whose
/// required mu stays stable under box doubling. VIOLATED when no such lambda
/// exists or when it keeps shrinking as the box doubles again.
ConditionReport check_A3(const KernelSpec& k, const WeightSpec& b, const PairSampler& sample = {});

/// Sampled inf of K over [r, hi]^2 for each r. VIOLATED when K vanishes
/// already near r; INCONCLUSIVE when the infimum only collapses as the box
/// grows.
ConditionReport check_Kr(const KernelSpec& k, const std::vector<double>& r_list, const PairSampler& sample = {});

enum class Classification { MassConservingCandidate, GelationCandidate, Inconclusive };

std::string_view to_string(Classification c);

struct ClassifyResult {
  Classification verdict = Classification::Inconclusive;
  std::vector<ConditionReport> reports;  // A1, A2, A3, Kr, Nondecreasing
  std::string note = "sample-level evidence, not a proof";
};

ClassifyResult classify(const KernelSpec& k, const WeightSpec& b, const PairSampler& sample = {});

}  // namespace sce
