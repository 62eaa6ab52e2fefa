#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sce/expr.hpp"
#include "sce/report.hpp"
#include "sce/sampling.hpp"

namespace sce {

enum class WeightKind { One, Identity, Power, PowerPlusOne, Exponential, LogQuotient, Custom };

enum class WeightTag { Nonnegative, Nondecreasing, Subadditive, Superadditive, StrictlySubadditive, Concave, Convex };

std::string_view to_string(WeightTag tag);
std::optional<WeightTag> parse_weight_tag(std::string_view name);

/// Weight function b(x) used by generalized moments.
///
/// Power(p) is x^p, PowerPlusOne(beta) is x^(beta+1), LogQuotient is
/// x / log(x + 2) with b(0) = 0, Exponential is e^x (finite for x <= 700).
class WeightSpec {
 public:
  static WeightSpec one();
  static WeightSpec identity();
  static WeightSpec power(double p);
  static WeightSpec power_plus_one(double beta);
  static WeightSpec exponential();
  static WeightSpec log_quotient();
  static WeightSpec custom(std::string_view expr);

  WeightKind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }
  const std::string& label() const noexcept { return label_; }
  const std::set<WeightTag>& claimed_tags() const noexcept { return tags_; }
  const Expr* expr() const noexcept { return expr_ ? &*expr_ : nullptr; }

  WeightSpec& with_label(std::string label);
  WeightSpec& with_tags(std::set<WeightTag> tags);
  bool claims(WeightTag tag) const { return tags_.count(tag) > 0; }

  /// b(x) for x >= 0. Throws Error{NonFiniteEvaluation} on overflow/NaN.
  double operator()(double x) const;

 private:
  WeightSpec(WeightKind kind, double param, std::string label, std::set<WeightTag> tags)
      : kind_(kind), param_(param), label_(std::move(label)), tags_(std::move(tags)) {}

  WeightKind kind_;
  double param_ = 0.0;
  std::string label_;
  std::set<WeightTag> tags_;
  std::optional<Expr> expr_;
};

inline double eval_weight(const WeightSpec& b, double x) { return b(x); }

/// b(x) + b(y) - b(x + y); positive where b is strictly subadditive.
double subadditivity_gap(const WeightSpec& b, double x, double y);

/// Lower end of the box used for strict checks on the open half-line.
inline constexpr double kStrictBoxFloor = 1e-6;
inline constexpr double kWeightTolerance = 1e-12;

/// Sampled b(x+y) <= b(x) + b(y). With strict = true the gap must exceed
/// kWeightTolerance relative to |b(x)| + |b(y)| + |b(x+y)| and the box is
/// clipped to [kStrictBoxFloor, hi].
ConditionReport check_subadditive(const WeightSpec& b, const PairSampler& sample, bool strict);

/// Sampled b(x+y) >= b(x) + b(y).
ConditionReport check_superadditive(const WeightSpec& b, const PairSampler& sample);

/// Sampled midpoint concavity b((x+y)/2) >= (b(x)+b(y))/2.
ConditionReport check_midpoint_concave(const WeightSpec& b, const PairSampler& sample);

/// Concave with b(0) >= 0 should imply subadditive on the same sample.
/// Throws Error{ConcavityNotDetected} when the midpoint test or b(0) >= 0 fails.
ConditionReport check_concavity_implies_subadditive(const WeightSpec& b, const PairSampler& sample);

/// b(x2) >= b(x1) for consecutive sorted sample points.
ConditionReport check_nondecreasing(const WeightSpec& b, const std::vector<double>& sorted_points);

}  // namespace sce
