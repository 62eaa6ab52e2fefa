#include "sce/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sce/error.hpp"

namespace sce {

namespace {

constexpr double kExpClamp = 700.0;

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double scale3(double a, double b, double c) { return std::abs(a) + std::abs(b) + std::abs(c); }

}  // namespace

std::string_view to_string(WeightTag tag) {
  switch (tag) {
    case WeightTag::Nonnegative: return "nonnegative";
    case WeightTag::Nondecreasing: return "nondecreasing";
    case WeightTag::Subadditive: return "subadditive";
    case WeightTag::Superadditive: return "superadditive";
    case WeightTag::StrictlySubadditive: return "strictly_subadditive";
    case WeightTag::Concave: return "concave";
    case WeightTag::Convex: return "convex";
  }
  return "unknown";
}

std::optional<WeightTag> parse_weight_tag(std::string_view name) {
  for (WeightTag t : {WeightTag::Nonnegative, WeightTag::Nondecreasing, WeightTag::Subadditive,
                      WeightTag::Superadditive, WeightTag::StrictlySubadditive, WeightTag::Concave,
                      WeightTag::Convex})
    if (to_string(t) == name) return t;
  return std::nullopt;
}

WeightSpec WeightSpec::one() {
  using T = WeightTag;
  return WeightSpec(WeightKind::One, 0.0, "one", {T::Nonnegative, T::Nondecreasing, T::Subadditive, T::Concave});
}

WeightSpec WeightSpec::identity() {
  using T = WeightTag;
  return WeightSpec(WeightKind::Identity, 1.0, "x",
                    {T::Nonnegative, T::Nondecreasing, T::Subadditive, T::Superadditive, T::Concave, T::Convex});
}

WeightSpec WeightSpec::power(double p) {
  if (!(p >= 0.0) || !std::isfinite(p))
    throw Error(ErrorCode::InvalidWeight, "power weight needs p >= 0, got " + fmt_num(p));
  using T = WeightTag;
  std::set<WeightTag> tags{T::Nonnegative, T::Nondecreasing};
  if (p < 1.0) tags.insert({T::Subadditive, T::StrictlySubadditive, T::Concave});
  if (p == 1.0) tags.insert({T::Subadditive, T::Superadditive, T::Concave, T::Convex});
  if (p > 1.0) tags.insert({T::Superadditive, T::Convex});
  return WeightSpec(WeightKind::Power, p, "x^" + fmt_num(p), std::move(tags));
}

WeightSpec WeightSpec::power_plus_one(double beta) {
  if (!(beta >= -1.0) || !std::isfinite(beta))
    throw Error(ErrorCode::InvalidWeight, "x^(beta+1) weight needs beta >= -1, got " + fmt_num(beta));
  WeightSpec w = power(beta + 1.0);
  w.kind_ = WeightKind::PowerPlusOne;
  w.param_ = beta;
  return w;
}

WeightSpec WeightSpec::exponential() {
  using T = WeightTag;
  return WeightSpec(WeightKind::Exponential, 0.0, "exp", {T::Nonnegative, T::Nondecreasing, T::Convex});
}

WeightSpec WeightSpec::log_quotient() {
  using T = WeightTag;
  return WeightSpec(WeightKind::LogQuotient, 0.0, "x_over_log",
                    {T::Nonnegative, T::Nondecreasing, T::Subadditive, T::StrictlySubadditive, T::Concave});
}

WeightSpec WeightSpec::custom(std::string_view expr) {
  WeightSpec w(WeightKind::Custom, 0.0, "custom", {});
  w.expr_ = Expr::parse(expr);
  if (w.expr_->uses_y())
    throw Error(ErrorCode::InvalidWeight, "weight expression may only depend on x: " + std::string(expr));
  return w;
}

WeightSpec& WeightSpec::with_label(std::string label) {
  label_ = std::move(label);
  return *this;
}

WeightSpec& WeightSpec::with_tags(std::set<WeightTag> tags) {
  tags_ = std::move(tags);
  return *this;
}

double WeightSpec::operator()(double x) const {
  double v = 0.0;
  switch (kind_) {
    case WeightKind::One: v = 1.0; break;
    case WeightKind::Identity: v = x; break;
    case WeightKind::Power:
    case WeightKind::PowerPlusOne: {
      const double p = kind_ == WeightKind::Power ? param_ : param_ + 1.0;
      v = p == 0.0 ? 1.0 : std::pow(x, p);
      break;
    }
    case WeightKind::Exponential:
      if (x > kExpClamp)
        throw Error(ErrorCode::NonFiniteEvaluation, "exp weight beyond clamp at x=" + fmt_num(x));
      v = std::exp(x);
      break;
    case WeightKind::LogQuotient: v = x == 0.0 ? 0.0 : x / std::log(x + 2.0); break;
    case WeightKind::Custom: v = (*expr_)(x); break;
  }
  if (!std::isfinite(v))
    throw Error(ErrorCode::NonFiniteEvaluation, "weight " + label_ + " at x=" + fmt_num(x));
  return v;
}

double subadditivity_gap(const WeightSpec& b, double x, double y) { return b(x) + b(y) - b(x + y); }

ConditionReport check_subadditive(const WeightSpec& b, const PairSampler& sample, bool strict) {
  ConditionReport rep;
  rep.condition = strict ? "StrictSubadd" : "Subadd";
  rep.sample = sample;
  if (strict) rep.sample.lo = std::max(sample.lo, kStrictBoxFloor);

  // Normalized margin: gap / scale. The witness keeps the raw gap.
  double worst = std::numeric_limits<double>::infinity();
  Witness w;
  for (const Point2& p : rep.sample.pairs()) {
    const double bx = b(p.x), by = b(p.y), bxy = b(p.x + p.y);
    const double gap = bx + by - bxy;
    const double scale = std::max(scale3(bx, by, bxy), std::numeric_limits<double>::min());
    const double rel = gap / scale;
    if (rel < worst) {
      worst = rel;
      w = {p.x, p.y, gap};
    }
  }
  rep.witness = w;
  rep.constants.emplace_back("min_relative_gap", worst);
  const bool ok = strict ? worst > kWeightTolerance : worst >= -kWeightTolerance;
  rep.verdict = ok ? Verdict::HoldsOnSample : Verdict::Violated;
  return rep;
}

ConditionReport check_superadditive(const WeightSpec& b, const PairSampler& sample) {
  ConditionReport rep;
  rep.condition = "Superadd";
  rep.sample = sample;
  double worst = std::numeric_limits<double>::infinity();
  Witness w;
  for (const Point2& p : sample.pairs()) {
    const double bx = b(p.x), by = b(p.y), bxy = b(p.x + p.y);
    const double margin = bxy - bx - by;
    const double rel = margin / std::max(scale3(bx, by, bxy), std::numeric_limits<double>::min());
    if (rel < worst) {
      worst = rel;
      w = {p.x, p.y, margin};
    }
  }
  rep.witness = w;
  rep.constants.emplace_back("min_relative_margin", worst);
  rep.verdict = worst >= -kWeightTolerance ? Verdict::HoldsOnSample : Verdict::Violated;
  return rep;
}

ConditionReport check_midpoint_concave(const WeightSpec& b, const PairSampler& sample) {
  ConditionReport rep;
  rep.condition = "Concave";
  rep.sample = sample;
  double worst = std::numeric_limits<double>::infinity();
  Witness w;
  for (const Point2& p : sample.pairs()) {
    const double bx = b(p.x), by = b(p.y), bm = b(0.5 * (p.x + p.y));
    const double margin = bm - 0.5 * (bx + by);
    const double rel = margin / std::max(scale3(bx, by, bm), std::numeric_limits<double>::min());
    if (rel < worst) {
      worst = rel;
      w = {p.x, p.y, margin};
    }
  }
  rep.witness = w;
  rep.constants.emplace_back("min_relative_margin", worst);
  rep.verdict = worst >= -kWeightTolerance ? Verdict::HoldsOnSample : Verdict::Violated;
  return rep;
}

ConditionReport check_concavity_implies_subadditive(const WeightSpec& b, const PairSampler& sample) {
  const ConditionReport concave = check_midpoint_concave(b, sample);
  if (!concave.holds()) {
    const Witness& w = *concave.witness;
    throw Error(ErrorCode::ConcavityNotDetected,
                "weight " + b.label() + " fails midpoint concavity at (" + fmt_num(w.x) + ", " + fmt_num(w.y) + ")");
  }
  if (b(0.0) < 0.0) throw Error(ErrorCode::ConcavityNotDetected, "weight " + b.label() + " has b(0) < 0");
  ConditionReport rep = check_subadditive(b, sample, false);
  rep.condition = "ConcaveImpliesSubadd";
  rep.note = "concave on sample, b(0) = " + fmt_num(b(0.0));
  return rep;
}

ConditionReport check_nondecreasing(const WeightSpec& b, const std::vector<double>& sorted_points) {
  ConditionReport rep;
  rep.condition = "Nondecreasing";
  rep.verdict = Verdict::HoldsOnSample;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted_points.size(); ++i) {
    const double x1 = sorted_points[i - 1], x2 = sorted_points[i];
    if (!(x2 > x1)) continue;
    const double b1 = b(x1), b2 = b(x2);
    const double margin = b2 - b1;
    if (margin < worst) {
      worst = margin;
      rep.witness = Witness{x1, x2, margin};
    }
    if (margin < -kWeightTolerance * (std::abs(b1) + std::abs(b2))) rep.verdict = Verdict::Violated;
  }
  return rep;
}

}  // namespace sce
