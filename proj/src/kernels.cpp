#include "sce/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>

#include "sce/error.hpp"

namespace sce {

namespace {

constexpr double kExpDomain = 700.0;
constexpr double kAsymmetryTolerance = 1e-12;

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

KernelSpec KernelSpec::constant(double c) {
  if (!(c >= 0.0) || !std::isfinite(c))
    throw Error(ErrorCode::InvalidKernel, "constant kernel needs c >= 0, got " + fmt_num(c));
  KernelSpec k(KernelKind::Constant, "K=" + fmt_num(c));
  k.value_ = c;
  return k;
}

KernelSpec KernelSpec::sum() { return KernelSpec(KernelKind::Sum, "K=x+y"); }

KernelSpec KernelSpec::product() { return KernelSpec(KernelKind::Product, "K=xy"); }

KernelSpec KernelSpec::homogeneous(double alpha, double beta, bool allow_wide) {
  const bool in_range = alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0;
  if (!std::isfinite(alpha) || !std::isfinite(beta) || (!in_range && !allow_wide))
    throw Error(ErrorCode::InvalidKernel,
                "homogeneous kernel needs 0 <= alpha, beta <= 1 (got " + fmt_num(alpha) + ", " + fmt_num(beta) + ")");
  KernelSpec k(KernelKind::Homogeneous,
               "K=x^" + fmt_num(alpha) + "y^" + fmt_num(beta) + "+x^" + fmt_num(beta) + "y^" + fmt_num(alpha));
  k.alpha_ = alpha;
  k.beta_ = beta;
  return k;
}

KernelSpec KernelSpec::sqrt_product() { return homogeneous(0.5, 0.5).scaled(0.5).with_label("K=(xy)^0.5"); }

KernelSpec KernelSpec::product_plus_sum() { return KernelSpec(KernelKind::ProductPlusSum, "K=xy+x+y"); }

KernelSpec KernelSpec::quadratic_ratio() {
  return KernelSpec(KernelKind::QuadraticRatio, "K=(x^2-xy+y^2)/(xy+1)");
}

KernelSpec KernelSpec::exponential_ratio() {
  return KernelSpec(KernelKind::ExponentialRatio, "K=(e^x+e^y)/((e^x-1)(e^y-1)+x+y+1)");
}

KernelSpec KernelSpec::custom(std::string_view expr) {
  KernelSpec k(KernelKind::Custom, "K=" + std::string(expr));
  k.expr_ = Expr::parse(expr);
  // Probe a small grid for asymmetry of the raw expression.
  const double probes[] = {0.01, 0.3, 1.0, 2.5, 10.0, 123.0};
  for (double a : probes) {
    for (double b : probes) {
      const double f1 = (*k.expr_)(a, b), f2 = (*k.expr_)(b, a);
      const double scale = std::max(std::abs(f1), std::abs(f2));
      if (std::isfinite(scale) && std::abs(f1 - f2) > kAsymmetryTolerance * scale) k.asym_warning_ = true;
    }
  }
  if (k.asym_warning_)
    std::cerr << "warning: custom kernel '" << expr << "' is not symmetric; using (f(x,y)+f(y,x))/2\n";
  return k;
}

KernelSpec KernelSpec::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor))
    throw Error(ErrorCode::InvalidKernel, "kernel scale must be finite and >= 0");
  KernelSpec k = *this;
  k.scale_ *= factor;
  if (factor != 1.0) k.label_ = fmt_num(factor) + "*(" + label_ + ")";
  return k;
}

KernelSpec& KernelSpec::with_label(std::string label) {
  label_ = std::move(label);
  return *this;
}

double KernelSpec::domain_limit() const noexcept {
  return kind_ == KernelKind::ExponentialRatio ? kExpDomain : std::numeric_limits<double>::infinity();
}

double KernelSpec::operator()(double x, double y) const {
  const double lo = std::min(x, y);
  const double hi = std::max(x, y);
  const double v = scale_ * eval_ordered(lo, hi);
  if (!std::isfinite(v) || v < 0.0)
    throw Error(ErrorCode::NonFiniteEvaluation, label_ + " at (" + fmt_num(x) + ", " + fmt_num(y) + ") = " + fmt_num(v));
  return v;
}

double KernelSpec::eval_ordered(double x, double y) const {
  switch (kind_) {
    case KernelKind::Constant: return value_;
    case KernelKind::Sum: return x + y;
    case KernelKind::Product: return x * y;
    case KernelKind::Homogeneous:
      return std::pow(x, alpha_) * std::pow(y, beta_) + std::pow(x, beta_) * std::pow(y, alpha_);
    case KernelKind::ProductPlusSum: return x * y + x + y;
    case KernelKind::QuadraticRatio: return (x * x - x * y + y * y) / (x * y + 1.0);
    case KernelKind::ExponentialRatio: {
      if (y > kExpDomain)
        throw Error(ErrorCode::NonFiniteEvaluation, "exponential-growth kernel beyond clamp at " + fmt_num(y));
      // Numerator and denominator both scaled by e^{-x-y}.
      const double ex = std::exp(-x), ey = std::exp(-y);
      return (ex + ey) / (-std::expm1(-x) * -std::expm1(-y) + (x + y + 1.0) * ex * ey);
    }
    case KernelKind::Gelling: {
      const WeightSpec& b = *weight_;
      const double num = gel_.lambda * x * y - gel_.mu * (x + y + 1.0);
      const double gap = b(x) + b(y) - b(x + y);
      if (num <= 0.0 || gap <= 0.0) return gel_.epsilon;
      return std::max(num / gap, gel_.epsilon);
    }
    case KernelKind::Custom: return 0.5 * ((*expr_)(x, y) + (*expr_)(y, x));
  }
  return std::nan("");
}

KernelSpec gelling_kernel(const WeightSpec& b, double lambda, double mu, double epsilon) {
  if (!(lambda > 0.0) || !(mu >= 0.0) || !(epsilon > 0.0) || !std::isfinite(lambda) || !std::isfinite(mu) ||
      !std::isfinite(epsilon))
    throw Error(ErrorCode::InvalidParameters, "gelling kernel needs lambda > 0, mu >= 0, epsilon > 0");

  PairSampler sample;
  sample.lo = kStrictBoxFloor;
  sample.hi = b.kind() == WeightKind::Exponential ? 300.0 : 1e6;
  sample.count = 20000;
  const ConditionReport strict = check_subadditive(b, sample, true);
  if (!strict.holds()) {
    const Witness& w = *strict.witness;
    throw Error(ErrorCode::InvalidWeight, "weight " + b.label() + " is not strictly subadditive on sample; witness (" +
                                              fmt_num(w.x) + ", " + fmt_num(w.y) + ") gap " + fmt_num(w.margin));
  }
  const ConditionReport mono = check_nondecreasing(b, log_points(sample.lo, sample.hi, 4000, sample.seed));
  if (!mono.holds()) throw Error(ErrorCode::InvalidWeight, "weight " + b.label() + " is not nondecreasing on sample");
  if (b(0.0) < 0.0) throw Error(ErrorCode::InvalidWeight, "weight " + b.label() + " is negative at 0");

  KernelSpec k(KernelKind::Gelling, "K=gel[b=" + b.label() + ",lambda=" + fmt_num(lambda) + ",mu=" + fmt_num(mu) +
                                        ",eps=" + fmt_num(epsilon) + "]");
  k.gel_ = {lambda, mu, epsilon};
  k.weight_ = std::make_shared<const WeightSpec>(b);
  return k;
}

KernelSpec log_quotient_gelling_kernel(double lambda, double mu, double epsilon) {
  return gelling_kernel(WeightSpec::log_quotient(), lambda, mu, epsilon);
}

double growth_constant_H(double k) { return (k + 1.0) * std::log(k + 1.0) - k * std::log(k); }

std::vector<GrowthSample> growth_ratio(const KernelSpec& k, double slope, const std::vector<double>& xs) {
  if (!(slope > 0.0)) throw Error(ErrorCode::InvalidParameters, "growth_ratio needs slope > 0");
  std::vector<GrowthSample> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    if (!(x > std::numbers::e)) throw Error(ErrorCode::InvalidParameters, "growth_ratio needs x > e");
    if (i > 0 && !(x > xs[i - 1])) throw Error(ErrorCode::InvalidParameters, "growth_ratio needs increasing xs");
    const double lx = std::log(x);
    out.push_back({x, k(x, slope * x) / (x * lx * lx)});
  }
  return out;
}

}  // namespace sce
