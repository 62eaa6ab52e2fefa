#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sce/expr.hpp"
#include "sce/weights.hpp"

namespace sce {

enum class KernelKind {
  Constant,
  Sum,
  Product,
  Homogeneous,
  ProductPlusSum,
  QuadraticRatio,
  ExponentialRatio,
  Gelling,
  Custom,
};

struct GellingParams {
  double lambda = 1.0;
  double mu = 0.0;
  double epsilon = 1e-3;
};

/// Symmetric nonnegative coagulation rate K(x, y).
///
/// Immutable once built. Evaluation always sees (min(x,y), max(x,y)), so
/// symmetry is exact bit for bit. Every variant carries an overall scale
/// factor (1 unless set), which is how (xy)^(1/2) is expressed as half the
/// homogeneous kernel with alpha = beta = 1/2.
class KernelSpec {
 public:
  static KernelSpec constant(double c);
  static KernelSpec sum();
  static KernelSpec product();
  /// x^a y^b + x^b y^a. Exponents outside [0, 1] need allow_wide.
  static KernelSpec homogeneous(double alpha, double beta, bool allow_wide = false);
  static KernelSpec sqrt_product();
  static KernelSpec product_plus_sum();
  static KernelSpec quadratic_ratio();
  static KernelSpec exponential_ratio();
  static KernelSpec custom(std::string_view expr);

  KernelSpec scaled(double factor) const;
  KernelSpec& with_label(std::string label);

  KernelKind kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }
  double scale() const noexcept { return scale_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double constant_value() const noexcept { return value_; }
  const GellingParams& gelling() const noexcept { return gel_; }
  const WeightSpec* gelling_weight() const noexcept { return weight_.get(); }
  const Expr* expr() const noexcept { return expr_ ? &*expr_ : nullptr; }
  bool asymmetry_warning() const noexcept { return asym_warning_; }

  /// Largest admissible size argument (ExponentialRatio: 700).
  double domain_limit() const noexcept;

  double operator()(double x, double y) const;

 private:
  friend KernelSpec gelling_kernel(const WeightSpec& b, double lambda, double mu, double epsilon);
  KernelSpec(KernelKind kind, std::string label) : kind_(kind), label_(std::move(label)) {}

  double eval_ordered(double lo, double hi) const;

  KernelKind kind_;
  std::string label_;
  double scale_ = 1.0;
  double value_ = 0.0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  GellingParams gel_;
  std::shared_ptr<const WeightSpec> weight_;
  std::optional<Expr> expr_;
  bool asym_warning_ = false;
};

/// K(x, y) evaluated with canonical ordering. Throws Error{NonFiniteEvaluation}.
inline double eval(const KernelSpec& k, double x, double y) { return k(x, y); }

/// max((lambda x y - mu (x+y+1)) / (b(x)+b(y)-b(x+y)), epsilon), with the value
/// epsilon wherever the numerator or the gap is nonpositive (axes included).
/// Throws Error{InvalidWeight} unless b passes the sampled strict
/// subadditivity and monotonicity checks, Error{InvalidParameters} for bad
/// lambda, mu or epsilon.
KernelSpec gelling_kernel(const WeightSpec& b, double lambda, double mu, double epsilon);

/// Gelling kernel with b(x) = x / log(x + 2).
KernelSpec log_quotient_gelling_kernel(double lambda = 1.0, double mu = 0.0, double epsilon = 1e-3);

struct GrowthSample {
  double x;
  double ratio;
};

/// K(x, kx) / (x (log x)^2) for each x. Requires xs strictly increasing and > e.
std::vector<GrowthSample> growth_ratio(const KernelSpec& k, double slope, const std::vector<double>& xs);

/// H(k) = (k+1) log(k+1) - k log k.
double growth_constant_H(double k);

}  // namespace sce
