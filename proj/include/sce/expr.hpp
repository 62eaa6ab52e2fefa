#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace sce {

/// Compiled arithmetic expression in the variables x and y.
///
/// Grammar: numbers, x, y, pi, e, unary minus, + - * / ^ (right-assoc),
/// parentheses and the functions log, exp, sqrt, abs, max(a,b), min(a,b).
/// Parsing throws Error{ParseError} with the column of the offending token.
class Expr {
 public:
  struct Node;

  static Expr parse(std::string_view source);

  double operator()(double x, double y = 0.0) const;

  bool uses_y() const noexcept { return uses_y_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
  bool uses_y_ = false;
};

}  // namespace sce
