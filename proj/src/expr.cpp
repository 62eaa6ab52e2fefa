#include "sce/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sce/error.hpp"

namespace sce {

struct Expr::Node {
  enum class Kind { Number, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Log, Exp, Sqrt, Abs, Max, Min };
  Kind kind;
  double value = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;

  double eval(double x, double y) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::VarX: return x;
      case Kind::VarY: return y;
      case Kind::Neg: return -lhs->eval(x, y);
      case Kind::Add: return lhs->eval(x, y) + rhs->eval(x, y);
      case Kind::Sub: return lhs->eval(x, y) - rhs->eval(x, y);
      case Kind::Mul: return lhs->eval(x, y) * rhs->eval(x, y);
      case Kind::Div: return lhs->eval(x, y) / rhs->eval(x, y);
      case Kind::Pow: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
      case Kind::Log: return std::log(lhs->eval(x, y));
      case Kind::Exp: return std::exp(lhs->eval(x, y));
      case Kind::Sqrt: return std::sqrt(lhs->eval(x, y));
      case Kind::Abs: return std::abs(lhs->eval(x, y));
      case Kind::Max: return std::max(lhs->eval(x, y), rhs->eval(x, y));
      case Kind::Min: return std::min(lhs->eval(x, y), rhs->eval(x, y));
    }
    return std::nan("");
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Kind = Expr::Node::Kind;

NodePtr make(Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0.0) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->value = value;
  return n;
}

// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/') unary)*
// unary  := '-' unary | power
// power  := atom ('^' unary)?
// atom   := number | ident | ident '(' args ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse_all() {
    NodePtr n = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return n;
  }

  bool uses_y = false;

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError,
                "expression '" + std::string(src_) + "' column " + std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = make(Kind::Add, lhs, parse_term());
      else if (accept('-')) lhs = make(Kind::Sub, lhs, parse_term());
      else return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = make(Kind::Mul, lhs, parse_unary());
      else if (accept('/')) lhs = make(Kind::Div, lhs, parse_unary());
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(Kind::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (accept('^')) return make(Kind::Pow, base, parse_unary());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    if (accept('(')) {
      NodePtr inner = parse_expr();
      expect(')');
      return inner;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    const char* begin = src_.data() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return make(Kind::Number, nullptr, nullptr, v);
  }

  NodePtr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    if (name == "x") return make(Kind::VarX);
    if (name == "y") {
      uses_y = true;
      return make(Kind::VarY);
    }
    if (name == "pi") return make(Kind::Number, nullptr, nullptr, std::numbers::pi);
    if (name == "e") return make(Kind::Number, nullptr, nullptr, std::numbers::e);

    struct Fn {
      const char* name;
      Kind kind;
      int arity;
    };
    static constexpr Fn fns[] = {{"log", Kind::Log, 1},  {"exp", Kind::Exp, 1}, {"sqrt", Kind::Sqrt, 1},
                                 {"abs", Kind::Abs, 1},  {"max", Kind::Max, 2}, {"min", Kind::Min, 2}};
    for (const Fn& fn : fns) {
      if (name != fn.name) continue;
      expect('(');
      NodePtr a = parse_expr();
      NodePtr b;
      if (fn.arity == 2) {
        expect(',');
        b = parse_expr();
      }
      expect(')');
      return make(fn.kind, a, b);
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(std::string_view source) {
  Parser p(source);
  Expr e;
  e.root_ = p.parse_all();
  e.source_ = std::string(source);
  e.uses_y_ = p.uses_y;
  return e;
}

double Expr::operator()(double x, double y) const { return root_ ? root_->eval(x, y) : 0.0; }

}  // namespace sce
