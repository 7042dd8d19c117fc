#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace semigeo {

// Immutable parsed scalar expression in the coordinate variables x1..xn.
//
// Grammar: real literals, x1..xn, unary minus, binary + - * / ^, the
// functions sin cos tan exp log sqrt sinh cosh abs, and parentheses.
// Precedence: ^ binds tighter than unary minus, then * /, then + -;
// ^ is right-associative (so -x1^2 == -(x1^2) and 2^3^2 == 2^(3^2)).
//
// Instances are immutable after parsing; eval() is pure and reentrant.
class Expr {
 public:
  Expr() = default;

  static Expr parse(std::string_view source, int dimension);

  // Evaluates at a point of length dimension(). Throws EvalError on
  // division by zero, log/sqrt of a negative argument, or any non-finite
  // intermediate result.
  double eval(std::span<const double> point) const;

  int dimension() const { return dim_; }
  bool empty() const { return nodes_ == nullptr; }

  // True when the variable with the given 1-based index appears in the tree.
  bool uses_variable(int index) const;

  // Reparseable textual form (fully parenthesized).
  std::string to_string() const;

 private:
  enum class Op : unsigned char {
    kLiteral, kVar, kNeg, kAdd, kSub, kMul, kDiv, kPow,
    kSin, kCos, kTan, kExp, kLog, kSqrt, kSinh, kCosh, kAbs,
  };
  struct Node {
    Op op;
    double value = 0.0;  // kLiteral
    int var = -1;        // kVar, 0-based
    int a = -1, b = -1;  // children
  };

  Expr(std::shared_ptr<const std::vector<Node>> nodes, int root, int dim)
      : nodes_(std::move(nodes)), root_(root), dim_(dim) {}

  double eval_node(int idx, std::span<const double> point) const;
  void print_node(int idx, std::string& out) const;

  std::shared_ptr<const std::vector<Node>> nodes_;
  int root_ = -1;
  int dim_ = 0;

  friend class ExprParser;
};

}  // namespace semigeo
