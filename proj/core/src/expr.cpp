#include "semigeo/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

#include "semigeo/errors.hpp"

namespace semigeo {

namespace {

struct Token {
  enum Kind { kNumber, kIdent, kPlus, kMinus, kStar, kSlash, kCaret, kLParen, kRParen, kEnd };
  Kind kind;
  std::size_t offset;
  double number = 0.0;
  std::string_view text;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::kEnd;
      return;
    }
    const char c = src_[pos_];
    switch (c) {
      case '+': tok_.kind = Token::kPlus; ++pos_; return;
      case '-': tok_.kind = Token::kMinus; ++pos_; return;
      case '*': tok_.kind = Token::kStar; ++pos_; return;
      case '/': tok_.kind = Token::kSlash; ++pos_; return;
      case '^': tok_.kind = Token::kCaret; ++pos_; return;
      case '(': tok_.kind = Token::kLParen; ++pos_; return;
      case ')': tok_.kind = Token::kRParen; ++pos_; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.data() + pos_;
      char* end = nullptr;
      tok_.number = std::strtod(begin, &end);
      if (end == begin) throw ParseError("malformed number", pos_);
      tok_.kind = Token::kNumber;
      pos_ += static_cast<std::size_t>(end - begin);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.kind = Token::kIdent;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

}  // namespace

class ExprParser {
 public:
  ExprParser(std::string_view src, int dim) : lex_(src), dim_(dim) {}

  Expr run() {
    const int root = expression();
    const Token& t = lex_.peek();
    if (t.kind != Token::kEnd) throw ParseError("unexpected trailing input", t.offset);
    auto nodes = std::make_shared<const std::vector<Expr::Node>>(std::move(nodes_));
    return Expr(std::move(nodes), root, dim_);
  }

 private:
  using Op = Expr::Op;

  int add(Expr::Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int expression() {
    int left = term();
    while (true) {
      const Token& t = lex_.peek();
      if (t.kind == Token::kPlus || t.kind == Token::kMinus) {
        const Op op = t.kind == Token::kPlus ? Op::kAdd : Op::kSub;
        lex_.take();
        int right = term();
        left = add({op, 0.0, -1, left, right});
      } else {
        return left;
      }
    }
  }

  int term() {
    int left = unary();
    while (true) {
      const Token& t = lex_.peek();
      if (t.kind == Token::kStar || t.kind == Token::kSlash) {
        const Op op = t.kind == Token::kStar ? Op::kMul : Op::kDiv;
        lex_.take();
        int right = unary();
        left = add({op, 0.0, -1, left, right});
      } else {
        return left;
      }
    }
  }

  int unary() {
    if (lex_.peek().kind == Token::kMinus) {
      lex_.take();
      int child = unary();
      return add({Op::kNeg, 0.0, -1, child, -1});
    }
    return power();
  }

  int power() {
    int base = primary();
    if (lex_.peek().kind == Token::kCaret) {
      lex_.take();
      int exponent = unary();  // right-associative; allows 2^-3
      return add({Op::kPow, 0.0, -1, base, exponent});
    }
    return base;
  }

  int primary() {
    const Token t = lex_.take();
    switch (t.kind) {
      case Token::kNumber:
        return add({Op::kLiteral, t.number, -1, -1, -1});
      case Token::kLParen: {
        int inner = expression();
        const Token close = lex_.take();
        if (close.kind != Token::kRParen) throw ParseError("expected ')'", close.offset);
        return inner;
      }
      case Token::kIdent:
        return identifier(t);
      default:
        throw ParseError("expected a value", t.offset);
    }
  }

  int identifier(const Token& t) {
    static const std::map<std::string_view, Op> kFunctions = {
        {"sin", Op::kSin},   {"cos", Op::kCos},   {"tan", Op::kTan},
        {"exp", Op::kExp},   {"log", Op::kLog},   {"sqrt", Op::kSqrt},
        {"sinh", Op::kSinh}, {"cosh", Op::kCosh}, {"abs", Op::kAbs},
    };
    if (auto it = kFunctions.find(t.text); it != kFunctions.end()) {
      const Token open = lex_.take();
      if (open.kind != Token::kLParen)
        throw ParseError("expected '(' after function name", open.offset);
      int arg = expression();
      const Token close = lex_.take();
      if (close.kind != Token::kRParen) throw ParseError("expected ')'", close.offset);
      return add({it->second, 0.0, -1, arg, -1});
    }
    if (t.text.size() >= 2 && t.text[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < t.text.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(t.text[i]));
      if (digits) {
        const long idx = std::strtol(t.text.data() + 1, nullptr, 10);
        if (idx < 1 || idx > dim_)
          throw ParseError("variable index " + std::to_string(idx) +
                               " exceeds dimension " + std::to_string(dim_),
                           t.offset);
        return add({Op::kVar, 0.0, static_cast<int>(idx) - 1, -1, -1});
      }
    }
    throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.offset);
  }

  Lexer lex_;
  int dim_;
  std::vector<Expr::Node> nodes_;
};

Expr Expr::parse(std::string_view source, int dimension) {
  if (source.empty()) throw ParseError("empty expression", 0);
  if (dimension < 1) throw ValidationError("expression dimension must be positive");
  return ExprParser(source, dimension).run();
}

double Expr::eval(std::span<const double> point) const {
  if (!nodes_) throw EvalError("evaluating an empty expression");
  if (static_cast<int>(point.size()) != dim_)
    throw ValidationError("point length " + std::to_string(point.size()) +
                          " does not match expression dimension " + std::to_string(dim_));
  return eval_node(root_, point);
}

double Expr::eval_node(int idx, std::span<const double> point) const {
  const Node& n = (*nodes_)[idx];
  double v = 0.0;
  switch (n.op) {
    case Op::kLiteral: v = n.value; break;
    case Op::kVar: v = point[n.var]; break;
    case Op::kNeg: v = -eval_node(n.a, point); break;
    case Op::kAdd: v = eval_node(n.a, point) + eval_node(n.b, point); break;
    case Op::kSub: v = eval_node(n.a, point) - eval_node(n.b, point); break;
    case Op::kMul: v = eval_node(n.a, point) * eval_node(n.b, point); break;
    case Op::kDiv: {
      const double num = eval_node(n.a, point);
      const double den = eval_node(n.b, point);
      if (den == 0.0) throw EvalError("division by zero");
      v = num / den;
      break;
    }
    case Op::kPow: v = std::pow(eval_node(n.a, point), eval_node(n.b, point)); break;
    case Op::kSin: v = std::sin(eval_node(n.a, point)); break;
    case Op::kCos: v = std::cos(eval_node(n.a, point)); break;
    case Op::kTan: v = std::tan(eval_node(n.a, point)); break;
    case Op::kExp: v = std::exp(eval_node(n.a, point)); break;
    case Op::kLog: {
      const double arg = eval_node(n.a, point);
      if (arg < 0.0) throw EvalError("log of negative argument");
      v = std::log(arg);
      break;
    }
    case Op::kSqrt: {
      const double arg = eval_node(n.a, point);
      if (arg < 0.0) throw EvalError("sqrt of negative argument");
      v = std::sqrt(arg);
      break;
    }
    case Op::kSinh: v = std::sinh(eval_node(n.a, point)); break;
    case Op::kCosh: v = std::cosh(eval_node(n.a, point)); break;
    case Op::kAbs: v = std::abs(eval_node(n.a, point)); break;
  }
  if (!std::isfinite(v)) throw EvalError("non-finite result in expression evaluation");
  return v;
}

bool Expr::uses_variable(int index) const {
  if (!nodes_) return false;
  for (const Node& n : *nodes_)
    if (n.op == Op::kVar && n.var == index - 1) return true;
  return false;
}

void Expr::print_node(int idx, std::string& out) const {
  const Node& n = (*nodes_)[idx];
  auto binary = [&](const char* op) {
    out += '(';
    print_node(n.a, out);
    out += op;
    print_node(n.b, out);
    out += ')';
  };
  auto function = [&](const char* name) {
    out += name;
    out += '(';
    print_node(n.a, out);
    out += ')';
  };
  switch (n.op) {
    case Op::kLiteral: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      break;
    }
    case Op::kVar: out += 'x' + std::to_string(n.var + 1); break;
    case Op::kNeg:
      out += "(-";
      print_node(n.a, out);
      out += ')';
      break;
    case Op::kAdd: binary("+"); break;
    case Op::kSub: binary("-"); break;
    case Op::kMul: binary("*"); break;
    case Op::kDiv: binary("/"); break;
    case Op::kPow: binary("^"); break;
    case Op::kSin: function("sin"); break;
    case Op::kCos: function("cos"); break;
    case Op::kTan: function("tan"); break;
    case Op::kExp: function("exp"); break;
    case Op::kLog: function("log"); break;
    case Op::kSqrt: function("sqrt"); break;
    case Op::kSinh: function("sinh"); break;
    case Op::kCosh: function("cosh"); break;
    case Op::kAbs: function("abs"); break;
  }
}

std::string Expr::to_string() const {
  if (!nodes_) return {};
  std::string out;
  print_node(root_, out);
  return out;
}

}  // namespace semigeo
