#include "popmc/rate_expr.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace popmc {
namespace {

using Node = RateExpr::Node;
using Op = RateExpr::Op;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

double eval(const Node* n, std::span<const double> x, double pop, std::span<const double> params) {
  switch (n->op) {
    case Op::Number: return n->value;
    case Op::Variable: return x[static_cast<std::size_t>(n->index)];
    case Op::PopSize: return pop;
    case Op::Param: return params[static_cast<std::size_t>(n->index)];
    case Op::Add: return eval(n->lhs.get(), x, pop, params) + eval(n->rhs.get(), x, pop, params);
    case Op::Sub: return eval(n->lhs.get(), x, pop, params) - eval(n->rhs.get(), x, pop, params);
    case Op::Mul: return eval(n->lhs.get(), x, pop, params) * eval(n->rhs.get(), x, pop, params);
    case Op::Div: {
      const double d = eval(n->rhs.get(), x, pop, params);
      const double num = eval(n->lhs.get(), x, pop, params);
      if (d == 0.0) return num == 0.0 ? 0.0 : std::copysign(HUGE_VAL, num);
      return num / d;
    }
    case Op::Pow: return std::pow(eval(n->lhs.get(), x, pop, params), n->value);
    case Op::Neg: return -eval(n->lhs.get(), x, pop, params);
  }
  return 0.0;
}

// Returns true when the subtree contains no variables; `value` then holds it.
bool constant_value(const Node* n, double pop, std::span<const double> params, double& value) {
  switch (n->op) {
    case Op::Variable: return false;
    case Op::Number:
    case Op::PopSize:
    case Op::Param: value = eval(n, {}, pop, params); return true;
    case Op::Neg:
    case Op::Pow: {
      double a = 0.0;
      if (!constant_value(n->lhs.get(), pop, params, a)) return false;
      value = n->op == Op::Neg ? -a : std::pow(a, n->value);
      return true;
    }
    default: {
      double a = 0.0;
      double b = 0.0;
      if (!constant_value(n->lhs.get(), pop, params, a)) return false;
      if (!constant_value(n->rhs.get(), pop, params, b)) return false;
      value = eval(n, {}, pop, params);
      return true;
    }
  }
}

std::optional<Polynomial> to_poly(const Node* n, std::size_t nvars, double pop,
                                  std::span<const double> params) {
  switch (n->op) {
    case Op::Number:
    case Op::PopSize:
    case Op::Param: return Polynomial::constant(nvars, eval(n, {}, pop, params));
    case Op::Variable: return Polynomial::variable(nvars, static_cast<std::size_t>(n->index));
    case Op::Neg: {
      auto a = to_poly(n->lhs.get(), nvars, pop, params);
      if (!a) return std::nullopt;
      return -*a;
    }
    case Op::Pow: {
      auto a = to_poly(n->lhs.get(), nvars, pop, params);
      if (!a) return std::nullopt;
      return a->pow(static_cast<int>(n->value));
    }
    case Op::Div: {
      double d = 0.0;
      if (!constant_value(n->rhs.get(), pop, params, d) || d == 0.0) return std::nullopt;
      auto a = to_poly(n->lhs.get(), nvars, pop, params);
      if (!a) return std::nullopt;
      return *a * (1.0 / d);
    }
    default: {
      auto a = to_poly(n->lhs.get(), nvars, pop, params);
      auto b = to_poly(n->rhs.get(), nvars, pop, params);
      if (!a || !b) return std::nullopt;
      if (n->op == Op::Add) return *a + *b;
      if (n->op == Op::Sub) return *a - *b;
      return *a * *b;
    }
  }
}

void collect_vars(const Node* n, std::set<int>& out) {
  if (n == nullptr) return;
  if (n->op == Op::Variable) out.insert(n->index);
  collect_vars(n->lhs.get(), out);
  collect_vars(n->rhs.get(), out);
}

int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

void print(const Node* n, std::ostream& os) {
  auto child = [&](const Node* c, bool paren) {
    if (paren) os << "(";
    print(c, os);
    if (paren) os << ")";
  };
  switch (n->op) {
    case Op::Number: {
      std::ostringstream s;
      s.precision(17);
      s << n->value;
      os << s.str();
      return;
    }
    case Op::Variable:
    case Op::PopSize:
    case Op::Param: os << n->name; return;
    case Op::Neg:
      os << "-";
      child(n->lhs.get(), precedence(n->lhs->op) < precedence(Op::Neg));
      return;
    case Op::Pow:
      child(n->lhs.get(), precedence(n->lhs->op) <= precedence(Op::Pow));
      os << "^" << static_cast<int>(n->value);
      return;
    default: {
      const int p = precedence(n->op);
      child(n->lhs.get(), precedence(n->lhs->op) < p);
      os << (n->op == Op::Add ? " + " : n->op == Op::Sub ? " - " : n->op == Op::Mul ? "*" : "/");
      const bool right_paren = precedence(n->rhs->op) < p ||
                               (precedence(n->rhs->op) == p && (n->op == Op::Sub || n->op == Op::Div));
      child(n->rhs.get(), right_paren);
    }
  }
}

class ExprParser {
 public:
  ExprParser(TokenStream& ts, const SymbolResolver& resolve) : ts_(ts), resolve_(resolve) {}

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    while (ts_.check("+") || ts_.check("-")) {
      const Op op = ts_.next().text == "+" ? Op::Add : Op::Sub;
      lhs = make(op, lhs, parse_product());
    }
    return lhs;
  }

 private:
  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    while (ts_.check("*") || ts_.check("/")) {
      const Op op = ts_.next().text == "*" ? Op::Mul : Op::Div;
      lhs = make(op, lhs, parse_unary());
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (ts_.accept("-")) return make(Op::Neg, parse_unary());
    if (ts_.accept("+")) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (ts_.accept("^")) {
      bool negative = ts_.accept("-");
      const Token& t = ts_.expect_number();
      const double e = std::stod(t.text);
      if (negative || e != std::floor(e)) ts_.fail_at(t, "exponent must be a non-negative integer");
      auto n = std::make_shared<Node>();
      n->op = Op::Pow;
      n->value = e;
      n->lhs = base;
      return n;
    }
    return base;
  }

  NodePtr parse_atom() {
    if (ts_.accept("(")) {
      NodePtr inner = parse_sum();
      ts_.expect(")");
      return inner;
    }
    const Token& t = ts_.peek();
    if (t.kind == TokenKind::Number) {
      ts_.next();
      auto n = std::make_shared<Node>();
      n->op = Op::Number;
      n->value = std::stod(t.text);
      return n;
    }
    if (t.kind == TokenKind::Identifier) {
      ts_.next();
      auto sym = resolve_(t.text);
      if (!sym) ts_.fail_at(t, "unknown symbol '" + t.text + "'");
      auto n = std::make_shared<Node>();
      n->op = sym->kind;
      n->index = sym->index;
      n->name = t.text;
      return n;
    }
    ts_.fail("expected expression");
  }

  TokenStream& ts_;
  const SymbolResolver& resolve_;
};

}  // namespace

RateExpr RateExpr::number(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Number;
  n->value = v;
  return RateExpr(n);
}

double RateExpr::evaluate(std::span<const double> counts, double pop_size,
                          std::span<const double> params) const {
  if (!root_) return 0.0;
  return eval(root_.get(), counts, pop_size, params);
}

std::optional<Polynomial> RateExpr::to_polynomial(std::size_t nvars, double pop_size,
                                                  std::span<const double> params) const {
  if (!root_) return Polynomial(nvars);
  auto p = to_poly(root_.get(), nvars, pop_size, params);
  if (p) p->prune();
  return p;
}

std::vector<int> RateExpr::variables() const {
  std::set<int> s;
  collect_vars(root_.get(), s);
  return {s.begin(), s.end()};
}

std::string RateExpr::to_string() const {
  if (!root_) return "0";
  std::ostringstream os;
  print(root_.get(), os);
  return os.str();
}

RateExpr parse_rate_expr(TokenStream& ts, const SymbolResolver& resolve) {
  ExprParser p(ts, resolve);
  return RateExpr(p.parse_sum());
}

}  // namespace popmc
