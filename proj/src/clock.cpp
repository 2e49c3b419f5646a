#include "popmc/clock.hpp"

#include <algorithm>
#include <cmath>

namespace popmc {

bool compare(double lhs, Cmp op, double rhs) {
  switch (op) {
    case Cmp::Lt: return lhs < rhs;
    case Cmp::Le: return lhs <= rhs;
    case Cmp::Ge: return lhs >= rhs;
    case Cmp::Gt: return lhs > rhs;
  }
  return false;
}

bool compare(const Rational& lhs, Cmp op, const Rational& rhs) {
  switch (op) {
    case Cmp::Lt: return lhs < rhs;
    case Cmp::Le: return lhs <= rhs;
    case Cmp::Ge: return lhs >= rhs;
    case Cmp::Gt: return lhs > rhs;
  }
  return false;
}

std::string to_string(Cmp op) {
  switch (op) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Ge: return ">=";
    case Cmp::Gt: return ">";
  }
  return "?";
}

ClockConstraint ClockConstraint::never() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::False;
  return ClockConstraint(n);
}

ClockConstraint ClockConstraint::atom(Cmp op, Rational c) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->op = op;
  n->c = c;
  return ClockConstraint(n);
}

ClockConstraint ClockConstraint::interval(const Rational& lo, const Rational* hi) {
  ClockConstraint c = lo == Rational(0) ? always() : atom(Cmp::Ge, lo);
  if (hi != nullptr) c = c && atom(Cmp::Lt, *hi);
  return c;
}

ClockConstraint::Kind ClockConstraint::kind() const { return node_ ? node_->kind : Kind::True; }

ClockConstraint ClockConstraint::operator!() const {
  if (kind() == Kind::True) return never();
  if (kind() == Kind::False) return always();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->lhs = node_;
  return ClockConstraint(n);
}

ClockConstraint ClockConstraint::operator&&(const ClockConstraint& o) const {
  if (kind() == Kind::True) return o;
  if (o.kind() == Kind::True) return *this;
  if (kind() == Kind::False || o.kind() == Kind::False) return never();
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->lhs = node_;
  n->rhs = o.node_;
  return ClockConstraint(n);
}

ClockConstraint ClockConstraint::operator||(const ClockConstraint& o) const {
  if (kind() == Kind::True || o.kind() == Kind::True) return always();
  if (kind() == Kind::False) return o;
  if (o.kind() == Kind::False) return *this;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->lhs = node_;
  n->rhs = o.node_;
  return ClockConstraint(n);
}

bool ClockConstraint::eval(const Node* n, const Rational& x) {
  if (n == nullptr) return true;
  switch (n->kind) {
    case Kind::True: return true;
    case Kind::False: return false;
    case Kind::Atom: return compare(x, n->op, n->c);
    case Kind::Not: return !eval(n->lhs.get(), x);
    case Kind::And: return eval(n->lhs.get(), x) && eval(n->rhs.get(), x);
    case Kind::Or: return eval(n->lhs.get(), x) || eval(n->rhs.get(), x);
  }
  return false;
}

bool ClockConstraint::holds(const Rational& x) const { return eval(node_.get(), x); }

bool ClockConstraint::holds(double x) const {
  // Compare in floating point: atoms against double clock values.
  struct Eval {
    static bool run(const Node* n, double x) {
      if (n == nullptr) return true;
      switch (n->kind) {
        case Kind::True: return true;
        case Kind::False: return false;
        case Kind::Atom: return compare(x, n->op, to_double(n->c));
        case Kind::Not: return !run(n->lhs.get(), x);
        case Kind::And: return run(n->lhs.get(), x) && run(n->rhs.get(), x);
        case Kind::Or: return run(n->lhs.get(), x) || run(n->rhs.get(), x);
      }
      return false;
    }
  };
  return Eval::run(node_.get(), x);
}

bool ClockConstraint::holds_on_open(const Rational& lo, const Rational* hi) const {
  const Rational probe = hi != nullptr ? (lo + *hi) / 2 : lo + 1;
  return holds(probe);
}

void ClockConstraint::collect(const Node* n, std::vector<Rational>& out) {
  if (n == nullptr) return;
  if (n->kind == Kind::Atom) out.push_back(n->c);
  collect(n->lhs.get(), out);
  collect(n->rhs.get(), out);
}

std::vector<Rational> ClockConstraint::constants() const {
  std::vector<Rational> out;
  collect(node_.get(), out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string ClockConstraint::print(const Node* n) {
  if (n == nullptr) return "true";
  switch (n->kind) {
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Atom: return "x " + popmc::to_string(n->op) + " " + popmc::to_string(n->c);
    case Kind::Not: return "!(" + print(n->lhs.get()) + ")";
    case Kind::And: return "(" + print(n->lhs.get()) + " && " + print(n->rhs.get()) + ")";
    case Kind::Or: return "(" + print(n->lhs.get()) + " || " + print(n->rhs.get()) + ")";
  }
  return "?";
}

std::string ClockConstraint::to_string() const { return print(node_.get()); }

Rational time_to_rational(double t) {
  constexpr std::int64_t kDen = std::int64_t{1} << 30;
  return Rational(static_cast<std::int64_t>(std::llround(t * static_cast<double>(kDen))), kDen);
}

}  // namespace popmc
