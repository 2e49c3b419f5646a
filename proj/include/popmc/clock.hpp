#pragma once

#include <memory>
#include <string>
#include <vector>

#include "popmc/rational.hpp"

namespace popmc {

enum class Cmp { Lt, Le, Ge, Gt };

bool compare(double lhs, Cmp op, double rhs);
bool compare(const Rational& lhs, Cmp op, const Rational& rhs);
std::string to_string(Cmp op);

// Boolean combination of atoms `x op c` over the single global clock x.
class ClockConstraint {
 public:
  enum class Kind { True, False, Atom, Not, And, Or };

  ClockConstraint() = default;  // true
  static ClockConstraint always() { return {}; }
  static ClockConstraint never();
  static ClockConstraint atom(Cmp op, Rational c);
  // lo <= x < hi; hi absent means unbounded.
  static ClockConstraint interval(const Rational& lo, const Rational* hi);

  ClockConstraint operator!() const;
  ClockConstraint operator&&(const ClockConstraint& o) const;
  ClockConstraint operator||(const ClockConstraint& o) const;

  Kind kind() const;
  bool holds(double x) const;
  bool holds(const Rational& x) const;
  // Value on the open interval (lo, hi); requires no constant strictly
  // inside. `hi == nullptr` means (lo, inf).
  bool holds_on_open(const Rational& lo, const Rational* hi) const;
  std::vector<Rational> constants() const;
  std::string to_string() const;

 private:
  struct Node {
    Kind kind = Kind::True;
    Cmp op = Cmp::Le;
    Rational c;
    std::shared_ptr<const Node> lhs, rhs;
  };
  explicit ClockConstraint(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static bool eval(const Node* n, const Rational& x);
  static void collect(const Node* n, std::vector<Rational>& out);
  static std::string print(const Node* n);

  std::shared_ptr<const Node> node_;
};

// Rational close to a double time value, on a dyadic grid of spacing 2^-30.
Rational time_to_rational(double t);

}  // namespace popmc
