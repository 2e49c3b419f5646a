#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "popmc/lexer.hpp"
#include "popmc/polynomial.hpp"

namespace popmc {

// Symbolic rate expression over population counts X_s, the population size N
// and named parameters: + - * / and integer powers.
class RateExpr {
 public:
  enum class Op { Number, Variable, PopSize, Param, Add, Sub, Mul, Div, Pow, Neg };

  struct Node {
    Op op = Op::Number;
    double value = 0.0;  // Number literal, or exponent for Pow
    int index = -1;      // Variable / Param index
    std::string name;    // for printing
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  RateExpr() = default;
  explicit RateExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  static RateExpr number(double v);

  bool empty() const { return root_ == nullptr; }
  const Node* root() const { return root_.get(); }

  // Raw value (no clamping). `counts` indexes variables, `params` parameters.
  double evaluate(std::span<const double> counts, double pop_size, std::span<const double> params) const;

  // Polynomial in the count variables with N and parameters folded into the
  // coefficients; std::nullopt when the expression divides by a variable.
  std::optional<Polynomial> to_polynomial(std::size_t nvars, double pop_size,
                                          std::span<const double> params) const;

  // Indices of variables the expression reads.
  std::vector<int> variables() const;

  std::string to_string() const;

 private:
  std::shared_ptr<const Node> root_;
};

struct ExprSymbol {
  RateExpr::Op kind;  // Variable, PopSize or Param
  int index = -1;
};

using SymbolResolver = std::function<std::optional<ExprSymbol>(const std::string&)>;

// Parses an infix expression from the stream; stops before the first token
// that cannot continue the expression. Unknown identifiers are parse errors.
RateExpr parse_rate_expr(TokenStream& ts, const SymbolResolver& resolve);

}  // namespace popmc
