#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace popmc {

// Exponent vector over a fixed set of variables.
using Monomial = std::vector<int>;

int degree(const Monomial& m);

// Sparse multivariate polynomial with real coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, double c);
  static Polynomial variable(std::size_t nvars, std::size_t index);

  std::size_t nvars() const { return nvars_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  // Largest exponent of one variable across all terms.
  int degree_in(std::size_t var) const;

  void add_term(const Monomial& m, double c);

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double c) const;
  Polynomial operator-() const { return *this * -1.0; }
  Polynomial pow(int e) const;

  double evaluate(std::span<const double> x) const;
  Polynomial derivative(std::size_t var) const;

  // Quotient by (x_var - root) when the division is exact (up to tol in the
  // remainder coefficients), std::nullopt otherwise.
  std::optional<Polynomial> divide_linear(std::size_t var, double root, double tol = 1e-12) const;

  // Replaces each variable i by images[i] (all over the same target space).
  Polynomial substitute(const std::vector<Polynomial>& images) const;

  // Drops coefficients with |c| <= tol.
  void prune(double tol = 0.0);

  std::string to_string(const std::vector<std::string>& names) const;

 private:
  std::size_t nvars_ = 0;
  std::map<Monomial, double> terms_;
};

}  // namespace popmc
