#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <vector>

#include "popmc/ode.hpp"
#include "popmc/polynomial.hpp"
#include "popmc/process.hpp"

namespace popmc {

// Non-centred count moments E[X^beta] tracked up to total degree `order`;
// higher ones are closed by zeroing central moments above `order`.
struct MomentSpec {
  int order = 4;
  std::size_t nvars = 0;
  std::vector<Monomial> monomials;  // degree 1..order, graded then lexicographic

  static MomentSpec full(std::size_t nvars, int order);
  int index_of(const Monomial& m) const;  // -1 if not tracked

  std::map<Monomial, int> lookup;
};

// Evaluates E[X^alpha] for any alpha from the tracked raw moments.
class MomentClosure {
 public:
  explicit MomentClosure(MomentSpec spec);
  const MomentSpec& spec() const { return spec_; }

  // Central moments E[(X - mu)^gamma] indexed like spec().monomials.
  std::vector<double> central(std::span<const double> raw) const;
  double expect(const Monomial& alpha, std::span<const double> raw, const std::vector<double>& central) const;
  double expect(const Monomial& alpha, std::span<const double> raw) const;
  double expect(const Polynomial& p, std::span<const double> raw) const;

 private:
  struct Term {
    int index;  // tracked monomial, -1 for the constant 1
    double coef;
    Monomial power;  // multiplies mu^power
  };
  const std::vector<Term>& expansion(const Monomial& alpha) const;
  MomentSpec spec_;
  std::vector<std::vector<Term>> central_terms_;
  mutable std::map<Monomial, std::vector<Term>> cache_;
};

struct MomentEquation {
  Monomial target;
  std::map<Monomial, double> terms;  // d/dt E[X^target] = sum c E[X^alpha]
};

// Dynkin generator applied to each tracked monomial; throws ModelError on a
// non-polynomial rate.
std::vector<MomentEquation> dynkin_terms(const PopulationProcess& p, const MomentSpec& spec);
OdeSystem moment_equations(const PopulationProcess& p, const MomentSpec& spec);

// Raw moments of a point mass at x.
Eigen::VectorXd deterministic_moments(const MomentSpec& spec, std::span<const double> x);

OdeSolution moment_solve(const PopulationProcess& p, const MomentSpec& spec, double T, const Eigen::VectorXd& y0,
                         const OdeConfig& cfg = {});

}  // namespace popmc
