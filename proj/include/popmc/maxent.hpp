#pragma once

#include <vector>

#include "popmc/error.hpp"

namespace popmc {

struct MomentConstraints {
  std::vector<double> raw;  // E[x^1..x^m]
  double lo = 0.0;          // support
  double hi = 1.0;
  int order() const { return static_cast<int>(raw.size()); }
};

class MaxEntError : public Error {
 public:
  using Error::Error;
};

// p(x) = exp(-sum_k lambda_k z^k - log Z) with z = (x - shift) / scale.
struct MaxEntDensity {
  std::vector<double> lambda;
  double log_z = 0.0;
  double shift = 0.0;
  double scale = 1.0;
  double zlo = 0.0, zhi = 0.0;
  std::size_t nodes = 200;
  int iterations = 0;

  double density(double x) const;          // on the original scale
  std::vector<double> moments_z(int kmax) const;  // E[z^k], k = 0..kmax
};

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w);

// Throws Error on infeasible moments, MaxEntError on non-convergence.
MaxEntDensity reconstruct(const MomentConstraints& c);
double interval_prob(const MaxEntDensity& d, double lo, double hi);

// Dual objective in standardized coordinates, exposed for convexity checks.
double maxent_dual(const std::vector<double>& lambda, const std::vector<double>& z_moments, double zlo, double zhi,
                   std::size_t nodes = 200);

}  // namespace popmc
