#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "popmc/polynomial.hpp"

namespace popmc {

using RateFn = std::function<double(std::span<const double>)>;

// One transition of a population CTMC in flattened form. Both the base model
// and the synchronized product model are lowered to this representation.
struct ProcessTransition {
  std::string name;
  std::vector<int> update;
  // (variable, minimum count) pairs; the rate is 0 when any is violated.
  std::vector<std::pair<int, int>> guard;
  RateFn count_rate;    // f^(N)(X), unclamped
  RateFn density_rate;  // f(x) with x = X/N, unclamped
  std::optional<Polynomial> count_poly;
  std::optional<Polynomial> density_poly;
  // d density_poly / d x_i, filled by PopulationProcess::finalize.
  std::vector<Polynomial> density_grad;

  // Product transitions only: count rate = factor * base rate(aggregate)
  // * prod falling(x_v, k) / prod falling(X_s, k_s).
  struct Split {
    int base = -1;
    double factor = 1.0;
    std::vector<std::pair<int, int>> slots;  // (product variable, k)
    std::vector<std::pair<int, int>> agg;    // (base state, k_s)
  };
  std::optional<Split> split;
};

class PopulationProcess {
 public:
  std::vector<std::string> labels;
  int N = 0;
  std::vector<double> initial;  // counts
  std::vector<ProcessTransition> transitions;

  std::size_t dim() const { return labels.size(); }
  // Precomputes symbolic gradients; call after the transition list is final.
  void finalize();
  bool polynomial() const;  // every count_poly present
  int index_of(const std::string& label) const;

  // Guarded and clamped count-scale rate.
  double rate(std::size_t k, std::span<const double> counts) const;
  // Clamped density-scale rate (no guard: fluid quantities are continuous).
  double density(std::size_t k, std::span<const double> x) const;

  Eigen::VectorXd drift(std::span<const double> x) const;
  Eigen::MatrixXd diffusion(std::span<const double> x) const;
  Eigen::MatrixXd jacobian(std::span<const double> x) const;
  Eigen::MatrixXd jacobian_fd(std::span<const double> x) const;

  Eigen::VectorXd initial_density() const;
};

// Clamp helper shared by all rate evaluations: negatives below -1e-12 are
// reported once per transition name.
double clamp_rate(double value, const std::string& name);

}  // namespace popmc
