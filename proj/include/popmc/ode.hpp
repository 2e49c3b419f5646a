#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace popmc {

struct OdeSystem {
  std::size_t dim = 0;
  std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)> rhs;
  std::vector<std::string> labels;
};

struct OdeConfig {
  double rtol = 1e-6;
  double atol = 1e-9;
  double h0 = 0.0;       // 0 picks an initial step automatically
  double hmax = 0.0;     // 0 means unbounded
  std::size_t max_steps = 5'000'000;
  // Applied to each accepted state (e.g. symmetrization); may modify y.
  std::function<void(double, Eigen::VectorXd&)> post_step;
};

struct OdeStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

// Dormand-Prince 5(4) trajectory with continuous extension.
class OdeSolution {
 public:
  double t_start() const { return t_.empty() ? 0.0 : t_.front(); }
  double t_end() const { return t_end_; }
  std::size_t dim() const { return dim_; }
  const OdeStats& stats() const { return stats_; }
  const std::vector<double>& breakpoints() const { return t_; }
  const std::vector<std::string>& labels() const { return labels_; }

  Eigen::VectorXd operator()(double t) const;
  double component(double t, std::size_t i) const;
  Eigen::VectorXd final_state() const { return y_end_; }

  // Appends a solution starting where this one ends.
  void append(const OdeSolution& next);

 private:
  friend OdeSolution integrate(const OdeSystem&, double, double, const Eigen::VectorXd&, const OdeConfig&);
  friend OdeSolution constant_solution(double, double, const Eigen::VectorXd&);
  std::size_t locate(double t) const;

  std::size_t dim_ = 0;
  std::vector<std::string> labels_;
  std::vector<double> t_;   // step start times
  std::vector<double> h_;   // step sizes
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 5>> rc_;  // dense output coefficients
  double t_end_ = 0.0;
  Eigen::VectorXd y_end_;
  OdeStats stats_;
};

// Throws NumericalError when the step size underflows.
OdeSolution integrate(const OdeSystem& sys, double t0, double t1, const Eigen::VectorXd& y0,
                      const OdeConfig& cfg = {});

// Zero-length or trivial solution holding y on [t0, t1].
OdeSolution constant_solution(double t0, double t1, const Eigen::VectorXd& y);

}  // namespace popmc
