#pragma once

#include <Eigen/Dense>
#include <vector>

#include "popmc/model.hpp"
#include "popmc/ode.hpp"
#include "popmc/process.hpp"

namespace popmc {

// Fluid limit dPhi/dt = F(Phi) on the density scale.
OdeSolution fluid_solve(const PopulationProcess& p, double T, const Eigen::VectorXd& phi0, const OdeConfig& cfg = {});
OdeSolution fluid_solve(const PopulationModel& m, double T, const OdeConfig& cfg = {});

// Fluid limit chained through a sequence of processes on [bounds[j], bounds[j+1]].
OdeSolution fluid_chain(const std::vector<const PopulationProcess*>& procs, const std::vector<double>& bounds,
                        const Eigen::VectorXd& phi0, const OdeConfig& cfg = {});

struct ClaInit {
  Eigen::VectorXd phi;
  Eigen::VectorXd e;
  Eigen::MatrixXd c;
  static ClaInit deterministic(const Eigen::VectorXd& phi);
};

// Joint (Phi, E, C) trajectory packed as [Phi | E | vec(C)].
class ClaSolution {
 public:
  ClaSolution() = default;
  ClaSolution(OdeSolution sol, std::size_t n, int N) : sol_(std::move(sol)), n_(n), N_(N) {}

  std::size_t n() const { return n_; }
  int N() const { return N_; }
  const OdeSolution& ode() const { return sol_; }
  OdeSolution& ode() { return sol_; }

  Eigen::VectorXd phi(double t) const;
  Eigen::VectorXd e(double t) const;
  Eigen::MatrixXd c(double t) const;
  ClaInit state(double t) const;
  // Population scale: N Phi + sqrt(N) E and N C.
  Eigen::VectorXd pop_mean(double t) const;
  Eigen::MatrixXd pop_cov(double t) const;

 private:
  OdeSolution sol_;
  std::size_t n_ = 0;
  int N_ = 1;
};

OdeSystem cla_system(const PopulationProcess& p);

// Symmetrizes C and clips eigenvalues in [-1e-8, 0) to zero.
void project_covariance(Eigen::Ref<Eigen::VectorXd> packed, std::size_t n);

ClaSolution cla_solve(const PopulationProcess& p, double T, const ClaInit& init, const OdeConfig& cfg = {});
ClaSolution cla_solve(const PopulationModel& m, double T, const OdeConfig& cfg = {});
ClaSolution cla_chain(const std::vector<const PopulationProcess*>& procs, const std::vector<double>& bounds,
                      const ClaInit& init, const OdeConfig& cfg = {});

}  // namespace popmc
