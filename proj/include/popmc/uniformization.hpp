#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "popmc/process.hpp"

namespace popmc {

struct TransientDistribution {
  std::vector<std::vector<int>> states;
  Eigen::VectorXd prob;
  // Distribution of sum_{v in vars} X_v.
  std::map<int, double> marginal(const std::vector<int>& vars) const;
};

// Transient distribution at T by uniformization (Poisson tail 1e-10),
// chained across the processes on [bounds[j], bounds[j+1]].
TransientDistribution exact_transient_chain(const std::vector<const PopulationProcess*>& procs,
                                            const std::vector<double>& bounds, std::size_t cap = 200000);
TransientDistribution exact_transient(const PopulationProcess& p, double T, std::size_t cap = 200000);

}  // namespace popmc
