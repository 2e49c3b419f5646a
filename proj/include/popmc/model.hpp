#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "popmc/process.hpp"
#include "popmc/rate_expr.hpp"

namespace popmc {

struct LocalTransition {
  int source = 0;
  std::string label;
  int target = 0;
};

struct AgentClass {
  std::vector<std::string> states;
  std::vector<LocalTransition> local_transitions;

  int state_index(std::string_view name) const;  // -1 if absent
  // Index of (source, label, target), -1 if absent.
  int find_local(int source, std::string_view label, int target) const;
  std::vector<std::string> labels() const;  // distinct labels, first-seen order
  void validate() const;
};

struct SyncEntry {
  int local = 0;  // index into AgentClass::local_transitions
  int multiplicity = 1;
};

struct GlobalTransition {
  std::string name;
  std::vector<SyncEntry> sync;
  RateExpr rate;
};

using UpdateVector = std::vector<int>;

class PopulationModel {
 public:
  AgentClass agent;
  std::vector<GlobalTransition> transitions;
  std::vector<std::string> param_names;
  std::vector<double> param_values;
  int N = 1;
  std::vector<int> initial;
  // Initial-count expressions per state (may reference N and parameters);
  // kept so that the population size can be changed after parsing.
  std::vector<RateExpr> initial_exprs;

  std::size_t num_states() const { return agent.states.size(); }
  int param_index(std::string_view name) const;
  void set_param(const std::string& name, double value);
  // Re-evaluates the initial state for a new population size.
  void set_population(int n);
  void validate() const;

  // κ_s: agents in state s consumed by one firing.
  std::vector<int> guard_counts(const GlobalTransition& t) const;
  // Raw rate expression value at a count vector (no guard, no clamp).
  double raw_rate(const GlobalTransition& t, std::span<const double> counts) const;
  // Guarded, clamped rate at counts, evaluated at population size pop.
  double rate(const GlobalTransition& t, std::span<const double> counts) const;
  // f(x̂) = f^(N)(N x̂) / N at the model's N, clamped.
  double density_rate(const GlobalTransition& t, std::span<const double> xhat) const;

  PopulationProcess to_process() const;
};

UpdateVector update_vector(const GlobalTransition& t, const AgentClass& a);

Eigen::VectorXd drift(const PopulationModel& m, std::span<const double> xhat);
Eigen::MatrixXd diffusion(const PopulationModel& m, std::span<const double> xhat);

struct EnabledTransition {
  int transition = 0;
  double rate = 0.0;
  UpdateVector update;
};

std::vector<EnabledTransition> enabled_transitions(const PopulationModel& m, std::span<const int> x);

// Throws ModelError naming the first transition whose scaled rate differs
// between N = 1e3 and N = 1e6 by more than `rel_tol` on `samples` random points.
void check_density_dependence(const PopulationModel& m, int samples = 32, double rel_tol = 1e-9,
                              unsigned seed = 12345);

PopulationModel parse_model(std::string_view text);
PopulationModel load_model(const std::string& path);

}  // namespace popmc
