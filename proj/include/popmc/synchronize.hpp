#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "popmc/model.hpp"
#include "popmc/process.hpp"
#include "popmc/property.hpp"

namespace popmc {

// Gives every local transition a unique label. Shared labels alpha become
// alpha_<source> (alpha_<source>_<target> if still ambiguous); DTA edges on
// alpha are copied once per renamed transition. Local transition indices are
// unchanged.
std::pair<AgentClass, OneGDTA> relabel_unique(const AgentClass& a, const OneGDTA& d);

// Drops edges whose state formula fails at the source of the (unique) local
// transition carrying the edge's label; remaining guards become `true`.
OneGDTA prune_state_conditions(const AgentClass& relabeled, const OneGDTA& d);

// Deterministic finite automaton over local-transition indices.
struct RegionDfa {
  // next[q][l] = successor of q on local transition l (q itself if no edge).
  std::vector<std::vector<int>> next;
};

struct SlicedProperty {
  std::vector<Rational> times;  // 0 = t_0 < t_1 < ... < t_k = T
  std::vector<RegionDfa> regions;
  std::vector<std::string> q_names;
  std::vector<bool> final;
  int initial = 0;

  std::size_t num_regions() const { return regions.size(); }
  std::vector<double> times_double() const;
  // Region containing clock value x, using the half-open cover.
  std::size_t region_at(double x) const;
};

SlicedProperty slice_by_clock(const AgentClass& relabeled, const OneGDTA& pruned, const Rational& horizon);

struct ProductLocal {
  int local = 0;  // index into the agent's local transitions
  int from = 0;   // product state (s, q)
  int to = 0;     // product state (s', q')
};

struct ProductAgentClass {
  std::size_t n = 0;  // agent states
  std::size_t m = 0;  // automaton states
  AgentClass agent;   // relabeled agent
  SlicedProperty sliced;
  std::vector<std::vector<ProductLocal>> regions;  // transitions per region

  std::size_t size() const { return n * m; }
  int index(int s, int q) const { return s * static_cast<int>(m) + q; }
  int agent_state(int product_state) const { return product_state / static_cast<int>(m); }
  int q_state(int product_state) const { return product_state % static_cast<int>(m); }
  std::string state_name(int product_state) const;
};

ProductAgentClass product_agent(const AgentClass& relabeled, const SlicedProperty& sp);

// Convenience: the four synchronization steps for one automaton.
ProductAgentClass synchronize(const AgentClass& a, const OneGDTA& d, const Rational& horizon);

struct ProductPopulationModel {
  ProductAgentClass agent;
  std::vector<PopulationProcess> regions;  // one per clock region
  PopulationProcess base;                  // unsynchronized model
  bool has_final_counter = false;

  std::size_t dim() const { return regions.empty() ? 0 : regions.front().dim(); }
  int final_index() const { return has_final_counter ? static_cast<int>(dim()) - 1 : -1; }
  std::vector<double> initial_counts() const { return regions.front().initial; }
};

// Split rates: each base transition and assignment of automaton states to
// the agents of its synchronisation set becomes one product transition.
// Assignments yielding the same multiset of product moves are merged.
ProductPopulationModel product_population(const PopulationModel& m, const ProductAgentClass& p);

// Appends X_Final, incremented by the number of agents a transition moves
// from a non-final into a final automaton state.
ProductPopulationModel augment_final_counter(const ProductPopulationModel& pm);

// Generator of one tagged agent over S x Q in region j at global count x.
Eigen::MatrixXd individual_generator(const ProductAgentClass& p, const PopulationModel& m,
                                     std::span<const double> x, std::size_t region);

// Per local transition l: sum over global transitions tau containing l of
// m_tau * f_tau(x) / x_source (0 when x_source = 0).
std::vector<double> individual_local_rates(const PopulationModel& m, std::span<const double> x);

Eigen::MatrixXd assemble_generator(const ProductAgentClass& p, std::size_t region,
                                   std::span<const double> local_rates);

std::string product_to_json(const ProductPopulationModel& pm);

}  // namespace popmc
