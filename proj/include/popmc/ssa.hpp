#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "popmc/model.hpp"
#include "popmc/process.hpp"
#include "popmc/property.hpp"
#include "popmc/synchronize.hpp"

namespace popmc {

std::uint64_t splitmix64(std::uint64_t& state);
// Independent stream per (master seed, replication).
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t replication);

struct Trajectory {
  std::vector<std::string> labels;
  std::vector<int> initial;
  std::vector<double> times;
  std::vector<std::vector<int>> states;  // after each jump
  std::vector<int> fired;                // transition index per jump
  std::vector<int> at(double t) const;
};

// Count-scale rates of a process; product transitions with split metadata
// are evaluated from the base rates at the aggregated counts.
class RateEvaluator {
 public:
  RateEvaluator(const PopulationProcess& p, const PopulationProcess* base = nullptr, std::size_t m = 0);
  void rates(const std::vector<double>& x, std::vector<double>& out) const;
  const PopulationProcess& process() const { return *p_; }

 private:
  const PopulationProcess* p_;
  const PopulationProcess* base_;
  std::size_t m_;
  mutable std::vector<double> agg_, base_rates_;
};

Trajectory gillespie_run(const PopulationProcess& p, double T, std::uint64_t seed);
Trajectory gillespie_run(const PopulationModel& m, double T, std::uint64_t seed);

struct EstimateWithCI {
  double estimate = 0.0;
  std::size_t successes = 0;
  std::size_t runs = 0;
  double lo = 0.0, hi = 0.0;  // Wilson 95% interval
  double half_width = 0.0;
  double std_error = 0.0;     // binomial sqrt(p(1-p)/n)
};

EstimateWithCI wilson_interval(std::size_t successes, std::size_t runs, double z = 1.959963984540054);

// One tagged agent starting in s0 (counted inside the population) at time 0.
// Returns the acceptance time, +inf if the automaton does not accept by T.
// The automaton must have no parameters. `path` (optional) records the
// tagged agent's jumps.
double tagged_run(const PopulationModel& m, const PopulationProcess& base, const OneGDTA& d,
                  const std::vector<bool>& can_reach, int s0, double T, std::mt19937_64& rng,
                  TimedPath* path = nullptr);

std::vector<double> tagged_acceptance_times(const PopulationModel& m, const OneGDTA& d, int s0, double T,
                                            std::size_t runs, std::uint64_t seed);

// P(accept time <= h) for each horizon h.
std::vector<EstimateWithCI> acceptance_curve(const std::vector<double>& accept_times,
                                             const std::vector<double>& horizons);

// Final-state counts sum_{s, q in F} X_{s,q} at each horizon, per run.
std::vector<std::vector<int>> global_final_counts(const ProductPopulationModel& pm, const std::vector<double>& horizons,
                                                  std::size_t runs, std::uint64_t seed);

// Fraction of runs with final count in [lo_count, hi_count] per horizon.
std::vector<EstimateWithCI> global_estimate_curve(const std::vector<std::vector<int>>& counts, int lo_count,
                                                  int hi_count);

// Integer bounds for X/N in [a, b] (or counts).
std::pair<int, int> count_bounds(double a, double b, int N, bool counts);

}  // namespace popmc
