#pragma once

#include <string>
#include <vector>

#include "popmc/fluid.hpp"
#include "popmc/individual.hpp"
#include "popmc/model.hpp"
#include "popmc/property.hpp"
#include "popmc/synchronize.hpp"

namespace popmc {

enum class GlobalMethod {
  Cla,      // Gaussian from the central limit approximation
  Moments,  // closed moment equations of `order`, max-entropy density
  MaxEnt,   // CLA mean and variance pushed through the max-entropy solver
};

struct GlobalConfig {
  GlobalMethod method = GlobalMethod::Cla;
  int order = 4;
  bool correct = true;
  OdeConfig ode;
  LocalConfig local;  // for nested state formulas
};

struct GaussianEstimate {
  double mean = 0.0;      // agents
  double variance = 0.0;  // agents^2
};

struct ThresholdInterval {
  double a = 0.0, b = 1.0;     // as given (fractions or counts)
  double lo = 0.0, hi = 0.0;   // numeric bounds in agents
  bool empty = false;
};

// [a, b] in agents (fractions scaled by N); with `correct`, the half-cell
// bounds ceil(aN) - 1/2 and floor(bN) + 1/2, open-ended at 0 and N.
ThresholdInterval finite_size_correct(double a, double b, int N, bool counts, bool correct);

double gaussian_interval_prob(const GaussianEstimate& g, double lo, double hi);

// Moments of a count variable on [0, N] turned into an interval probability.
double moment_interval_prob(const std::vector<double>& raw, int N, double lo, double hi);

struct GlobalCurve {
  std::vector<double> T;
  std::vector<double> estimate;
  std::vector<double> mean;
  std::vector<double> variance;
};

// Product population model with X_Final for one automaton.
ProductPopulationModel final_counter_model(const PopulationModel& m, const OneGDTA& d, const Rational& horizon);

// Probability that the fraction (or count) of agents satisfying d within T
// lies in [a, b], for each T in `horizons` (all <= horizon).
GlobalCurve check_path_global_curve(const PopulationModel& m, const OneGDTA& d, const Rational& horizon, double a,
                                    double b, bool counts, const std::vector<double>& horizons,
                                    const GlobalConfig& cfg = {});
double check_path_global(const PopulationModel& m, const OneGDTA& d, const Rational& horizon, double a, double b,
                         bool counts, const GlobalConfig& cfg = {});

// Probability that the number of agents whose state satisfies f at t0 lies
// in [a, b].
double check_state_global(const PopulationModel& m, const CslTaFormula& f, double a, double b, bool counts, double t0,
                          const GlobalConfig& cfg = {});

struct Verdict {
  bool value = false;
  double estimate = -1.0;  // atoms only
  std::string text;
  std::vector<std::string> warnings;
  std::vector<Verdict> children;
};

Verdict check_global_formula(const GlobalProperty& g, const PopulationModel& m, const GlobalConfig& cfg = {});

}  // namespace popmc
