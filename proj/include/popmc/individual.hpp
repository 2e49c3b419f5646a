#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "popmc/model.hpp"
#include "popmc/ode.hpp"
#include "popmc/property.hpp"
#include "popmc/signal.hpp"
#include "popmc/synchronize.hpp"

namespace popmc {

enum class ScheduleMethod { Fluid, Moments };

struct LocalConfig {
  ScheduleMethod method = ScheduleMethod::Fluid;
  int order = 4;               // moment closure order
  OdeConfig ode;
  std::size_t grid = 1000;     // t0 samples for curves
  bool kolmogorov_t0 = true;   // combined forward/backward equations; false = one forward solve per t0
  double window_fraction = 0.1;
  double min_window_fraction = 1e-4;
};

// Time-dependent local rates g_l(t) for one tagged agent.
class RateSchedule {
 public:
  using Fn = std::function<std::vector<double>(double)>;
  RateSchedule() = default;
  RateSchedule(Fn fn, double t_end) : fn_(std::move(fn)), t_end_(t_end) {}

  // Along x = N Phi(t).
  static RateSchedule fluid(const PopulationModel& m, double t_end, const OdeConfig& cfg = {});
  // E[g_l(X(t))] from the closed moment equations of the given order.
  static RateSchedule moments(const PopulationModel& m, int order, double t_end, const OdeConfig& cfg = {});
  static RateSchedule build(const PopulationModel& m, const LocalConfig& cfg, double t_end);
  static RateSchedule constant(std::vector<double> rates, double t_end);

  std::vector<double> operator()(double t) const { return fn_(t); }
  double t_end() const { return t_end_; }

 private:
  Fn fn_;
  double t_end_ = 0.0;
};

// Transition probabilities of the tagged agent over the product states from
// t0 to t0 + len; the clock regions are offset by t0.
Eigen::MatrixXd forward_prob(const ProductAgentClass& p, const RateSchedule& r, double t0, double len,
                             const OdeConfig& cfg = {});

// Probability that agent state s0 at time t0 satisfies the automaton within
// the horizon p was sliced with.
double path_prob_fixed(const ProductAgentClass& p, const RateSchedule& r, int s0, double t0,
                       const OdeConfig& cfg = {});

// Acceptance probability by horizon T for T on `horizons` (t0 fixed). The
// automaton must have been sliced with a horizon >= max(horizons).
std::vector<double> acceptance_by_horizon(const ProductAgentClass& p, const RateSchedule& r, int s0, double t0,
                                          const std::vector<double>& horizons, const OdeConfig& cfg = {});

struct PathProbabilityCurve {
  std::vector<double> t0;
  // values[s][k] = P(s, t0[k] |= D)
  std::vector<std::vector<double>> values;
  // Pointwise evaluation for refinement; returns one value per agent state.
  std::function<std::vector<double>(double)> eval;

  double at(std::size_t state, double t) const;  // linear interpolation
};

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

// Curves for every initial agent state over t0 in [0, t0_max].
PathProbabilityCurve path_prob_curve(const ProductAgentClass& p, const RateSchedule& r, double t0_max,
                                     const LocalConfig& cfg = {});

// Curve for an automaton whose parameters are time-varying signals
// (absolute time): resolved per t0.
PathProbabilityCurve nested_path_prob_curve(const AgentClass& a, const OneGDTA& d,
                                            const std::vector<BooleanSignal>& args, const Rational& horizon,
                                            const RateSchedule& r, double t0_max, const LocalConfig& cfg = {});

// Zeros of f - p over the curve samples refined by bisection to 1e-9.
struct ThresholdTrack {
  SignalTrack track;
  std::vector<std::string> warnings;
};
ThresholdTrack threshold_track(const std::vector<double>& t, const std::vector<double>& f,
                               const std::function<double(double)>& eval, Cmp cmp, double p);
BooleanSignal threshold_signal(const PathProbabilityCurve& c, Cmp cmp, double p);

// Latest time any nested probability operator needs rates for.
double required_horizon(const CslTaFormula& f, double t0_max);

// Per-state truth signal of the formula over [0, t0_max].
BooleanSignal check_csl_ta(const CslTaFormula& f, const PopulationModel& m, const RateSchedule& r, double t0_max,
                           const LocalConfig& cfg = {});
BooleanSignal check_csl_ta(const CslTaFormula& f, const PopulationModel& m, double t0_max,
                           const LocalConfig& cfg = {});

}  // namespace popmc
