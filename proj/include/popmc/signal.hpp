#pragma once

#include <string>
#include <vector>

namespace popmc {

// Piecewise-constant truth value over [0, horizon]. A switch at time t
// flips the value on [t, next switch).
struct SignalTrack {
  bool initial = false;
  std::vector<double> switches;

  bool value(double t) const;
};

// One track per agent state.
struct BooleanSignal {
  double horizon = 0.0;
  std::vector<SignalTrack> tracks;
  std::vector<std::string> warnings;

  static BooleanSignal constant(std::size_t states, double horizon, bool v);
  static BooleanSignal from_states(const std::vector<bool>& truth, double horizon);

  std::size_t states() const { return tracks.size(); }
  bool value(std::size_t state, double t) const { return tracks[state].value(t); }
  // Sorted union of all switch times.
  std::vector<double> switch_times() const;
  // Truth vector over states on the interval starting at t.
  std::vector<bool> at(double t) const;
  // Signal re-based so that time 0 corresponds to `offset` in this signal.
  BooleanSignal shifted(double offset) const;
  bool constant_in_time() const;
};

enum class SignalOp { And, Or, Not };

// Pointwise combination; `b` is ignored for Not. Redundant switches are removed.
BooleanSignal signal_combine(SignalOp op, const BooleanSignal& a, const BooleanSignal& b = {});

}  // namespace popmc
