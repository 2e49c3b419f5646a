#include "popmc/signal.hpp"

#include <algorithm>
#include <stdexcept>

namespace popmc {

bool SignalTrack::value(double t) const {
  const auto flips = std::upper_bound(switches.begin(), switches.end(), t) - switches.begin();
  return (flips % 2 == 0) ? initial : !initial;
}

BooleanSignal BooleanSignal::constant(std::size_t states, double horizon, bool v) {
  BooleanSignal s;
  s.horizon = horizon;
  s.tracks.assign(states, SignalTrack{v, {}});
  return s;
}

BooleanSignal BooleanSignal::from_states(const std::vector<bool>& truth, double horizon) {
  BooleanSignal s;
  s.horizon = horizon;
  for (bool b : truth) s.tracks.push_back(SignalTrack{b, {}});
  return s;
}

std::vector<double> BooleanSignal::switch_times() const {
  std::vector<double> out;
  for (const auto& tr : tracks) out.insert(out.end(), tr.switches.begin(), tr.switches.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<bool> BooleanSignal::at(double t) const {
  std::vector<bool> v;
  for (const auto& tr : tracks) v.push_back(tr.value(t));
  return v;
}

BooleanSignal BooleanSignal::shifted(double offset) const {
  BooleanSignal s;
  s.horizon = horizon - offset;
  s.warnings = warnings;
  for (const auto& tr : tracks) {
    SignalTrack n;
    n.initial = tr.value(offset);
    for (double t : tr.switches) {
      if (t > offset) n.switches.push_back(t - offset);
    }
    s.tracks.push_back(std::move(n));
  }
  return s;
}

bool BooleanSignal::constant_in_time() const {
  for (const auto& tr : tracks) {
    if (!tr.switches.empty()) return false;
  }
  return true;
}

BooleanSignal signal_combine(SignalOp op, const BooleanSignal& a, const BooleanSignal& b) {
  BooleanSignal out;
  out.horizon = a.horizon;
  out.warnings = a.warnings;
  if (op != SignalOp::Not) {
    if (a.states() != b.states()) throw std::invalid_argument("signal_combine: state count mismatch");
    out.horizon = std::min(a.horizon, b.horizon);
    out.warnings.insert(out.warnings.end(), b.warnings.begin(), b.warnings.end());
  }
  auto apply = [op](bool x, bool y) {
    switch (op) {
      case SignalOp::And: return x && y;
      case SignalOp::Or: return x || y;
      case SignalOp::Not: return !x;
    }
    return false;
  };
  for (std::size_t s = 0; s < a.states(); ++s) {
    const SignalTrack& ta = a.tracks[s];
    static const SignalTrack kEmpty;
    const SignalTrack& tb = op == SignalOp::Not ? kEmpty : b.tracks[s];
    std::vector<double> cand = ta.switches;
    cand.insert(cand.end(), tb.switches.begin(), tb.switches.end());
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    SignalTrack tr;
    tr.initial = apply(ta.initial, tb.initial);
    bool current = tr.initial;
    for (double t : cand) {
      const bool v = apply(ta.value(t), tb.value(t));
      if (v != current) {
        tr.switches.push_back(t);
        current = v;
      }
    }
    out.tracks.push_back(std::move(tr));
  }
  return out;
}

}  // namespace popmc
