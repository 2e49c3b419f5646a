#include "popmc/ssa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "popmc/error.hpp"

namespace popmc {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t replication) {
  std::uint64_t s = master;
  const std::uint64_t a = splitmix64(s);
  std::uint64_t t = a ^ (replication * 0xd1b54a32d192ed03ULL);
  return splitmix64(t);
}

std::vector<int> Trajectory::at(double t) const {
  const auto k = std::upper_bound(times.begin(), times.end(), t) - times.begin();
  return k == 0 ? initial : states[static_cast<std::size_t>(k - 1)];
}

namespace {

double falling(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (x - i);
  return r;
}

double exp_sample(std::mt19937_64& rng, double rate) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return -std::log1p(-u(rng)) / rate;
}

// Index of the transition selected by target in [0, total).
std::size_t select(const std::vector<double>& rates, double target) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (rates[k] <= 0.0) continue;
    acc += rates[k];
    last = k;
    if (target < acc) return k;
  }
  return last;
}

}  // namespace

RateEvaluator::RateEvaluator(const PopulationProcess& p, const PopulationProcess* base, std::size_t m)
    : p_(&p), base_(base), m_(m) {
  if (base_ != nullptr) {
    for (const auto& t : p.transitions) {
      if (!t.split) {
        base_ = nullptr;
        break;
      }
    }
  }
  if (base_ != nullptr) {
    agg_.assign(base_->dim(), 0.0);
    base_rates_.assign(base_->transitions.size(), 0.0);
  }
}

void RateEvaluator::rates(const std::vector<double>& x, std::vector<double>& out) const {
  out.resize(p_->transitions.size());
  if (base_ == nullptr) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = p_->rate(k, x);
    return;
  }
  std::fill(agg_.begin(), agg_.end(), 0.0);
  for (std::size_t v = 0; v < base_->dim() * m_; ++v) agg_[v / m_] += x[v];
  for (std::size_t b = 0; b < base_rates_.size(); ++b) base_rates_[b] = base_->rate(b, agg_);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& sp = *p_->transitions[k].split;
    const double br = base_rates_[static_cast<std::size_t>(sp.base)];
    if (br <= 0.0) {
      out[k] = 0.0;
      continue;
    }
    double num = sp.factor, den = 1.0;
    for (const auto& [v, kk] : sp.slots) num *= falling(x[static_cast<std::size_t>(v)], kk);
    for (const auto& [s, kk] : sp.agg) den *= falling(agg_[static_cast<std::size_t>(s)], kk);
    out[k] = (num <= 0.0 || den <= 0.0) ? 0.0 : br * num / den;
  }
}

Trajectory gillespie_run(const PopulationProcess& p, double T, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RateEvaluator ev(p);
  Trajectory tr;
  tr.labels = p.labels;
  std::vector<double> x(p.initial.begin(), p.initial.end());
  for (double v : x) tr.initial.push_back(static_cast<int>(std::lround(v)));
  std::vector<double> rates;
  double t = 0.0;
  while (true) {
    ev.rates(x, rates);
    double total = 0.0;
    for (double r : rates) total += r;
    if (total <= 0.0) break;
    t += exp_sample(rng, total);
    if (t > T) break;
    const std::size_t k = select(rates, u(rng) * total);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += p.transitions[k].update[i];
    tr.times.push_back(t);
    std::vector<int> st;
    for (double v : x) st.push_back(static_cast<int>(std::lround(v)));
    tr.states.push_back(std::move(st));
    tr.fired.push_back(static_cast<int>(k));
  }
  return tr;
}

Trajectory gillespie_run(const PopulationModel& m, double T, std::uint64_t seed) {
  return gillespie_run(m.to_process(), T, seed);
}

EstimateWithCI wilson_interval(std::size_t successes, std::size_t runs, double z) {
  EstimateWithCI e;
  e.successes = successes;
  e.runs = runs;
  if (runs == 0) return e;
  const double n = static_cast<double>(runs);
  const double p = static_cast<double>(successes) / n;
  e.estimate = p;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  // The interval touches 0 (1) exactly when no run failed (succeeded).
  e.lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  e.hi = successes == runs ? 1.0 : std::min(1.0, centre + half);
  e.half_width = half;
  e.std_error = std::sqrt(p * (1 - p) / n);
  return e;
}

double tagged_run(const PopulationModel& m, const PopulationProcess& base, const OneGDTA& d,
                  const std::vector<bool>& can_reach, int s0, double T, std::mt19937_64& rng, TimedPath* path) {
  constexpr double kNever = std::numeric_limits<double>::infinity();
  if (!d.params.empty()) throw Error("tagged simulation needs an automaton without parameters");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(base.initial.begin(), base.initial.end());
  if (x[static_cast<std::size_t>(s0)] < 1.0) throw Error("tagged agent's initial state is empty");
  int tag = s0;
  int q = d.initial;
  if (path != nullptr) *path = TimedPath{s0, {}};
  if (d.is_final(q)) return 0.0;
  std::vector<double> rates(base.transitions.size());
  double t = 0.0;
  while (true) {
    double total = 0.0;
    for (std::size_t k = 0; k < rates.size(); ++k) {
      rates[k] = base.rate(k, x);
      total += rates[k];
    }
    if (total <= 0.0) return kNever;
    t += exp_sample(rng, total);
    if (t > T) return kNever;
    const std::size_t k = select(rates, u(rng) * total);
    const auto& gt = m.transitions[k];
    // Does the tagged agent take part, and through which local transition?
    const double xs = x[static_cast<std::size_t>(tag)];
    double r = u(rng) * xs;
    int local = -1;
    for (const auto& e : gt.sync) {
      const auto& lt = m.agent.local_transitions[static_cast<std::size_t>(e.local)];
      if (lt.source != tag) continue;
      if (r < e.multiplicity) {
        local = e.local;
        break;
      }
      r -= e.multiplicity;
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += base.transitions[k].update[i];
    if (local < 0) continue;
    const auto& lt = m.agent.local_transitions[static_cast<std::size_t>(local)];
    if (path != nullptr) path->steps.push_back({t, lt.label, lt.target});
    int next = -1;
    for (const auto& e : d.edges) {
      if (e.from != q || e.action != lt.label) continue;
      if (!e.clock.holds(t) || !e.guard.eval(static_cast<std::size_t>(tag))) continue;
      next = e.to;
      break;
    }
    tag = lt.target;
    if (next >= 0) q = next;
    if (d.is_final(q)) return t;
    if (!can_reach[static_cast<std::size_t>(q)] && path == nullptr) return kNever;
  }
}

std::vector<double> tagged_acceptance_times(const PopulationModel& m, const OneGDTA& d, int s0, double T,
                                            std::size_t runs, std::uint64_t seed) {
  const PopulationProcess base = m.to_process();
  const auto reach = d.can_reach_final();
  std::vector<double> out(runs);
  for (std::size_t r = 0; r < runs; ++r) {
    std::mt19937_64 rng(replication_seed(seed, r));
    out[r] = tagged_run(m, base, d, reach, s0, T, rng);
  }
  return out;
}

std::vector<EstimateWithCI> acceptance_curve(const std::vector<double>& accept_times,
                                             const std::vector<double>& horizons) {
  std::vector<double> sorted = accept_times;
  std::sort(sorted.begin(), sorted.end());
  std::vector<EstimateWithCI> out;
  for (double h : horizons) {
    const auto hits = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), h) - sorted.begin());
    out.push_back(wilson_interval(hits, sorted.size()));
  }
  return out;
}

std::vector<std::vector<int>> global_final_counts(const ProductPopulationModel& pm, const std::vector<double>& horizons,
                                                  std::size_t runs, std::uint64_t seed) {
  const std::vector<double> bounds = pm.agent.sliced.times_double();
  const std::size_t m = pm.agent.m;
  const std::size_t nm = pm.agent.size();
  std::vector<RateEvaluator> evs;
  for (const auto& r : pm.regions) evs.emplace_back(r, &pm.base, m);
  std::vector<std::size_t> order(horizons.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return horizons[a] < horizons[b]; });
  const double t_end = horizons.empty() ? 0.0 : horizons[order.back()];
  auto final_count = [&](const std::vector<double>& x) {
    double c = 0.0;
    for (std::size_t v = 0; v < nm; ++v) {
      if (pm.agent.sliced.final[v % m]) c += x[v];
    }
    return static_cast<int>(std::lround(c));
  };
  std::vector<std::vector<int>> out(runs, std::vector<int>(horizons.size()));
  std::vector<double> rates;
  for (std::size_t run = 0; run < runs; ++run) {
    std::mt19937_64 rng(replication_seed(seed, run));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x = pm.initial_counts();
    double t = 0.0;
    std::size_t region = 0;
    std::size_t next_h = 0;
    while (true) {
      while (region + 1 < evs.size() && t >= bounds[region + 1]) ++region;
      evs[region].rates(x, rates);
      double total = 0.0;
      for (double r : rates) total += r;
      const double boundary = region + 1 < evs.size() ? bounds[region + 1] : std::numeric_limits<double>::infinity();
      double tn = total > 0.0 ? t + exp_sample(rng, total) : std::numeric_limits<double>::infinity();
      const double stop = std::min(boundary, t_end);
      // Record horizons passed before the next event.
      while (next_h < order.size() && horizons[order[next_h]] < std::min(tn, boundary)) {
        out[run][order[next_h]] = final_count(x);
        ++next_h;
      }
      if (tn >= stop) {
        if (boundary <= t_end && boundary < tn) {
          t = boundary;  // memoryless restart with the next region's rates
          continue;
        }
        break;
      }
      t = tn;
      const std::size_t k = select(rates, u(rng) * total);
      const auto& upd = evs[region].process().transitions[k].update;
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += upd[i];
    }
    while (next_h < order.size()) {
      out[run][order[next_h]] = final_count(x);
      ++next_h;
    }
  }
  return out;
}

std::vector<EstimateWithCI> global_estimate_curve(const std::vector<std::vector<int>>& counts, int lo_count,
                                                  int hi_count) {
  if (counts.empty()) return {};
  std::vector<EstimateWithCI> out;
  for (std::size_t h = 0; h < counts.front().size(); ++h) {
    std::size_t hits = 0;
    for (const auto& run : counts) {
      if (run[h] >= lo_count && run[h] <= hi_count) ++hits;
    }
    out.push_back(wilson_interval(hits, counts.size()));
  }
  return out;
}

std::pair<int, int> count_bounds(double a, double b, int N, bool counts) {
  auto snap = [](double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 * std::max(1.0, std::abs(v)) ? r : v;
  };
  const double lo = snap(counts ? a : a * N), hi = snap(counts ? b : b * N);
  return {static_cast<int>(std::max(0.0, std::ceil(lo))), static_cast<int>(std::min<double>(N, std::floor(hi)))};
}

}  // namespace popmc
