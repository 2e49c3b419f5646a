#include "popmc/collective.hpp"

#include <algorithm>
#include <cmath>

#include "popmc/diagnostics.hpp"
#include "popmc/error.hpp"
#include "popmc/maxent.hpp"
#include "popmc/moments.hpp"

namespace popmc {

namespace {

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 * std::max(1.0, std::abs(v)) ? r : v;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<const PopulationProcess*> process_ptrs(const ProductPopulationModel& pm) {
  std::vector<const PopulationProcess*> out;
  for (const auto& r : pm.regions) out.push_back(&r);
  return out;
}

double interval_estimate(const GaussianEstimate& g, const ThresholdInterval& iv, int N, GlobalMethod method) {
  if (iv.empty) return 0.0;
  if (method == GlobalMethod::MaxEnt && g.variance > 0.0) {
    return moment_interval_prob({g.mean, g.variance + g.mean * g.mean}, N, iv.lo, iv.hi);
  }
  return gaussian_interval_prob(g, iv.lo, iv.hi);
}

}  // namespace

ThresholdInterval finite_size_correct(double a, double b, int N, bool counts, bool correct) {
  if (a > b) throw Error("threshold interval with a > b");
  ThresholdInterval iv;
  iv.a = a;
  iv.b = b;
  const double lo = snap(counts ? a : a * N);
  const double hi = snap(counts ? b : b * N);
  if (!correct) {
    iv.lo = lo;
    iv.hi = hi;
    return iv;
  }
  const double j = std::max(0.0, std::ceil(lo));
  const double k = std::min(static_cast<double>(N), std::floor(hi));
  if (j > k) {
    iv.empty = true;
    iv.lo = iv.hi = lo;
    warn("threshold interval contains no integer count; probability is 0");
    return iv;
  }
  iv.lo = j <= 0.0 ? -INFINITY : j - 0.5;
  iv.hi = k >= N ? INFINITY : k + 0.5;
  return iv;
}

double gaussian_interval_prob(const GaussianEstimate& g, double lo, double hi) {
  if (lo > hi) throw Error("gaussian_interval_prob: lo > hi");
  if (!(g.variance > 0.0)) return (g.mean >= lo && g.mean <= hi) ? 1.0 : 0.0;
  const double s = std::sqrt(g.variance);
  const double zl = (lo - g.mean) / s, zh = (hi - g.mean) / s;
  // Use the tail with better relative accuracy.
  double p;
  if (zl > 0) p = 0.5 * (std::erfc(zl / std::sqrt(2.0)) - std::erfc(zh / std::sqrt(2.0)));
  else p = normal_cdf(zh) - normal_cdf(zl);
  return std::clamp(p, 0.0, 1.0);
}

double moment_interval_prob(const std::vector<double>& raw, int N, double lo, double hi) {
  const double mean = raw[0];
  const double var = raw.size() >= 2 ? raw[1] - mean * mean : 0.0;
  if (!(var > 0.0)) return (mean >= lo && mean <= hi) ? 1.0 : 0.0;
  const double s = std::sqrt(var);
  MomentConstraints c;
  c.raw = raw;
  c.lo = std::max(mean - 10 * s, -0.5);
  c.hi = std::min(mean + 10 * s, N + 0.5);
  try {
    return interval_prob(reconstruct(c), lo, hi);
  } catch (const Error& e) {
    warn(std::string("max-entropy failed, using Gaussian: ") + e.what());
    return gaussian_interval_prob({mean, var}, lo, hi);
  }
}

ProductPopulationModel final_counter_model(const PopulationModel& m, const OneGDTA& d, const Rational& horizon) {
  return augment_final_counter(product_population(m, synchronize(m.agent, d, horizon)));
}

GlobalCurve check_path_global_curve(const PopulationModel& m, const OneGDTA& d, const Rational& horizon, double a,
                                    double b, bool counts, const std::vector<double>& horizons,
                                    const GlobalConfig& cfg) {
  const ProductPopulationModel pm = final_counter_model(m, d, horizon);
  const ThresholdInterval iv = finite_size_correct(a, b, m.N, counts, cfg.correct);
  const auto fi = static_cast<Eigen::Index>(pm.final_index());
  const std::vector<double> bounds = pm.agent.sliced.times_double();
  GlobalCurve out;
  out.T = horizons;
  if (cfg.method == GlobalMethod::Moments) {
    const std::size_t dim = pm.dim();
    const MomentSpec spec = MomentSpec::full(dim, cfg.order);
    std::vector<int> idx;
    for (int k = 1; k <= cfg.order; ++k) {
      Monomial e(dim, 0);
      e[static_cast<std::size_t>(fi)] = k;
      idx.push_back(spec.index_of(e));
    }
    Eigen::VectorXd y = deterministic_moments(spec, pm.initial_counts());
    std::vector<OdeSolution> pieces;
    for (std::size_t j = 0; j + 1 < bounds.size(); ++j) {
      pieces.push_back(integrate(moment_equations(pm.regions[j], spec), bounds[j], bounds[j + 1], y, cfg.ode));
      y = pieces.back().final_state();
    }
    for (double T : horizons) {
      std::size_t j = 0;
      while (j + 1 < pieces.size() && T > bounds[j + 1]) ++j;
      const Eigen::VectorXd v = pieces[j](T);
      std::vector<double> raw;
      for (int i : idx) raw.push_back(v[i]);
      const double mean = raw[0];
      const double var = std::max(0.0, raw.size() > 1 ? raw[1] - mean * mean : 0.0);
      out.mean.push_back(mean);
      out.variance.push_back(var);
      out.estimate.push_back(iv.empty ? 0.0 : moment_interval_prob(raw, m.N, iv.lo, iv.hi));
    }
    return out;
  }
  const ClaSolution cla =
      cla_chain(process_ptrs(pm), bounds, ClaInit::deterministic(pm.regions.front().initial_density()), cfg.ode);
  for (double T : horizons) {
    const GaussianEstimate g{cla.pop_mean(T)[fi], std::max(0.0, cla.pop_cov(T)(fi, fi))};
    out.mean.push_back(g.mean);
    out.variance.push_back(g.variance);
    out.estimate.push_back(interval_estimate(g, iv, m.N, cfg.method));
  }
  return out;
}

double check_path_global(const PopulationModel& m, const OneGDTA& d, const Rational& horizon, double a, double b,
                         bool counts, const GlobalConfig& cfg) {
  return check_path_global_curve(m, d, horizon, a, b, counts, {to_double(horizon)}, cfg).estimate.front();
}

double check_state_global(const PopulationModel& m, const CslTaFormula& f, double a, double b, bool counts, double t0,
                          const GlobalConfig& cfg) {
  const BooleanSignal sig = check_csl_ta(f, m, t0, cfg.local);
  const std::vector<bool> sat = sig.at(t0);
  const ThresholdInterval iv = finite_size_correct(a, b, m.N, counts, cfg.correct);
  if (iv.empty) return 0.0;
  const PopulationProcess proc = m.to_process();
  const std::size_t n = proc.dim();
  if (cfg.method == GlobalMethod::Moments) {
    const int order = std::min(cfg.order, 4);
    if (cfg.order > 4) warn("state-property moments capped at order 4");
    const MomentSpec spec = MomentSpec::full(n, order);
    const OdeSolution sol = moment_solve(proc, spec, t0, deterministic_moments(spec, proc.initial), cfg.ode);
    const Eigen::VectorXd y = sol(t0);
    const MomentClosure closure(spec);
    Polynomial sum(n);
    for (std::size_t s = 0; s < n; ++s) {
      if (sat[s]) sum = sum + Polynomial::variable(n, s);
    }
    std::vector<double> raw;
    for (int k = 1; k <= order; ++k) {
      raw.push_back(closure.expect(sum.pow(k), std::span<const double>(y.data(), static_cast<std::size_t>(y.size()))));
    }
    return moment_interval_prob(raw, m.N, iv.lo, iv.hi);
  }
  const ClaSolution cla = cla_solve(proc, t0, ClaInit::deterministic(proc.initial_density()), cfg.ode);
  const Eigen::VectorXd mu = cla.pop_mean(t0);
  const Eigen::MatrixXd C = cla.pop_cov(t0);
  GaussianEstimate g;
  for (std::size_t s = 0; s < n; ++s) {
    if (!sat[s]) continue;
    g.mean += mu[static_cast<Eigen::Index>(s)];
    for (std::size_t r = 0; r < n; ++r) {
      if (sat[r]) g.variance += C(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(r));
    }
  }
  g.variance = std::max(0.0, g.variance);
  return interval_estimate(g, iv, m.N, cfg.method);
}

Verdict check_global_formula(const GlobalProperty& g, const PopulationModel& m, const GlobalConfig& cfg) {
  Verdict v;
  v.text = g.text;
  switch (g.kind) {
    case GlobalProperty::Kind::True:
      v.value = true;
      return v;
    case GlobalProperty::Kind::Not:
      v.children.push_back(check_global_formula(*g.children[0], m, cfg));
      v.value = !v.children[0].value;
      return v;
    case GlobalProperty::Kind::And:
    case GlobalProperty::Kind::Or:
      for (const auto& c : g.children) v.children.push_back(check_global_formula(*c, m, cfg));
      v.value = g.kind == GlobalProperty::Kind::And ? (v.children[0].value && v.children[1].value)
                                                    : (v.children[0].value || v.children[1].value);
      return v;
    case GlobalProperty::Kind::Threshold: {
      const std::size_t before = total_warnings();
      try {
        if (g.path) {
          OneGDTA d = *g.dta;
          if (!g.args.empty()) {
            // Arguments are evaluated at time 0 for the whole population.
            std::vector<BooleanSignal> sigs;
            for (const auto& a : g.args) sigs.push_back(check_csl_ta(*a, m, to_double(g.horizon), cfg.local));
            for (auto& s : sigs) {
              if (!s.constant_in_time()) {
                warn("time-varying automaton argument in a collective property; using its value at time 0");
              }
              s = BooleanSignal::from_states(s.at(0.0), s.horizon);
            }
            d = structural_resolution(d, sigs);
          }
          v.estimate = check_path_global(m, d, g.horizon, g.a, g.b, g.counts, cfg);
        } else {
          v.estimate = check_state_global(m, *g.formula, g.a, g.b, g.counts, g.t0, cfg);
        }
      } catch (const Error& e) {
        throw Error("in '" + g.text + "': " + e.what());
      }
      v.value = compare(v.estimate, g.cmp, g.p);
      if (total_warnings() > before) v.warnings.push_back("warnings raised while checking this atom");
      return v;
    }
  }
  throw Error("unknown global property kind");
}

}  // namespace popmc
