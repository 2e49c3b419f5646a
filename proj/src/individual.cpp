#include "popmc/individual.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "popmc/diagnostics.hpp"
#include "popmc/error.hpp"
#include "popmc/fluid.hpp"
#include "popmc/moments.hpp"

namespace popmc {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd generator_at(const ProductAgentClass& p, const RateSchedule& r, std::size_t region, double t) {
  const auto g = r(t);
  return assemble_generator(p, region, g);
}

// Region j as offsets [lo, hi] clipped to len; false if empty.
bool region_span(const ProductAgentClass& p, std::size_t j, double len, double& lo, double& hi) {
  const auto& times = p.sliced.times;
  lo = to_double(times[j]);
  hi = std::min(to_double(times[j + 1]), len);
  return hi > lo;
}

// dP/dt = P Q_j(t) on [from, to] starting at P0.
OdeSolution region_forward(const ProductAgentClass& p, const RateSchedule& r, std::size_t j, double from, double to,
                           const Eigen::MatrixXd& P0, const OdeConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(p.size());
  const auto rows = P0.rows();
  OdeSystem sys;
  sys.dim = static_cast<std::size_t>(rows * n);
  sys.rhs = [&p, &r, j, rows, n](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Eigen::MatrixXd Q = generator_at(p, r, j, t);
    dy.resize(y.size());
    Eigen::Map<const RowMat> P(y.data(), rows, n);
    Eigen::Map<RowMat> dP(dy.data(), rows, n);
    dP.noalias() = P * Q;
  };
  Eigen::VectorXd y0(rows * n);
  Eigen::Map<RowMat>(y0.data(), rows, n) = P0;
  return integrate(sys, from, to, y0, cfg);
}

Eigen::MatrixXd unpack(const Eigen::VectorXd& y, Eigen::Index rows, Eigen::Index n) {
  return Eigen::Map<const RowMat>(y.data(), rows, n);
}

double clamp_prob(double v) {
  if (v < -1e-6 || v > 1.0 + 1e-6) warn("probability " + std::to_string(v) + " clamped to [0,1]");
  return std::clamp(v, 0.0, 1.0);
}

void clamp_matrix(Eigen::MatrixXd& P) {
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index k = 0; k < P.cols(); ++k) P(i, k) = clamp_prob(P(i, k));
  }
}

// Acceptance probability per agent state from a full transition matrix.
std::vector<double> accept_from_matrix(const ProductAgentClass& p, const Eigen::MatrixXd& P) {
  std::vector<double> out(p.n, 0.0);
  for (std::size_t s = 0; s < p.n; ++s) {
    const int row = p.index(static_cast<int>(s), p.sliced.initial);
    double acc = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (p.sliced.final[static_cast<std::size_t>(p.q_state(static_cast<int>(c)))]) acc += P(row, static_cast<Eigen::Index>(c));
    }
    out[s] = std::clamp(acc, 0.0, 1.0);
  }
  return out;
}

double full_horizon(const ProductAgentClass& p) { return to_double(p.sliced.times.back()); }

}  // namespace

// ------------------------------------------------------------ schedules

RateSchedule RateSchedule::fluid(const PopulationModel& m, double t_end, const OdeConfig& cfg) {
  auto sol = std::make_shared<OdeSolution>(fluid_solve(m, t_end, cfg));
  auto model = std::make_shared<PopulationModel>(m);
  const double N = m.N;
  return RateSchedule(
      [sol, model, N](double t) {
        Eigen::VectorXd x = N * (*sol)(t);
        return individual_local_rates(*model, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
      },
      t_end);
}

RateSchedule RateSchedule::moments(const PopulationModel& m, int order, double t_end, const OdeConfig& cfg) {
  const PopulationProcess proc = m.to_process();
  const std::size_t n = proc.dim();
  const MomentSpec spec = MomentSpec::full(n, order);
  auto sol = std::make_shared<OdeSolution>(
      moment_solve(proc, spec, t_end, deterministic_moments(spec, proc.initial), cfg));
  auto closure = std::make_shared<MomentClosure>(spec);

  // Per local transition: exact quotient polynomials, or (f, s) pairs
  // expanded around the mean of X_s.
  struct Part {
    std::optional<Polynomial> quotient;
    Polynomial f;
    std::size_t s = 0;
  };
  auto parts = std::make_shared<std::vector<std::vector<Part>>>(m.agent.local_transitions.size());
  for (std::size_t ti = 0; ti < m.transitions.size(); ++ti) {
    const auto& t = m.transitions[ti];
    const auto& poly = proc.transitions[ti].count_poly;
    if (!poly) throw ModelError("transition '" + t.name + "' has a non-polynomial rate");
    for (const auto& e : t.sync) {
      const auto s = static_cast<std::size_t>(m.agent.local_transitions[static_cast<std::size_t>(e.local)].source);
      Polynomial f = *poly * static_cast<double>(e.multiplicity);
      Part part{f.divide_linear(s, 0.0, 1e-12), f, s};
      (*parts)[static_cast<std::size_t>(e.local)].push_back(std::move(part));
    }
  }
  return RateSchedule(
      [sol, closure, parts, n, order](double t) {
        const Eigen::VectorXd y = (*sol)(t);
        const std::span<const double> raw(y.data(), static_cast<std::size_t>(y.size()));
        std::vector<double> g(parts->size(), 0.0);
        for (std::size_t l = 0; l < parts->size(); ++l) {
          double acc = 0.0;
          for (const auto& part : (*parts)[l]) {
            Monomial e(n, 0);
            e[part.s] = 1;
            const double mu = closure->expect(e, raw);
            // Same convention as the fluid schedule: no mass in s, no rate.
            if (mu <= 0.0) continue;
            if (part.quotient) {
              acc += closure->expect(*part.quotient, raw);
              continue;
            }
            // E[f/X_s] ~ sum_k (-1)^k E[f (X_s - mu)^k] / mu^(k+1)
            const Polynomial d = Polynomial::variable(n, part.s) - Polynomial::constant(n, mu);
            Polynomial pk = part.f;
            double sign = 1.0;
            double scale = mu;
            for (int k = 0; k <= order; ++k) {
              acc += sign * closure->expect(pk, raw) / scale;
              pk = pk * d;
              sign = -sign;
              scale *= mu;
            }
          }
          g[l] = std::max(acc, 0.0);
        }
        return g;
      },
      t_end);
}

RateSchedule RateSchedule::build(const PopulationModel& m, const LocalConfig& cfg, double t_end) {
  if (cfg.method == ScheduleMethod::Moments) return moments(m, cfg.order, t_end, cfg.ode);
  return fluid(m, t_end, cfg.ode);
}

RateSchedule RateSchedule::constant(std::vector<double> rates, double t_end) {
  return RateSchedule([rates](double) { return rates; }, t_end);
}

// ------------------------------------------------------------ forward

Eigen::MatrixXd forward_prob(const ProductAgentClass& p, const RateSchedule& r, double t0, double len,
                             const OdeConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t j = 0; j < p.regions.size(); ++j) {
    double lo = 0.0, hi = 0.0;
    if (!region_span(p, j, len, lo, hi)) continue;
    if (t0 + hi > r.t_end() * (1 + 1e-12) + 1e-12) throw Error("rate schedule too short for the requested horizon");
    const OdeSolution s = region_forward(p, r, j, t0 + lo, t0 + hi, P, cfg);
    P = unpack(s.final_state(), n, n);
    clamp_matrix(P);
  }
  return P;
}

double path_prob_fixed(const ProductAgentClass& p, const RateSchedule& r, int s0, double t0, const OdeConfig& cfg) {
  const Eigen::MatrixXd P = forward_prob(p, r, t0, full_horizon(p), cfg);
  return accept_from_matrix(p, P)[static_cast<std::size_t>(s0)];
}

std::vector<double> acceptance_by_horizon(const ProductAgentClass& p, const RateSchedule& r, int s0, double t0,
                                          const std::vector<double>& horizons, const OdeConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, n);
  row(0, p.index(s0, p.sliced.initial)) = 1.0;
  std::vector<OdeSolution> pieces;
  std::vector<std::pair<double, double>> spans;
  for (std::size_t j = 0; j < p.regions.size(); ++j) {
    double lo = 0.0, hi = 0.0;
    if (!region_span(p, j, full_horizon(p), lo, hi)) continue;
    pieces.push_back(region_forward(p, r, j, t0 + lo, t0 + hi, row, cfg));
    spans.emplace_back(lo, hi);
    row = unpack(pieces.back().final_state(), 1, n);
  }
  std::vector<double> out;
  for (double T : horizons) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v[p.index(s0, p.sliced.initial)] = 1.0;
    for (std::size_t k = 0; k < spans.size(); ++k) {
      if (T >= spans[k].first) v = pieces[k](t0 + std::min(T, spans[k].second));
    }
    double acc = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (p.sliced.final[static_cast<std::size_t>(p.q_state(static_cast<int>(c)))]) acc += v[c];
    }
    out.push_back(clamp_prob(acc));
  }
  return out;
}

// ------------------------------------------------------------ curves

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (points <= 1 || hi <= lo) return {lo};
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k) {
    g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  g.back() = hi;
  return g;
}

double PathProbabilityCurve::at(std::size_t state, double t) const {
  const auto& v = values[state];
  if (t <= t0.front()) return v.front();
  if (t >= t0.back()) return v.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(t0.begin(), t0.end(), t) - t0.begin()) - 1;
  const double w = (t - t0[k]) / (t0[k + 1] - t0[k]);
  return (1 - w) * v[k] + w * v[k + 1];
}

namespace {

// Region factor P_j(t0) = P(t0 + b | t0 + a) for t0 on `grid`, by the
// combined equation dP/dt0 = P Q(t0 + b) - Q(t0 + a) P over restart windows.
std::vector<Eigen::MatrixXd> region_factor_curve(const ProductAgentClass& p, const RateSchedule& r, std::size_t j,
                                                 double a, double b, const std::vector<double>& grid,
                                                 const LocalConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(p.size());
  const double T = full_horizon(p);
  const double t0_max = grid.back();
  const double min_window = std::max(T * cfg.min_window_fraction, 1e-12);
  double window = std::max(T * cfg.window_fraction, min_window);
  std::vector<Eigen::MatrixXd> out(grid.size());
  OdeSystem sys;
  sys.dim = static_cast<std::size_t>(n * n);
  sys.rhs = [&p, &r, j, a, b, n](double t0, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Eigen::MatrixXd Qa = generator_at(p, r, j, t0 + a);
    const Eigen::MatrixXd Qb = generator_at(p, r, j, t0 + b);
    dy.resize(y.size());
    Eigen::Map<const RowMat> P(y.data(), n, n);
    Eigen::Map<RowMat> dP(dy.data(), n, n);
    dP.noalias() = P * Qb;
    dP.noalias() -= Qa * P;
  };
  // Errors of the combined equation grow within a window, so the value at
  // each window end is checked against the forward solve that starts the
  // next window; a mismatch halves the window.
  const double max_window = window;
  const double tol = 10.0 * cfg.ode.rtol;
  auto forward_at = [&](double t0) {
    return unpack(region_forward(p, r, j, t0 + a, t0 + b, Eigen::MatrixXd::Identity(n, n), cfg.ode).final_state(), n,
                  n);
  };
  std::size_t k = 0;
  double w = 0.0;
  Eigen::MatrixXd init = forward_at(w);
  while (k < grid.size() && grid[k] <= w) out[k++] = init;
  bool warned = false;
  while (k < grid.size()) {
    const double wend = std::min(w + window, t0_max);
    std::optional<OdeSolution> s;
    try {
      const RowMat rm = init;
      s = integrate(sys, w, wend, Eigen::Map<const Eigen::VectorXd>(rm.data(), n * n), cfg.ode);
    } catch (const NumericalError&) {
      window *= 0.5;
      if (window < min_window) throw;
      continue;
    }
    const Eigen::MatrixXd next = forward_at(wend);
    const double gap = (unpack(s->final_state(), n, n) - next).cwiseAbs().maxCoeff();
    if (gap > tol) {
      if (window * 0.5 >= min_window) {
        window *= 0.5;
        continue;
      }
      if (!warned) warn("t0-curve window at its floor still drifts by " + std::to_string(gap));
      warned = true;
    }
    while (k < grid.size() && grid[k] < wend) {
      out[k] = unpack((*s)(grid[k]), n, n);
      ++k;
    }
    while (k < grid.size() && grid[k] <= wend) out[k++] = next;
    w = wend;
    init = next;
    window = std::min(2.0 * window, max_window);
  }
  return out;
}

}  // namespace

PathProbabilityCurve path_prob_curve(const ProductAgentClass& p, const RateSchedule& r, double t0_max,
                                     const LocalConfig& cfg) {
  PathProbabilityCurve c;
  c.t0 = uniform_grid(0.0, t0_max, cfg.grid);
  const double T = full_horizon(p);
  const OdeConfig ode = cfg.ode;
  c.eval = [p, r, T, ode](double t0) { return accept_from_matrix(p, forward_prob(p, r, t0, T, ode)); };
  c.values.assign(p.n, std::vector<double>(c.t0.size(), 0.0));
  if (!cfg.kolmogorov_t0 || t0_max <= 0.0) {
    for (std::size_t k = 0; k < c.t0.size(); ++k) {
      const auto v = c.eval(c.t0[k]);
      for (std::size_t s = 0; s < p.n; ++s) c.values[s][k] = v[s];
    }
    return c;
  }
  const auto n = static_cast<Eigen::Index>(p.size());
  std::vector<Eigen::MatrixXd> acc(c.t0.size(), Eigen::MatrixXd::Identity(n, n));
  for (std::size_t j = 0; j < p.regions.size(); ++j) {
    double a = 0.0, b = 0.0;
    if (!region_span(p, j, T, a, b)) continue;
    const auto factors = region_factor_curve(p, r, j, a, b, c.t0, cfg);
    for (std::size_t k = 0; k < c.t0.size(); ++k) {
      Eigen::MatrixXd f = factors[k];
      clamp_matrix(f);
      acc[k] = acc[k] * f;
    }
  }
  for (std::size_t k = 0; k < c.t0.size(); ++k) {
    const auto v = accept_from_matrix(p, acc[k]);
    for (std::size_t s = 0; s < p.n; ++s) c.values[s][k] = v[s];
  }
  return c;
}

PathProbabilityCurve nested_path_prob_curve(const AgentClass& a, const OneGDTA& d,
                                            const std::vector<BooleanSignal>& args, const Rational& horizon,
                                            const RateSchedule& r, double t0_max, const LocalConfig& cfg) {
  const bool constant = std::all_of(args.begin(), args.end(), [](const BooleanSignal& s) { return s.constant_in_time(); });
  if (constant) {
    const OneGDTA resolved = structural_resolution(d, args);
    return path_prob_curve(synchronize(a, resolved, horizon), r, t0_max, cfg);
  }
  PathProbabilityCurve c;
  c.t0 = uniform_grid(0.0, t0_max, cfg.grid);
  const double T = to_double(horizon);
  const OdeConfig ode = cfg.ode;
  c.eval = [a, d, args, horizon, r, T, ode](double t0) {
    std::vector<BooleanSignal> shifted;
    for (const auto& s : args) shifted.push_back(s.shifted(t0));
    const ProductAgentClass p = synchronize(a, structural_resolution(d, shifted), horizon);
    return accept_from_matrix(p, forward_prob(p, r, t0, T, ode));
  };
  c.values.assign(a.states.size(), std::vector<double>(c.t0.size(), 0.0));
  for (std::size_t k = 0; k < c.t0.size(); ++k) {
    const auto v = c.eval(c.t0[k]);
    for (std::size_t s = 0; s < v.size(); ++s) c.values[s][k] = v[s];
  }
  return c;
}

// ------------------------------------------------------------ thresholds

ThresholdTrack threshold_track(const std::vector<double>& t, const std::vector<double>& f,
                               const std::function<double(double)>& eval, Cmp cmp, double p) {
  constexpr double kTangent = 1e-4;
  ThresholdTrack out;
  const std::size_t K = t.size();
  std::vector<bool> truth(K);
  for (std::size_t k = 0; k < K; ++k) truth[k] = compare(f[k], cmp, p);
  // A lone sample on the other side of p with a tiny margin is a grazing
  // contact, not a crossing.
  for (std::size_t k = 1; k + 1 < K; ++k) {
    if (truth[k] != truth[k - 1] && truth[k] != truth[k + 1] && std::abs(f[k] - p) < kTangent) {
      truth[k] = truth[k - 1];
      out.warnings.push_back("suspected tangential zero near t=" + std::to_string(t[k]));
    }
  }
  for (std::size_t k = 1; k + 1 < K; ++k) {
    const double h = f[k] - p;
    const double hp = f[k - 1] - p, hn = f[k + 1] - p;
    if (truth[k - 1] == truth[k] && truth[k] == truth[k + 1] && std::abs(h) < kTangent &&
        std::abs(h) <= std::abs(hp) && std::abs(h) <= std::abs(hn) && (h - hp) * (hn - h) <= 0.0 &&
        std::abs(h) < std::abs(hn)) {
      out.warnings.push_back("suspected tangential zero near t=" + std::to_string(t[k]));
    }
  }
  out.track.initial = K ? truth[0] : false;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (truth[k] == truth[k + 1]) continue;
    double lo = t[k], hi = t[k + 1];
    const bool before = truth[k];
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      if (compare(eval(mid), cmp, p) == before) lo = mid;
      else hi = mid;
    }
    out.track.switches.push_back(hi);
  }
  return out;
}

BooleanSignal threshold_signal(const PathProbabilityCurve& c, Cmp cmp, double p) {
  BooleanSignal sig;
  sig.horizon = c.t0.back();
  for (std::size_t s = 0; s < c.values.size(); ++s) {
    auto eval = [&c, s](double t) { return c.eval ? c.eval(t)[s] : c.at(s, t); };
    ThresholdTrack tr = threshold_track(c.t0, c.values[s], eval, cmp, p);
    for (auto& w : tr.warnings) {
      w = "state " + std::to_string(s) + ": " + w;
      warn(w);
      sig.warnings.push_back(w);
    }
    sig.tracks.push_back(std::move(tr.track));
  }
  return sig;
}

// ------------------------------------------------------------ CSL-TA

double required_horizon(const CslTaFormula& f, double t0_max) {
  double need = t0_max;
  if (f.kind == CslTaFormula::Kind::Prob) {
    const double inner = t0_max + to_double(f.horizon);
    need = inner;
    for (const auto& c : f.children) need = std::max(need, required_horizon(*c, inner));
  } else {
    for (const auto& c : f.children) need = std::max(need, required_horizon(*c, t0_max));
  }
  return need;
}

BooleanSignal check_csl_ta(const CslTaFormula& f, const PopulationModel& m, const RateSchedule& r, double t0_max,
                           const LocalConfig& cfg) {
  const std::size_t n = m.num_states();
  switch (f.kind) {
    case CslTaFormula::Kind::True:
      return BooleanSignal::constant(n, t0_max, true);
    case CslTaFormula::Kind::Atom:
      return BooleanSignal::from_states(f.atom.satisfying(n), t0_max);
    case CslTaFormula::Kind::Not:
      return signal_combine(SignalOp::Not, check_csl_ta(*f.children[0], m, r, t0_max, cfg));
    case CslTaFormula::Kind::And:
    case CslTaFormula::Kind::Or:
      return signal_combine(f.kind == CslTaFormula::Kind::And ? SignalOp::And : SignalOp::Or,
                            check_csl_ta(*f.children[0], m, r, t0_max, cfg),
                            check_csl_ta(*f.children[1], m, r, t0_max, cfg));
    case CslTaFormula::Kind::Prob: {
      const double T = to_double(f.horizon);
      std::vector<BooleanSignal> args;
      std::vector<std::string> inherited;
      for (const auto& c : f.children) {
        args.push_back(check_csl_ta(*c, m, r, t0_max + T, cfg));
        inherited.insert(inherited.end(), args.back().warnings.begin(), args.back().warnings.end());
      }
      const PathProbabilityCurve curve =
          args.empty() ? path_prob_curve(synchronize(m.agent, *f.dta, f.horizon), r, t0_max, cfg)
                       : nested_path_prob_curve(m.agent, *f.dta, args, f.horizon, r, t0_max, cfg);
      BooleanSignal sig = threshold_signal(curve, f.cmp, f.p);
      sig.horizon = t0_max;
      sig.warnings.insert(sig.warnings.begin(), inherited.begin(), inherited.end());
      return sig;
    }
  }
  throw Error("unknown formula kind");
}

BooleanSignal check_csl_ta(const CslTaFormula& f, const PopulationModel& m, double t0_max, const LocalConfig& cfg) {
  const RateSchedule r = RateSchedule::build(m, cfg, required_horizon(f, t0_max));
  return check_csl_ta(f, m, r, t0_max, cfg);
}

}  // namespace popmc
