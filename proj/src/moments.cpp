#include "popmc/moments.hpp"

#include <cmath>
#include <functional>
#include <memory>

#include "popmc/error.hpp"

namespace popmc {

namespace {

void enumerate(std::size_t nvars, int deg, Monomial& cur, std::size_t var, std::vector<Monomial>& out) {
  if (var + 1 == nvars) {
    cur[var] = deg;
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int k = deg; k >= 0; --k) {
    cur[var] = k;
    enumerate(nvars, deg - k, cur, var + 1, out);
  }
  cur[var] = 0;
}

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Calls fn(gamma, prod_i binom(alpha_i, gamma_i)) for every gamma <= alpha.
void for_each_sub(const Monomial& alpha, const std::function<void(const Monomial&, double)>& fn) {
  Monomial g(alpha.size(), 0);
  while (true) {
    double c = 1.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) c *= binom(alpha[i], g[i]);
    fn(g, c);
    std::size_t i = 0;
    while (i < alpha.size() && ++g[i] > alpha[i]) g[i++] = 0;
    if (i == alpha.size()) break;
  }
}

Monomial minus(const Monomial& a, const Monomial& b) {
  Monomial r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

double mu_power(const Monomial& power, const std::vector<double>& mu) {
  double r = 1.0;
  for (std::size_t i = 0; i < power.size(); ++i) {
    for (int k = 0; k < power[i]; ++k) r *= mu[i];
  }
  return r;
}

}  // namespace

MomentSpec MomentSpec::full(std::size_t nvars, int order) {
  if (order < 1) throw Error("moment order must be >= 1");
  MomentSpec s;
  s.order = order;
  s.nvars = nvars;
  Monomial cur(nvars, 0);
  for (int d = 1; d <= order; ++d) enumerate(nvars, d, cur, 0, s.monomials);
  for (std::size_t i = 0; i < s.monomials.size(); ++i) s.lookup[s.monomials[i]] = static_cast<int>(i);
  return s;
}

int MomentSpec::index_of(const Monomial& m) const {
  auto it = lookup.find(m);
  return it == lookup.end() ? -1 : it->second;
}

MomentClosure::MomentClosure(MomentSpec spec) : spec_(std::move(spec)) {
  for (const auto& g : spec_.monomials) {
    std::vector<Term> terms;
    if (degree(g) >= 2) {
      // E[(X-mu)^g] = sum_{d<=g} C(g,d) (-mu)^{g-d} E[X^d]
      for_each_sub(g, [&](const Monomial& d, double c) {
        const Monomial rest = minus(g, d);
        const double sign = (degree(rest) % 2 == 0) ? 1.0 : -1.0;
        terms.push_back({degree(d) == 0 ? -1 : spec_.index_of(d), sign * c, rest});
      });
    }
    central_terms_.push_back(std::move(terms));
  }
}

std::vector<double> MomentClosure::central(std::span<const double> raw) const {
  std::vector<double> mu(spec_.nvars);
  for (std::size_t i = 0; i < spec_.nvars; ++i) {
    Monomial e(spec_.nvars, 0);
    e[i] = 1;
    mu[i] = raw[static_cast<std::size_t>(spec_.index_of(e))];
  }
  std::vector<double> out(spec_.monomials.size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double acc = 0.0;
    for (const auto& t : central_terms_[k]) {
      acc += t.coef * mu_power(t.power, mu) * (t.index < 0 ? 1.0 : raw[static_cast<std::size_t>(t.index)]);
    }
    out[k] = acc;
  }
  return out;
}

const std::vector<MomentClosure::Term>& MomentClosure::expansion(const Monomial& alpha) const {
  auto it = cache_.find(alpha);
  if (it != cache_.end()) return it->second;
  // E[X^a] = sum_{g<=a} C(a,g) mu^{a-g} E[(X-mu)^g], central moments of
  // order 1 and above `order` vanish.
  std::vector<Term> terms;
  for_each_sub(alpha, [&](const Monomial& g, double c) {
    const int dg = degree(g);
    if (dg == 1 || dg > spec_.order) return;
    terms.push_back({dg == 0 ? -1 : spec_.index_of(g), c, minus(alpha, g)});
  });
  return cache_.emplace(alpha, std::move(terms)).first->second;
}

double MomentClosure::expect(const Monomial& alpha, std::span<const double> raw,
                             const std::vector<double>& central) const {
  const int d = degree(alpha);
  if (d == 0) return 1.0;
  if (d <= spec_.order) return raw[static_cast<std::size_t>(spec_.index_of(alpha))];
  std::vector<double> mu(spec_.nvars);
  for (std::size_t i = 0; i < spec_.nvars; ++i) {
    Monomial e(spec_.nvars, 0);
    e[i] = 1;
    mu[i] = raw[static_cast<std::size_t>(spec_.index_of(e))];
  }
  double acc = 0.0;
  for (const auto& t : expansion(alpha)) {
    acc += t.coef * mu_power(t.power, mu) * (t.index < 0 ? 1.0 : central[static_cast<std::size_t>(t.index)]);
  }
  return acc;
}

double MomentClosure::expect(const Monomial& alpha, std::span<const double> raw) const {
  if (degree(alpha) <= spec_.order) return expect(alpha, raw, {});
  return expect(alpha, raw, central(raw));
}

double MomentClosure::expect(const Polynomial& p, std::span<const double> raw) const {
  std::vector<double> cen;
  bool have = false;
  double acc = 0.0;
  for (const auto& [m, c] : p.terms()) {
    if (degree(m) > spec_.order && !have) {
      cen = central(raw);
      have = true;
    }
    acc += c * expect(m, raw, cen);
  }
  return acc;
}

std::vector<MomentEquation> dynkin_terms(const PopulationProcess& p, const MomentSpec& spec) {
  const std::size_t n = p.dim();
  if (spec.nvars != n) throw Error("moment spec dimension mismatch");
  std::vector<MomentEquation> out;
  for (const auto& beta : spec.monomials) {
    Polynomial xb = Polynomial::constant(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) xb = xb * Polynomial::variable(n, i).pow(beta[i]);
    Polynomial acc(n);
    for (const auto& t : p.transitions) {
      if (!t.count_poly) throw ModelError("transition '" + t.name + "' has a non-polynomial rate");
      Polynomial shifted = Polynomial::constant(n, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        shifted = shifted * (Polynomial::variable(n, i) + Polynomial::constant(n, t.update[i])).pow(beta[i]);
      }
      acc = acc + (shifted - xb) * *t.count_poly;
    }
    acc.prune(1e-13);
    out.push_back({beta, acc.terms()});
  }
  return out;
}

OdeSystem moment_equations(const PopulationProcess& p, const MomentSpec& spec) {
  auto eqs = std::make_shared<std::vector<MomentEquation>>(dynkin_terms(p, spec));
  auto closure = std::make_shared<MomentClosure>(spec);
  // Pre-warm the expansion cache so the RHS is read-only.
  for (const auto& e : *eqs) {
    for (const auto& [m, c] : e.terms) {
      if (degree(m) > spec.order) {
        std::vector<double> zero(spec.monomials.size(), 0.0);
        closure->expect(m, zero);
      }
    }
  }
  OdeSystem sys;
  sys.dim = spec.monomials.size();
  for (const auto& m : spec.monomials) {
    std::string name = "E[";
    bool first = true;
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (int k = 0; k < m[i]; ++k) {
        name += (first ? "" : "*") + p.labels[i];
        first = false;
      }
    }
    sys.labels.push_back(name + "]");
  }
  sys.rhs = [eqs, closure](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const std::span<const double> raw(y.data(), static_cast<std::size_t>(y.size()));
    const std::vector<double> cen = closure->central(raw);
    dy.resize(y.size());
    for (std::size_t k = 0; k < eqs->size(); ++k) {
      double acc = 0.0;
      for (const auto& [m, c] : (*eqs)[k].terms) acc += c * closure->expect(m, raw, cen);
      dy[static_cast<Eigen::Index>(k)] = acc;
    }
  };
  return sys;
}

Eigen::VectorXd deterministic_moments(const MomentSpec& spec, std::span<const double> x) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(spec.monomials.size()));
  for (std::size_t k = 0; k < spec.monomials.size(); ++k) {
    double v = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) v *= std::pow(x[i], spec.monomials[k][i]);
    y[static_cast<Eigen::Index>(k)] = v;
  }
  return y;
}

OdeSolution moment_solve(const PopulationProcess& p, const MomentSpec& spec, double T, const Eigen::VectorXd& y0,
                         const OdeConfig& cfg) {
  return integrate(moment_equations(p, spec), 0.0, T, y0, cfg);
}

}  // namespace popmc
