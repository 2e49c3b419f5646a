#include "popmc/synchronize.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"
#include "popmc/error.hpp"

namespace popmc {

std::pair<AgentClass, OneGDTA> relabel_unique(const AgentClass& a, const OneGDTA& d) {
  AgentClass out = a;
  std::map<std::string, std::vector<int>> by_label;
  for (std::size_t i = 0; i < a.local_transitions.size(); ++i) {
    by_label[a.local_transitions[i].label].push_back(static_cast<int>(i));
  }
  std::map<std::string, std::vector<std::string>> renamed;  // old label -> new labels
  for (const auto& [label, ids] : by_label) {
    if (ids.size() == 1) {
      renamed[label].push_back(label);
      continue;
    }
    std::map<int, int> per_source;
    for (int i : ids) per_source[a.local_transitions[static_cast<std::size_t>(i)].source]++;
    for (int i : ids) {
      const auto& l = a.local_transitions[static_cast<std::size_t>(i)];
      std::string nl = label + "_" + a.states[static_cast<std::size_t>(l.source)];
      if (per_source[l.source] > 1) nl += "_" + a.states[static_cast<std::size_t>(l.target)];
      out.local_transitions[static_cast<std::size_t>(i)].label = nl;
      renamed[label].push_back(nl);
    }
  }
  OneGDTA nd = d;
  nd.edges.clear();
  for (const auto& e : d.edges) {
    for (const auto& nl : renamed[e.action]) {
      DtaEdge ne = e;
      ne.action = nl;
      nd.edges.push_back(std::move(ne));
    }
  }
  return {out, nd};
}

OneGDTA prune_state_conditions(const AgentClass& relabeled, const OneGDTA& d) {
  if (!d.params.empty()) throw Error("automaton '" + d.name + "' has unresolved parameters");
  OneGDTA out = d;
  out.edges.clear();
  for (const auto& e : d.edges) {
    int source = -1;
    for (const auto& l : relabeled.local_transitions) {
      if (l.label == e.action) source = l.source;
    }
    if (source < 0) throw Error("edge label '" + e.action + "' is not a relabeled transition");
    if (!e.guard.eval(static_cast<std::size_t>(source))) continue;
    DtaEdge ne = e;
    ne.guard = StateFormula();
    out.edges.push_back(std::move(ne));
  }
  return out;
}

std::vector<double> SlicedProperty::times_double() const {
  std::vector<double> out;
  for (const auto& t : times) out.push_back(to_double(t));
  return out;
}

std::size_t SlicedProperty::region_at(double x) const {
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    if (x < to_double(times[j + 1])) return j;
  }
  return regions.size() - 1;
}

SlicedProperty slice_by_clock(const AgentClass& relabeled, const OneGDTA& pruned, const Rational& horizon) {
  SlicedProperty sp;
  sp.q_names = pruned.states;
  sp.final = pruned.final;
  sp.initial = pruned.initial;
  sp.times.push_back(Rational(0));
  for (const auto& c : pruned.constants()) {
    if (c > Rational(0) && c < horizon) sp.times.push_back(c);
  }
  sp.times.push_back(horizon);
  const std::size_t nl = relabeled.local_transitions.size();
  const std::size_t m = pruned.states.size();
  for (std::size_t j = 0; j + 1 < sp.times.size(); ++j) {
    RegionDfa dfa;
    dfa.next.assign(m, std::vector<int>(nl));
    for (std::size_t q = 0; q < m; ++q) {
      for (std::size_t l = 0; l < nl; ++l) dfa.next[q][l] = static_cast<int>(q);
    }
    std::vector<std::vector<bool>> set(m, std::vector<bool>(nl, false));
    for (const auto& e : pruned.edges) {
      if (!e.clock.holds_on_open(sp.times[j], &sp.times[j + 1])) continue;
      // Final components only keep identity loops.
      if (pruned.is_final(e.from) && e.to != e.from) continue;
      for (std::size_t l = 0; l < nl; ++l) {
        if (relabeled.local_transitions[l].label != e.action) continue;
        const auto q = static_cast<std::size_t>(e.from);
        if (set[q][l] && dfa.next[q][l] != e.to) {
          throw Error("automaton '" + pruned.name + "' is nondeterministic in region " + std::to_string(j));
        }
        set[q][l] = true;
        dfa.next[q][l] = e.to;
      }
    }
    sp.regions.push_back(std::move(dfa));
  }
  return sp;
}

std::string ProductAgentClass::state_name(int ps) const {
  return agent.states[static_cast<std::size_t>(agent_state(ps))] + "." +
         sliced.q_names[static_cast<std::size_t>(q_state(ps))];
}

ProductAgentClass product_agent(const AgentClass& relabeled, const SlicedProperty& sp) {
  ProductAgentClass p;
  p.n = relabeled.states.size();
  p.m = sp.q_names.size();
  p.agent = relabeled;
  p.sliced = sp;
  for (const auto& dfa : sp.regions) {
    std::vector<ProductLocal> tr;
    for (std::size_t l = 0; l < relabeled.local_transitions.size(); ++l) {
      const auto& lt = relabeled.local_transitions[l];
      for (std::size_t q = 0; q < p.m; ++q) {
        const int q2 = dfa.next[q][l];
        tr.push_back({static_cast<int>(l), p.index(lt.source, static_cast<int>(q)), p.index(lt.target, q2)});
      }
    }
    p.regions.push_back(std::move(tr));
  }
  return p;
}

ProductAgentClass synchronize(const AgentClass& a, const OneGDTA& d, const Rational& horizon) {
  auto [ra, rd] = relabel_unique(a, d);
  const OneGDTA pruned = prune_state_conditions(ra, rd);
  return product_agent(ra, slice_by_clock(ra, pruned, horizon));
}

namespace {

double falling(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (x - i);
  return r;
}

Polynomial falling_poly(std::size_t nvars, std::size_t var, int k) {
  Polynomial r = Polynomial::constant(nvars, 1.0);
  for (int i = 0; i < k; ++i) r = r * (Polynomial::variable(nvars, var) - Polynomial::constant(nvars, i));
  return r;
}

struct Move {
  int local;
  int q;
  bool operator<(const Move& o) const { return std::tie(local, q) < std::tie(o.local, o.q); }
  bool operator==(const Move& o) const { return local == o.local && q == o.q; }
};

// Base-to-product polynomial lift; std::nullopt when the division by the
// base falling factorials is not exact.
std::optional<Polynomial> lift(const Polynomial& base, const std::vector<int>& kappa,
                               const std::vector<std::vector<int>>& kappa_q, std::size_t n, std::size_t m,
                               std::size_t dim, bool density) {
  Polynomial q = base;
  for (std::size_t s = 0; s < n; ++s) {
    for (int i = 0; i < kappa[s]; ++i) {
      auto d = q.divide_linear(s, density ? 0.0 : static_cast<double>(i), 1e-9);
      if (!d) return std::nullopt;
      q = *d;
    }
  }
  std::vector<Polynomial> images;
  for (std::size_t s = 0; s < n; ++s) {
    Polynomial sum(dim);
    for (std::size_t qq = 0; qq < m; ++qq) sum = sum + Polynomial::variable(dim, s * m + qq);
    images.push_back(sum);
  }
  Polynomial out = q.substitute(images);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t qq = 0; qq < m; ++qq) {
      const int k = kappa_q[s][qq];
      if (k == 0) continue;
      out = out * (density ? Polynomial::variable(dim, s * m + qq).pow(k) : falling_poly(dim, s * m + qq, k));
    }
  }
  out.prune(1e-14);
  return out;
}

}  // namespace

ProductPopulationModel product_population(const PopulationModel& model, const ProductAgentClass& p) {
  ProductPopulationModel pm;
  pm.agent = p;
  const std::size_t n = p.n;
  const std::size_t m = p.m;
  const std::size_t dim = n * m;
  const PopulationProcess base = model.to_process();
  pm.base = base;
  std::vector<std::string> labels;
  for (std::size_t ps = 0; ps < dim; ++ps) labels.push_back(p.state_name(static_cast<int>(ps)));
  std::vector<double> init(dim, 0.0);
  for (std::size_t s = 0; s < n; ++s) init[s * m + static_cast<std::size_t>(p.sliced.initial)] = model.initial[s];

  for (std::size_t j = 0; j < p.regions.size(); ++j) {
    const RegionDfa& dfa = p.sliced.regions[j];
    PopulationProcess proc;
    proc.labels = labels;
    proc.N = model.N;
    proc.initial = init;
    for (std::size_t ti = 0; ti < model.transitions.size(); ++ti) {
      const GlobalTransition& g = model.transitions[ti];
      const ProcessTransition& bt = base.transitions[ti];
      const std::vector<int> kappa = model.guard_counts(g);
      // Expand the sync multiset into individual agent moves.
      std::vector<int> slots;
      for (const auto& e : g.sync) {
        for (int r = 0; r < e.multiplicity; ++r) slots.push_back(e.local);
      }
      std::map<std::vector<Move>, ProcessTransition> merged;
      std::map<std::vector<Move>, int> multiplicity;
      const std::size_t k = slots.size();
      std::vector<int> qv(k, 0);
      while (true) {
        std::vector<Move> moves;
        for (std::size_t i = 0; i < k; ++i) moves.push_back({slots[i], qv[i]});
        std::sort(moves.begin(), moves.end());
        if (!merged.count(moves)) {
          ProcessTransition pt;
          pt.name = g.name;
          pt.update.assign(dim, 0);
          std::vector<std::vector<int>> kappa_q(n, std::vector<int>(m, 0));
          for (const auto& mv : moves) {
            const auto& lt = p.agent.local_transitions[static_cast<std::size_t>(mv.local)];
            const int q2 = dfa.next[static_cast<std::size_t>(mv.q)][static_cast<std::size_t>(mv.local)];
            pt.update[static_cast<std::size_t>(p.index(lt.source, mv.q))] -= 1;
            pt.update[static_cast<std::size_t>(p.index(lt.target, q2))] += 1;
            kappa_q[static_cast<std::size_t>(lt.source)][static_cast<std::size_t>(mv.q)] += 1;
          }
          pt.name += "[";
          for (std::size_t i = 0; i < moves.size(); ++i) {
            pt.name += (i ? "," : "") + p.sliced.q_names[static_cast<std::size_t>(moves[i].q)];
          }
          pt.name += "]";
          ProcessTransition::Split split;
          split.base = static_cast<int>(ti);
          for (std::size_t s = 0; s < n; ++s) {
            if (kappa[s] > 0) split.agg.emplace_back(static_cast<int>(s), kappa[s]);
            for (std::size_t qq = 0; qq < m; ++qq) {
              if (kappa_q[s][qq] > 0) {
                pt.guard.emplace_back(static_cast<int>(s * m + qq), kappa_q[s][qq]);
                split.slots.emplace_back(static_cast<int>(s * m + qq), kappa_q[s][qq]);
              }
            }
          }
          pt.split = split;
          auto aggregate = [n, m](std::span<const double> x) {
            std::vector<double> agg(n, 0.0);
            for (std::size_t s = 0; s < n; ++s) {
              for (std::size_t qq = 0; qq < m; ++qq) agg[s] += x[s * m + qq];
            }
            return agg;
          };
          const RateFn base_count = bt.count_rate;
          const RateFn base_density = bt.density_rate;
          pt.count_rate = [=](std::span<const double> x) {
            const auto agg = aggregate(x);
            double ratio = 1.0;
            for (std::size_t s = 0; s < n; ++s) {
              if (kappa[s] == 0) continue;
              const double den = falling(agg[s], kappa[s]);
              if (den <= 0.0) return 0.0;
              double num = 1.0;
              for (std::size_t qq = 0; qq < m; ++qq) num *= falling(x[s * m + qq], kappa_q[s][qq]);
              ratio *= num / den;
            }
            if (ratio == 0.0) return 0.0;
            return ratio * base_count(agg);
          };
          pt.density_rate = [=](std::span<const double> x) {
            const auto agg = aggregate(x);
            double ratio = 1.0;
            for (std::size_t s = 0; s < n; ++s) {
              if (kappa[s] == 0) continue;
              if (agg[s] <= 0.0) return 0.0;
              for (std::size_t qq = 0; qq < m; ++qq) ratio *= std::pow(x[s * m + qq] / agg[s], kappa_q[s][qq]);
            }
            if (ratio == 0.0) return 0.0;
            return ratio * base_density(agg);
          };
          if (bt.count_poly) pt.count_poly = lift(*bt.count_poly, kappa, kappa_q, n, m, dim, false);
          if (bt.density_poly) pt.density_poly = lift(*bt.density_poly, kappa, kappa_q, n, m, dim, true);
          merged.emplace(moves, std::move(pt));
        }
        // Permuted assignments of equal multisets carry identical rates.
        ++multiplicity[moves];
        std::size_t i = 0;
        while (i < k && ++qv[i] == static_cast<int>(m)) qv[i++] = 0;
        if (i == k) break;
      }
      for (auto& [moves, pt] : merged) {
        const double c = multiplicity[moves];
        if (c != 1.0) {
          const RateFn c0 = pt.count_rate;
          const RateFn d0 = pt.density_rate;
          pt.count_rate = [c0, c](std::span<const double> x) { return c * c0(x); };
          pt.density_rate = [d0, c](std::span<const double> x) { return c * d0(x); };
          if (pt.count_poly) pt.count_poly = *pt.count_poly * Polynomial::constant(dim, c);
          if (pt.density_poly) pt.density_poly = *pt.density_poly * Polynomial::constant(dim, c);
          pt.split->factor = c;
        }
        proc.transitions.push_back(std::move(pt));
      }
    }
    proc.finalize();
    pm.regions.push_back(std::move(proc));
  }
  return pm;
}

}  // namespace popmc

namespace popmc {

ProductPopulationModel augment_final_counter(const ProductPopulationModel& pm) {
  ProductPopulationModel out = pm;
  out.has_final_counter = true;
  const auto& sp = pm.agent.sliced;
  const std::size_t m = pm.agent.m;
  const std::size_t dim = pm.dim();
  const std::size_t fi = dim;
  auto is_final_var = [&](std::size_t v) { return sp.final[v % m]; };
  for (auto& proc : out.regions) {
    proc.labels.push_back("X_Final");
    double already = 0.0;
    for (std::size_t v = 0; v < dim; ++v) {
      if (is_final_var(v)) already += proc.initial[v];
    }
    proc.initial.push_back(already);
    for (auto& t : proc.transitions) {
      // Net flow into final product states; agents already in F only move
      // between final states, so this counts fresh acceptances.
      int inc = 0;
      for (std::size_t v = 0; v < dim; ++v) {
        if (is_final_var(v)) inc += t.update[v];
      }
      t.update.push_back(inc);
      const RateFn c0 = t.count_rate;
      const RateFn d0 = t.density_rate;
      t.count_rate = [c0, dim](std::span<const double> x) { return c0(x.first(dim)); };
      t.density_rate = [d0, dim](std::span<const double> x) { return d0(x.first(dim)); };
      auto widen = [fi](const Polynomial& p) {
        Polynomial w(fi + 1);
        for (const auto& [mono, c] : p.terms()) {
          Monomial mm = mono;
          mm.push_back(0);
          w.add_term(mm, c);
        }
        return w;
      };
      if (t.count_poly) t.count_poly = widen(*t.count_poly);
      if (t.density_poly) t.density_poly = widen(*t.density_poly);
      t.density_grad.clear();
    }
    proc.finalize();
  }
  return out;
}

std::vector<double> individual_local_rates(const PopulationModel& m, std::span<const double> x) {
  std::vector<double> g(m.agent.local_transitions.size(), 0.0);
  for (const auto& t : m.transitions) {
    double f = -1.0;
    for (const auto& e : t.sync) {
      const int s = m.agent.local_transitions[static_cast<std::size_t>(e.local)].source;
      const double xs = x[static_cast<std::size_t>(s)];
      if (xs <= 0.0) continue;
      if (f < 0.0) f = clamp_rate(m.raw_rate(t, x), t.name);
      g[static_cast<std::size_t>(e.local)] += e.multiplicity * f / xs;
    }
  }
  return g;
}

Eigen::MatrixXd assemble_generator(const ProductAgentClass& p, std::size_t region,
                                   std::span<const double> local_rates) {
  const auto sz = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(sz, sz);
  for (const auto& t : p.regions[region]) {
    if (t.from == t.to) continue;
    q(t.from, t.to) += local_rates[static_cast<std::size_t>(t.local)];
  }
  for (Eigen::Index i = 0; i < sz; ++i) q(i, i) = -q.row(i).sum();
  return q;
}

Eigen::MatrixXd individual_generator(const ProductAgentClass& p, const PopulationModel& m,
                                     std::span<const double> x, std::size_t region) {
  const auto g = individual_local_rates(m, x);
  return assemble_generator(p, region, g);
}

std::string product_to_json(const ProductPopulationModel& pm) {
  nlohmann::json j;
  const auto& sp = pm.agent.sliced;
  j["agent_states"] = pm.agent.agent.states;
  j["automaton_states"] = sp.q_names;
  std::vector<std::string> times;
  for (const auto& t : sp.times) times.push_back(to_string(t));
  j["region_bounds"] = times;
  j["final_counter"] = pm.has_final_counter;
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& proc : pm.regions) {
    nlohmann::json r;
    r["variables"] = proc.labels;
    r["initial"] = proc.initial;
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& t : proc.transitions) {
      nlohmann::json tj;
      tj["name"] = t.name;
      tj["update"] = t.update;
      if (t.count_poly) tj["rate"] = t.count_poly->to_string(proc.labels);
      ts.push_back(tj);
    }
    r["transitions"] = ts;
    regions.push_back(r);
  }
  j["regions"] = regions;
  return j.dump(2);
}

}  // namespace popmc
