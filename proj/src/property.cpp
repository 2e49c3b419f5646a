#include "popmc/property.hpp"

#include <algorithm>
#include <sstream>

#include "popmc/error.hpp"

namespace popmc {

// ---------------------------------------------------------------- StateFormula

StateFormula StateFormula::constant(bool v) {
  if (v) return {};
  auto n = std::make_shared<Node>();
  n->kind = Kind::False;
  return StateFormula(n);
}

StateFormula StateFormula::states(std::vector<bool> members, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::States;
  n->members = std::move(members);
  n->name = std::move(name);
  return StateFormula(n);
}

StateFormula StateFormula::param(int index, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Param;
  n->index = index;
  n->name = std::move(name);
  return StateFormula(n);
}

StateFormula::Kind StateFormula::kind() const { return node_ ? node_->kind : Kind::True; }

StateFormula StateFormula::operator!() const {
  if (kind() == Kind::True) return constant(false);
  if (kind() == Kind::False) return constant(true);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Not;
  n->lhs = node_;
  return StateFormula(n);
}

StateFormula StateFormula::operator&&(const StateFormula& o) const {
  if (kind() == Kind::True) return o;
  if (o.kind() == Kind::True) return *this;
  auto n = std::make_shared<Node>();
  n->kind = Kind::And;
  n->lhs = node_;
  n->rhs = o.node_;
  return StateFormula(n);
}

StateFormula StateFormula::operator||(const StateFormula& o) const {
  if (kind() == Kind::False) return o;
  if (o.kind() == Kind::False) return *this;
  auto n = std::make_shared<Node>();
  n->kind = Kind::Or;
  n->lhs = node_;
  n->rhs = o.node_;
  return StateFormula(n);
}

bool StateFormula::eval(std::size_t state, const std::vector<std::vector<bool>>* param_truth) const {
  struct E {
    static bool run(const Node* n, std::size_t s, const std::vector<std::vector<bool>>* pt) {
      if (n == nullptr) return true;
      switch (n->kind) {
        case Kind::True: return true;
        case Kind::False: return false;
        case Kind::States: return s < n->members.size() && n->members[s];
        case Kind::Param:
          if (pt == nullptr || static_cast<std::size_t>(n->index) >= pt->size()) {
            throw Error("state formula parameter '" + n->name + "' is unbound");
          }
          return (*pt)[static_cast<std::size_t>(n->index)][s];
        case Kind::Not: return !run(n->lhs.get(), s, pt);
        case Kind::And: return run(n->lhs.get(), s, pt) && run(n->rhs.get(), s, pt);
        case Kind::Or: return run(n->lhs.get(), s, pt) || run(n->rhs.get(), s, pt);
      }
      return false;
    }
  };
  return E::run(node_.get(), state, param_truth);
}

std::vector<bool> StateFormula::satisfying(std::size_t nstates,
                                           const std::vector<std::vector<bool>>* param_truth) const {
  std::vector<bool> out(nstates);
  for (std::size_t s = 0; s < nstates; ++s) out[s] = eval(s, param_truth);
  return out;
}

std::set<int> StateFormula::params() const {
  std::set<int> out;
  struct C {
    static void run(const Node* n, std::set<int>& o) {
      if (n == nullptr) return;
      if (n->kind == Kind::Param) o.insert(n->index);
      run(n->lhs.get(), o);
      run(n->rhs.get(), o);
    }
  };
  C::run(node_.get(), out);
  return out;
}

StateFormula StateFormula::bind(const std::vector<std::vector<bool>>& param_truth) const {
  struct B {
    static StateFormula run(const std::shared_ptr<const Node>& n, const std::vector<std::vector<bool>>& pt) {
      if (!n) return {};
      switch (n->kind) {
        case Kind::Param:
          return StateFormula::states(pt[static_cast<std::size_t>(n->index)], n->name);
        case Kind::Not: return !run(n->lhs, pt);
        case Kind::And: return run(n->lhs, pt) && run(n->rhs, pt);
        case Kind::Or: return run(n->lhs, pt) || run(n->rhs, pt);
        default: return StateFormula(n);
      }
    }
  };
  return B::run(node_, param_truth);
}

std::string StateFormula::to_string() const {
  struct P {
    static std::string run(const Node* n) {
      if (n == nullptr) return "true";
      switch (n->kind) {
        case Kind::True: return "true";
        case Kind::False: return "false";
        case Kind::States:
        case Kind::Param: return n->name;
        case Kind::Not: return "!" + run(n->lhs.get());
        case Kind::And: return "(" + run(n->lhs.get()) + " && " + run(n->rhs.get()) + ")";
        case Kind::Or: return "(" + run(n->lhs.get()) + " || " + run(n->rhs.get()) + ")";
      }
      return "?";
    }
  };
  return P::run(node_.get());
}

// ---------------------------------------------------------------- OneGDTA

int OneGDTA::state_index(std::string_view n) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] == n) return static_cast<int>(i);
  }
  return -1;
}

std::vector<Rational> OneGDTA::constants() const {
  std::vector<Rational> out;
  for (const auto& e : edges) {
    auto c = e.clock.constants();
    out.insert(out.end(), c.begin(), c.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<bool> OneGDTA::can_reach_final() const {
  std::vector<bool> reach = final;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& e : edges) {
      if (!reach[static_cast<std::size_t>(e.from)] && reach[static_cast<std::size_t>(e.to)]) {
        reach[static_cast<std::size_t>(e.from)] = true;
        changed = true;
      }
    }
  }
  return reach;
}

namespace {

struct ClockRegion {
  Rational lo;
  std::optional<Rational> hi;  // open interval (lo, hi) when point == false
  bool point = false;
  Rational probe() const {
    if (point) return lo;
    if (!hi) return lo + 1;
    return (lo + *hi) / 2;
  }
  Rational witness() const {
    if (point) return lo;
    Rational mid = probe();
    // Prefer an integer inside the interval: readable witnesses.
    const std::int64_t up = mid.numerator() / mid.denominator() + (mid.numerator() % mid.denominator() != 0 ? 1 : 0);
    Rational cand(up);
    if (cand > lo && (!hi || cand < *hi)) return cand;
    return mid;
  }
};

std::vector<ClockRegion> clock_regions(std::vector<Rational> constants) {
  constants.push_back(Rational(0));
  std::sort(constants.begin(), constants.end());
  constants.erase(std::unique(constants.begin(), constants.end()), constants.end());
  std::vector<ClockRegion> out;
  for (std::size_t i = 0; i < constants.size(); ++i) {
    if (constants[i] < Rational(0)) continue;
    ClockRegion open;
    open.lo = constants[i];
    if (i + 1 < constants.size()) open.hi = constants[i + 1];
    out.push_back(open);
  }
  for (const auto& c : constants) {
    if (c >= Rational(0)) out.push_back(ClockRegion{c, std::nullopt, true});
  }
  return out;
}

bool satisfiable(const ClockConstraint& c) {
  for (const auto& r : clock_regions(c.constants())) {
    if (c.holds(r.probe())) return true;
  }
  return false;
}

}  // namespace

std::string DeterminismClash::describe(const OneGDTA& d, const AgentClass& a) const {
  const auto& ea = d.edges[static_cast<std::size_t>(edge_a)];
  const auto& eb = d.edges[static_cast<std::size_t>(edge_b)];
  std::ostringstream os;
  os << "nondeterministic edges in '" << d.name << "': " << d.states[static_cast<std::size_t>(ea.from)] << " -> "
     << d.states[static_cast<std::size_t>(ea.to)] << " and " << d.states[static_cast<std::size_t>(eb.from)] << " -> "
     << d.states[static_cast<std::size_t>(eb.to)] << " both enabled on '" << action << "' in agent state "
     << a.states[static_cast<std::size_t>(agent_state)] << " at x=" << to_string(witness);
  return os.str();
}

std::optional<DeterminismClash> find_determinism_clash(const OneGDTA& d, const AgentClass& a) {
  const auto regions = clock_regions(d.constants());
  const std::size_t ns = a.states.size();
  for (std::size_t q = 0; q < d.states.size(); ++q) {
    std::map<std::string, std::vector<int>> by_action;
    for (std::size_t e = 0; e < d.edges.size(); ++e) {
      if (d.edges[e].from == static_cast<int>(q)) by_action[d.edges[e].action].push_back(static_cast<int>(e));
    }
    for (const auto& [action, ids] : by_action) {
      if (ids.size() < 2) continue;
      std::set<int> used;
      for (int e : ids) {
        auto p = d.edges[static_cast<std::size_t>(e)].guard.params();
        used.insert(p.begin(), p.end());
      }
      const std::vector<int> plist(used.begin(), used.end());
      const std::size_t combos = std::size_t{1} << std::min<std::size_t>(plist.size(), 12);
      for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t mask = 0; mask < combos; ++mask) {
          std::vector<std::vector<bool>> pt(d.params.size(), std::vector<bool>(ns, false));
          for (std::size_t k = 0; k < plist.size() && k < 12; ++k) {
            pt[static_cast<std::size_t>(plist[k])][s] = (mask >> k) & 1U;
          }
          for (const auto& r : regions) {
            const Rational x = r.probe();
            std::vector<int> enabled;
            for (int e : ids) {
              const auto& ed = d.edges[static_cast<std::size_t>(e)];
              if (ed.guard.eval(s, &pt) && ed.clock.holds(x)) enabled.push_back(e);
            }
            if (enabled.size() >= 2) {
              return DeterminismClash{enabled[0], enabled[1], static_cast<int>(s), action, r.witness()};
            }
          }
        }
      }
    }
  }
  return std::nullopt;
}

void validate_dta(const OneGDTA& d, const AgentClass& a) {
  const auto labels = a.labels();
  if (d.states.empty()) throw Error("automaton '" + d.name + "' has no states");
  for (const auto& e : d.edges) {
    if (std::find(labels.begin(), labels.end(), e.action) == labels.end()) {
      throw Error("automaton '" + d.name + "' uses unknown action '" + e.action + "'");
    }
    if (d.is_final(e.from) && e.to != e.from) {
      throw Error("automaton '" + d.name + "': final state '" + d.states[static_cast<std::size_t>(e.from)] +
                  "' must be absorbing");
    }
  }
  if (auto clash = find_determinism_clash(d, a)) throw Error(clash->describe(d, a));
}

DtaRun run_dta(const OneGDTA& d, const AgentClass& a, const TimedPath& path, double horizon,
               const std::vector<BooleanSignal>* params) {
  const auto labels = a.labels();
  DtaRun run;
  run.state = d.initial;
  if (d.is_final(run.state)) run.accept_time = 0.0;
  int s = path.initial_state;
  for (const auto& step : path.steps) {
    if (std::find(labels.begin(), labels.end(), step.action) == labels.end()) {
      throw Error("unknown action '" + step.action + "' in path");
    }
    if (step.time > horizon) break;
    std::vector<std::vector<bool>> pt;
    if (params != nullptr) {
      for (const auto& sig : *params) pt.push_back(sig.at(step.time));
    }
    int next = -1;
    for (const auto& e : d.edges) {
      if (e.from != run.state || e.action != step.action) continue;
      if (!e.clock.holds(step.time)) continue;
      if (!e.guard.eval(static_cast<std::size_t>(s), params != nullptr ? &pt : nullptr)) continue;
      if (next >= 0 && next != e.to) throw Error("automaton '" + d.name + "' is nondeterministic on this path");
      next = e.to;
    }
    if (next >= 0) {
      run.state = next;
      if (d.is_final(next) && !run.accepted()) run.accept_time = step.time;
    }
    s = step.state;
  }
  return run;
}

bool dta_accepts(const OneGDTA& d, const AgentClass& a, const TimedPath& path, double horizon,
                 const std::vector<BooleanSignal>* params) {
  return d.is_final(run_dta(d, a, path, horizon, params).state);
}

OneGDTA structural_resolution(const OneGDTA& d, const std::vector<BooleanSignal>& signals) {
  if (signals.size() != d.params.size()) throw Error("structural_resolution: one signal per parameter required");
  OneGDTA out = d;
  out.params.clear();
  out.edges.clear();
  for (const auto& e : d.edges) {
    const auto used = e.guard.params();
    if (used.empty()) {
      out.edges.push_back(e);
      continue;
    }
    std::vector<double> cover;
    for (int k : used) {
      for (double t : signals[static_cast<std::size_t>(k)].switch_times()) {
        if (t > 0.0) cover.push_back(t);
      }
    }
    std::vector<Rational> points;
    for (double t : cover) points.push_back(time_to_rational(t));
    points.push_back(Rational(0));
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Rational* hi = i + 1 < points.size() ? &points[i + 1] : nullptr;
      std::vector<std::vector<bool>> pt;
      for (const auto& sig : signals) pt.push_back(sig.at(to_double(points[i])));
      DtaEdge ne = e;
      ne.guard = e.guard.bind(pt);
      const auto sat = ne.guard.satisfying(signals.empty() ? 0 : signals.front().states());
      if (std::none_of(sat.begin(), sat.end(), [](bool b) { return b; })) continue;
      ne.clock = e.clock && ClockConstraint::interval(points[i], hi);
      if (!satisfiable(ne.clock)) continue;
      out.edges.push_back(std::move(ne));
    }
  }
  return out;
}

// ---------------------------------------------------------------- formulas

FormulaPtr CslTaFormula::make_true() { return std::make_shared<CslTaFormula>(); }

FormulaPtr CslTaFormula::make_atom(StateFormula a, std::string text) {
  auto f = std::make_shared<CslTaFormula>();
  f->kind = Kind::Atom;
  f->atom = std::move(a);
  f->text = std::move(text);
  return f;
}

FormulaPtr CslTaFormula::make_not(FormulaPtr x) {
  auto f = std::make_shared<CslTaFormula>();
  f->kind = Kind::Not;
  f->text = "!" + x->text;
  f->children = {std::move(x)};
  return f;
}

FormulaPtr CslTaFormula::make_and(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<CslTaFormula>();
  f->kind = Kind::And;
  f->text = "(" + a->text + " && " + b->text + ")";
  f->children = {std::move(a), std::move(b)};
  return f;
}

FormulaPtr CslTaFormula::make_or(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<CslTaFormula>();
  f->kind = Kind::Or;
  f->text = "(" + a->text + " || " + b->text + ")";
  f->children = {std::move(a), std::move(b)};
  return f;
}

FormulaPtr CslTaFormula::make_prob(Cmp cmp, double p, Rational horizon, std::shared_ptr<const OneGDTA> d,
                                   std::vector<FormulaPtr> args) {
  if (p < 0.0 || p > 1.0) throw Error("probability bound outside [0,1]");
  if (horizon <= Rational(0)) throw Error("time bound must be positive");
  if (args.size() != d->params.size()) {
    throw Error("automaton '" + d->name + "' expects " + std::to_string(d->params.size()) + " arguments");
  }
  auto f = std::make_shared<CslTaFormula>();
  f->kind = Kind::Prob;
  f->cmp = cmp;
  f->p = p;
  f->horizon = horizon;
  f->dta = std::move(d);
  f->children = std::move(args);
  std::ostringstream os;
  os << "P[<=" << to_string(horizon) << "]" << to_string(cmp) << p << "(" << f->dta->name;
  if (!f->children.empty()) {
    os << "[";
    for (std::size_t i = 0; i < f->children.size(); ++i) os << (i ? "," : "") << f->children[i]->text;
    os << "]";
  }
  os << ")";
  f->text = os.str();
  return f;
}

std::shared_ptr<const OneGDTA> PropertyFile::find_dta(std::string_view name) const {
  for (const auto& d : dtas) {
    if (d->name == name) return d;
  }
  return nullptr;
}

FormulaPtr PropertyFile::find_formula(std::string_view name) const {
  for (const auto& [n, f] : formulas) {
    if (n == name) return f;
  }
  return nullptr;
}

GlobalPtr PropertyFile::find_global(std::string_view name) const {
  for (const auto& [n, g] : globals) {
    if (n == name) return g;
  }
  return nullptr;
}

}  // namespace popmc
