#pragma once

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "popmc/clock.hpp"
#include "popmc/model.hpp"
#include "popmc/signal.hpp"

namespace popmc {

// Boolean formula over agent states. Atoms are either fixed state sets
// (state indicators, declared labels) or parameters of a DTA, which stand
// for time-varying sub-formulae.
class StateFormula {
 public:
  enum class Kind { True, False, States, Param, Not, And, Or };

  StateFormula() = default;  // true
  static StateFormula constant(bool v);
  static StateFormula states(std::vector<bool> members, std::string name);
  static StateFormula param(int index, std::string name);

  StateFormula operator!() const;
  StateFormula operator&&(const StateFormula& o) const;
  StateFormula operator||(const StateFormula& o) const;

  Kind kind() const;
  // param_truth[k][s] gives parameter k at state s; required iff params used.
  bool eval(std::size_t state, const std::vector<std::vector<bool>>* param_truth = nullptr) const;
  std::vector<bool> satisfying(std::size_t nstates, const std::vector<std::vector<bool>>* param_truth = nullptr) const;
  std::set<int> params() const;
  // Replaces parameters by fixed state sets.
  StateFormula bind(const std::vector<std::vector<bool>>& param_truth) const;
  std::string to_string() const;

 private:
  struct Node {
    Kind kind = Kind::True;
    std::vector<bool> members;
    int index = -1;
    std::string name;
    std::shared_ptr<const Node> lhs, rhs;
  };
  explicit StateFormula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct DtaEdge {
  int from = 0;
  std::string action;
  StateFormula guard;
  ClockConstraint clock;
  int to = 0;
};

// One-global-clock deterministic timed automaton. Unlisted combinations of
// (state, action, agent state, clock) are implicit self-loops.
struct OneGDTA {
  std::string name;
  std::vector<std::string> params;
  std::vector<std::string> states;
  int initial = 0;
  std::vector<bool> final;
  std::vector<DtaEdge> edges;

  int state_index(std::string_view n) const;
  bool is_final(int q) const { return final[static_cast<std::size_t>(q)]; }
  std::vector<Rational> constants() const;
  // States from which some final state is reachable in the edge graph.
  std::vector<bool> can_reach_final() const;
};

struct DeterminismClash {
  int edge_a = 0;
  int edge_b = 0;
  int agent_state = 0;
  std::string action;
  Rational witness;
  std::string describe(const OneGDTA& d, const AgentClass& a) const;
};

// Exact check over all clock regions; parameters are enumerated over both
// truth values per state.
std::optional<DeterminismClash> find_determinism_clash(const OneGDTA& d, const AgentClass& a);
// Actions in the alphabet, final states absorbing, endpoints valid.
void validate_dta(const OneGDTA& d, const AgentClass& a);

struct PathStep {
  double time = 0.0;  // absolute jump time, measured on the DTA clock
  std::string action;
  int state = 0;      // agent state after the jump
};

struct TimedPath {
  int initial_state = 0;
  std::vector<PathStep> steps;
};

struct DtaRun {
  int state = 0;
  double accept_time = std::numeric_limits<double>::infinity();
  bool accepted() const { return accept_time < std::numeric_limits<double>::infinity(); }
};

// Runs the automaton on the path up to `horizon`. `params` holds one signal
// per DTA parameter, on the DTA clock. Unknown actions throw.
DtaRun run_dta(const OneGDTA& d, const AgentClass& a, const TimedPath& path,
               double horizon = std::numeric_limits<double>::infinity(),
               const std::vector<BooleanSignal>* params = nullptr);
bool dta_accepts(const OneGDTA& d, const AgentClass& a, const TimedPath& path,
                 double horizon = std::numeric_limits<double>::infinity(),
                 const std::vector<BooleanSignal>* params = nullptr);

// Replaces time-varying parameters by fixed state sets on each interval of
// the common switch cover, adding the matching clock constraints.
OneGDTA structural_resolution(const OneGDTA& d, const std::vector<BooleanSignal>& signals);

struct CslTaFormula;
using FormulaPtr = std::shared_ptr<const CslTaFormula>;

struct CslTaFormula {
  enum class Kind { True, Atom, Not, And, Or, Prob };
  Kind kind = Kind::True;
  StateFormula atom;
  std::vector<FormulaPtr> children;  // operands, or DTA arguments for Prob
  Cmp cmp = Cmp::Ge;
  double p = 0.0;
  Rational horizon;
  std::shared_ptr<const OneGDTA> dta;
  std::string text;

  static FormulaPtr make_true();
  static FormulaPtr make_atom(StateFormula a, std::string text);
  static FormulaPtr make_not(FormulaPtr f);
  static FormulaPtr make_and(FormulaPtr a, FormulaPtr b);
  static FormulaPtr make_or(FormulaPtr a, FormulaPtr b);
  static FormulaPtr make_prob(Cmp cmp, double p, Rational horizon, std::shared_ptr<const OneGDTA> d,
                              std::vector<FormulaPtr> args);
};

struct GlobalProperty;
using GlobalPtr = std::shared_ptr<const GlobalProperty>;

struct GlobalProperty {
  enum class Kind { True, Not, And, Or, Threshold };
  Kind kind = Kind::True;
  std::vector<GlobalPtr> children;

  // Threshold atom: Pr cmp p ( frac|count (target) in [a, b] ).
  bool path = true;
  std::shared_ptr<const OneGDTA> dta;  // path target
  std::vector<FormulaPtr> args;
  Rational horizon;
  FormulaPtr formula;                  // state target
  double t0 = 0.0;
  double a = 0.0;
  double b = 1.0;
  bool counts = false;                 // [a,b] in agents rather than fractions
  Cmp cmp = Cmp::Ge;
  double p = 0.0;
  std::string text;
};

struct PropertyFile {
  std::map<std::string, std::vector<bool>> labels;
  std::vector<std::shared_ptr<const OneGDTA>> dtas;
  std::vector<std::pair<std::string, FormulaPtr>> formulas;
  std::vector<std::pair<std::string, GlobalPtr>> globals;

  std::shared_ptr<const OneGDTA> find_dta(std::string_view name) const;
  FormulaPtr find_formula(std::string_view name) const;
  GlobalPtr find_global(std::string_view name) const;
};

PropertyFile parse_property(std::string_view text, const AgentClass& agent);
PropertyFile load_property(const std::string& path, const AgentClass& agent);

}  // namespace popmc
