#include <fstream>
#include <sstream>

#include "popmc/error.hpp"
#include "popmc/property.hpp"

namespace popmc {
namespace {

class PropertyParser {
 public:
  PropertyParser(std::string_view text, const AgentClass& agent) : ts_(tokenize(text)), agent_(agent) {}

  PropertyFile parse() {
    while (!ts_.at_end()) {
      const Token& kw = ts_.expect_identifier();
      if (kw.text == "label") {
        parse_label();
      } else if (kw.text == "dta") {
        parse_dta();
      } else if (kw.text == "formula") {
        const Token& name = ts_.expect_identifier();
        check_fresh(name);
        ts_.expect("=");
        FormulaPtr f = csl_or();
        ts_.expect(";");
        out_.formulas.emplace_back(name.text, f);
      } else if (kw.text == "global") {
        const Token& name = ts_.expect_identifier();
        check_fresh(name);
        ts_.expect("=");
        GlobalPtr g = global_or();
        ts_.expect(";");
        out_.globals.emplace_back(name.text, g);
      } else {
        ts_.fail_at(kw, "expected 'label', 'dta', 'formula' or 'global'");
      }
    }
    return std::move(out_);
  }

 private:
  void check_fresh(const Token& t) {
    if (out_.labels.count(t.text) || out_.find_dta(t.text) || out_.find_formula(t.text) || out_.find_global(t.text)) {
      ts_.fail_at(t, "name '" + t.text + "' already defined");
    }
  }

  void parse_label() {
    const Token& name = ts_.expect_identifier();
    check_fresh(name);
    ts_.expect("=");
    std::vector<bool> members(agent_.states.size(), false);
    do {
      const Token& t = ts_.expect_identifier();
      const int s = agent_.state_index(t.text);
      if (s < 0) ts_.fail_at(t, "undeclared state '" + t.text + "'");
      members[static_cast<std::size_t>(s)] = true;
    } while (ts_.accept(","));
    ts_.expect(";");
    out_.labels[name.text] = members;
  }

  // ------------------------------------------------------------ numbers

  Rational rational() {
    const Token& t = ts_.expect_number();
    std::string text = t.text;
    if (text.find_first_of("eE") != std::string::npos) ts_.fail_at(t, "exponent notation not allowed in constants");
    Rational r;
    try {
      r = parse_rational(text);
      if (ts_.accept("/")) {
        const Token& d = ts_.expect_number();
        const Rational den = parse_rational(d.text);
        if (den == Rational(0)) ts_.fail_at(d, "zero denominator");
        r /= den;
      }
    } catch (const std::invalid_argument& e) {
      ts_.fail_at(t, e.what());
    }
    return r;
  }

  double real() {
    const bool neg = ts_.accept("-");
    const Token& t = ts_.expect_number();
    double v = std::stod(t.text);
    if (ts_.accept("/")) v /= std::stod(ts_.expect_number().text);
    return neg ? -v : v;
  }

  Cmp cmp_op() {
    const Token& t = ts_.next();
    if (t.text == "<") return Cmp::Lt;
    if (t.text == "<=") return Cmp::Le;
    if (t.text == ">=") return Cmp::Ge;
    if (t.text == ">") return Cmp::Gt;
    ts_.fail_at(t, "expected comparison operator");
  }

  bool accept_and() { return ts_.accept("&&") || ts_.accept("&"); }
  bool accept_or() { return ts_.accept("||") || ts_.accept("|"); }

  // ------------------------------------------------------------ state formulae

  std::optional<StateFormula> state_atom(const std::string& name) const {
    if (name.rfind("phi_", 0) == 0) {
      const int s = agent_.state_index(name.substr(4));
      if (s < 0) return std::nullopt;
      std::vector<bool> m(agent_.states.size(), false);
      m[static_cast<std::size_t>(s)] = true;
      return StateFormula::states(m, name);
    }
    if (auto it = out_.labels.find(name); it != out_.labels.end()) return StateFormula::states(it->second, name);
    const int s = agent_.state_index(name);
    if (s >= 0) {
      std::vector<bool> m(agent_.states.size(), false);
      m[static_cast<std::size_t>(s)] = true;
      return StateFormula::states(m, name);
    }
    return std::nullopt;
  }

  StateFormula sf_or(const std::vector<std::string>& params) {
    StateFormula f = sf_and(params);
    while (accept_or()) f = f || sf_and(params);
    return f;
  }
  StateFormula sf_and(const std::vector<std::string>& params) {
    StateFormula f = sf_not(params);
    while (accept_and()) f = f && sf_not(params);
    return f;
  }
  StateFormula sf_not(const std::vector<std::string>& params) {
    if (ts_.accept("!")) return !sf_not(params);
    if (ts_.accept("(")) {
      StateFormula f = sf_or(params);
      ts_.expect(")");
      return f;
    }
    const Token& t = ts_.expect_identifier();
    if (t.text == "true") return StateFormula::constant(true);
    if (t.text == "false") return StateFormula::constant(false);
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (params[k] == t.text) return StateFormula::param(static_cast<int>(k), t.text);
    }
    if (auto a = state_atom(t.text)) return *a;
    ts_.fail_at(t, "unknown state proposition '" + t.text + "'");
  }

  // ------------------------------------------------------------ clock constraints

  ClockConstraint cc_or() {
    ClockConstraint c = cc_and();
    while (accept_or()) c = c || cc_and();
    return c;
  }
  ClockConstraint cc_and() {
    ClockConstraint c = cc_not();
    while (accept_and()) c = c && cc_not();
    return c;
  }
  ClockConstraint cc_not() {
    if (ts_.accept("!")) return !cc_not();
    if (ts_.accept("(")) {
      ClockConstraint c = cc_or();
      ts_.expect(")");
      return c;
    }
    const Token& t = ts_.expect_identifier();
    if (t.text == "true") return ClockConstraint::always();
    if (t.text == "false") return ClockConstraint::never();
    if (t.text != "x") ts_.fail_at(t, "expected clock 'x'");
    const Cmp op = cmp_op();
    const Rational c = rational();
    if (c < Rational(0)) ts_.fail_at(t, "clock constants must be non-negative");
    return ClockConstraint::atom(op, c);
  }

  // ------------------------------------------------------------ automata

  int dta_state(OneGDTA& d, const Token& t) {
    int q = d.state_index(t.text);
    if (q < 0) {
      d.states.push_back(t.text);
      d.final.push_back(false);
      q = static_cast<int>(d.states.size()) - 1;
    }
    return q;
  }

  void parse_dta() {
    auto d = std::make_shared<OneGDTA>();
    const Token& name = ts_.expect_identifier();
    check_fresh(name);
    d->name = name.text;
    if (ts_.accept("(")) {
      if (!ts_.check(")")) {
        do {
          d->params.push_back(ts_.expect_identifier().text);
        } while (ts_.accept(","));
      }
      ts_.expect(")");
    }
    const Token& open = ts_.expect("{");
    std::optional<int> init;
    while (!ts_.accept("}")) {
      const Token& kw = ts_.expect_identifier();
      if (kw.text == "init") {
        if (init) ts_.fail_at(kw, "duplicate 'init'");
        init = dta_state(*d, ts_.expect_identifier());
        ts_.expect(";");
      } else if (kw.text == "final" || kw.text == "state") {
        do {
          const int q = dta_state(*d, ts_.expect_identifier());
          if (kw.text == "final") d->final[static_cast<std::size_t>(q)] = true;
        } while (ts_.accept(","));
        ts_.expect(";");
      } else if (kw.text == "edge") {
        DtaEdge e;
        e.from = dta_state(*d, ts_.expect_identifier());
        ts_.expect("->");
        e.to = dta_state(*d, ts_.expect_identifier());
        ts_.expect("on");
        const Token& act = ts_.expect_identifier();
        const auto labels = agent_.labels();
        if (std::find(labels.begin(), labels.end(), act.text) == labels.end()) {
          ts_.fail_at(act, "unknown action '" + act.text + "'");
        }
        e.action = act.text;
        if (ts_.accept("when")) e.guard = sf_or(d->params);
        if (ts_.accept("if")) e.clock = cc_or();
        ts_.expect(";");
        d->edges.push_back(std::move(e));
      } else {
        ts_.fail_at(kw, "expected 'init', 'final', 'state' or 'edge'");
      }
    }
    if (!init) ts_.fail_at(open, "automaton '" + d->name + "' has no 'init'");
    d->initial = *init;
    try {
      validate_dta(*d, agent_);
    } catch (const Error& e) {
      throw ParseError(e.what(), name.line, name.column);
    }
    out_.dtas.push_back(d);
  }

  // ------------------------------------------------------------ CSL-TA

  FormulaPtr csl_or() {
    FormulaPtr f = csl_and();
    while (accept_or()) f = CslTaFormula::make_or(f, csl_and());
    return f;
  }
  FormulaPtr csl_and() {
    FormulaPtr f = csl_not();
    while (accept_and()) f = CslTaFormula::make_and(f, csl_not());
    return f;
  }
  FormulaPtr csl_not() {
    if (ts_.accept("!")) return CslTaFormula::make_not(csl_not());
    if (ts_.accept("(")) {
      FormulaPtr f = csl_or();
      ts_.expect(")");
      return f;
    }
    const Token& t = ts_.expect_identifier();
    if (t.text == "true") return CslTaFormula::make_true();
    if (t.text == "false") return CslTaFormula::make_not(CslTaFormula::make_true());
    if (t.text == "P" && ts_.check("[")) return prob_op();
    if (auto f = out_.find_formula(t.text)) return f;
    if (auto a = state_atom(t.text)) return CslTaFormula::make_atom(*a, t.text);
    ts_.fail_at(t, "unknown formula or proposition '" + t.text + "'");
  }

  std::pair<std::shared_ptr<const OneGDTA>, std::vector<FormulaPtr>> dta_ref() {
    const Token& t = ts_.expect_identifier();
    auto d = out_.find_dta(t.text);
    if (!d) ts_.fail_at(t, "unknown automaton '" + t.text + "'");
    std::vector<FormulaPtr> args;
    if (ts_.accept("[")) {
      do {
        args.push_back(csl_or());
      } while (ts_.accept(","));
      ts_.expect("]");
    }
    if (args.size() != d->params.size()) {
      ts_.fail_at(t, "automaton '" + t.text + "' expects " + std::to_string(d->params.size()) + " arguments");
    }
    return {d, args};
  }

  FormulaPtr prob_op() {
    ts_.expect("[");
    ts_.expect("<=");
    const Token& ht = ts_.peek();
    const Rational horizon = rational();
    if (horizon <= Rational(0)) ts_.fail_at(ht, "time bound must be positive");
    ts_.expect("]");
    const Cmp op = cmp_op();
    const Token& pt = ts_.peek();
    const double p = real();
    if (p < 0.0 || p > 1.0) ts_.fail_at(pt, "probability bound outside [0,1]");
    ts_.expect("(");
    auto [d, args] = dta_ref();
    ts_.expect(")");
    return CslTaFormula::make_prob(op, p, horizon, d, std::move(args));
  }

  // ------------------------------------------------------------ global

  GlobalPtr global_or() {
    GlobalPtr g = global_and();
    while (accept_or()) g = combine(GlobalProperty::Kind::Or, g, global_and());
    return g;
  }
  GlobalPtr global_and() {
    GlobalPtr g = global_not();
    while (accept_and()) g = combine(GlobalProperty::Kind::And, g, global_not());
    return g;
  }
  static GlobalPtr combine(GlobalProperty::Kind k, GlobalPtr a, GlobalPtr b) {
    auto g = std::make_shared<GlobalProperty>();
    g->kind = k;
    g->text = "(" + a->text + (k == GlobalProperty::Kind::And ? " && " : " || ") + b->text + ")";
    g->children = {std::move(a), std::move(b)};
    return g;
  }
  GlobalPtr global_not() {
    if (ts_.accept("!")) {
      auto g = std::make_shared<GlobalProperty>();
      g->kind = GlobalProperty::Kind::Not;
      g->children = {global_not()};
      g->text = "!" + g->children[0]->text;
      return g;
    }
    if (ts_.accept("(")) {
      GlobalPtr g = global_or();
      ts_.expect(")");
      return g;
    }
    const Token& t = ts_.expect_identifier();
    if (t.text == "true") {
      auto g = std::make_shared<GlobalProperty>();
      g->text = "true";
      return g;
    }
    if (auto g = out_.find_global(t.text)) return g;
    if (t.text != "Pr") ts_.fail_at(t, "expected 'Pr', 'true' or a global property name");
    auto g = std::make_shared<GlobalProperty>();
    g->kind = GlobalProperty::Kind::Threshold;
    g->cmp = cmp_op();
    const Token& pt = ts_.peek();
    g->p = real();
    if (g->p < 0.0 || g->p > 1.0) ts_.fail_at(pt, "probability bound outside [0,1]");
    ts_.expect("(");
    const Token& mode = ts_.expect_identifier();
    if (mode.text != "frac" && mode.text != "count") ts_.fail_at(mode, "expected 'frac' or 'count'");
    g->counts = mode.text == "count";
    ts_.expect("(");
    const Token& target = ts_.peek();
    if (target.kind == TokenKind::Identifier && out_.find_dta(target.text)) {
      auto [d, args] = dta_ref();
      g->path = true;
      g->dta = d;
      g->args = std::move(args);
      ts_.expect(",");
      const Token& ht = ts_.peek();
      g->horizon = rational();
      if (g->horizon <= Rational(0)) ts_.fail_at(ht, "time horizon must be positive");
    } else {
      g->path = false;
      g->formula = csl_or();
      ts_.expect(",");
      g->t0 = to_double(rational());
    }
    ts_.expect(")");
    ts_.expect("in");
    ts_.expect("[");
    const Token& at = ts_.peek();
    g->a = real();
    ts_.expect(",");
    g->b = real();
    ts_.expect("]");
    ts_.expect(")");
    if (g->a < 0.0 || g->a > g->b) ts_.fail_at(at, "threshold interval must satisfy 0 <= a <= b");
    if (!g->counts && g->b > 1.0) ts_.fail_at(at, "fraction thresholds must lie in [0,1]");
    std::ostringstream os;
    os << "Pr" << to_string(g->cmp) << g->p << "(" << mode.text << "("
       << (g->path ? g->dta->name + "," + to_string(g->horizon) : g->formula->text + "," + std::to_string(g->t0))
       << ") in [" << g->a << "," << g->b << "])";
    g->text = os.str();
    return g;
  }

  TokenStream ts_;
  const AgentClass& agent_;
  PropertyFile out_;
};

}  // namespace

PropertyFile parse_property(std::string_view text, const AgentClass& agent) {
  return PropertyParser(text, agent).parse();
}

PropertyFile load_property(const std::string& path, const AgentClass& agent) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open property file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_property(ss.str(), agent);
}

}  // namespace popmc
