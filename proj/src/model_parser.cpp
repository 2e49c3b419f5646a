#include <cmath>
#include <map>

#include "popmc/error.hpp"
#include "popmc/model.hpp"

namespace popmc {
namespace {

class ModelParser {
 public:
  explicit ModelParser(std::string_view text) : ts_(tokenize(text)) {}

  PopulationModel parse() {
    while (!ts_.at_end()) {
      const Token& kw = ts_.expect_identifier();
      if (kw.text == "state" || kw.text == "states") {
        parse_states();
      } else if (kw.text == "param") {
        parse_param();
      } else if (kw.text == "trans") {
        parse_transition();
      } else if (kw.text == "init") {
        parse_init(kw);
      } else {
        ts_.fail_at(kw, "expected 'state', 'param', 'trans' or 'init'");
      }
    }
    if (m_.agent.states.empty()) throw ParseError("model declares no states", 1, 1);
    if (!saw_init_) throw ParseError("model has no 'init' section", ts_.peek().line, ts_.peek().column);
    const double n = pop_size_.value_or(1.0);
    if (n < 1 || n != std::floor(n)) throw ModelError("population size N must be a positive integer");
    m_.N = static_cast<int>(n);
    m_.initial_exprs.resize(m_.agent.states.size());
    for (auto& e : m_.initial_exprs) {
      if (e.empty()) e = RateExpr::number(0.0);
    }
    m_.set_population(m_.N);
    m_.validate();
    return std::move(m_);
  }

 private:
  void parse_states() {
    do {
      const Token& t = ts_.expect_identifier();
      if (m_.agent.state_index(t.text) >= 0) ts_.fail_at(t, "duplicate state '" + t.text + "'");
      if (!m_.transitions.empty()) ts_.fail_at(t, "states must be declared before transitions");
      m_.agent.states.push_back(t.text);
      ts_.accept(",");
    } while (ts_.peek().kind == TokenKind::Identifier);
    ts_.expect(";");
  }

  std::optional<ExprSymbol> resolve(const std::string& name, bool allow_vars) const {
    if (name == "N") return ExprSymbol{RateExpr::Op::PopSize, -1};
    if (allow_vars && name.size() > 2 && name.rfind("X_", 0) == 0) {
      const int s = m_.agent.state_index(name.substr(2));
      if (s >= 0) return ExprSymbol{RateExpr::Op::Variable, s};
      return std::nullopt;
    }
    const int p = m_.param_index(name);
    if (p >= 0) return ExprSymbol{RateExpr::Op::Param, p};
    return std::nullopt;
  }

  RateExpr expr(bool allow_vars) {
    return parse_rate_expr(ts_, [this, allow_vars](const std::string& n) { return resolve(n, allow_vars); });
  }

  void parse_param() {
    const Token& name = ts_.expect_identifier();
    ts_.expect("=");
    const RateExpr e = expr(false);
    const double v = e.evaluate({}, pop_size_.value_or(1.0), m_.param_values);
    ts_.expect(";");
    if (name.text == "N") {
      pop_size_ = v;
      return;
    }
    if (m_.param_index(name.text) >= 0) ts_.fail_at(name, "duplicate parameter '" + name.text + "'");
    m_.param_names.push_back(name.text);
    m_.param_values.push_back(v);
  }

  int state_ref() {
    const Token& t = ts_.expect_identifier();
    const int s = m_.agent.state_index(t.text);
    if (s < 0) ts_.fail_at(t, "undeclared state '" + t.text + "'");
    return s;
  }

  void parse_transition() {
    GlobalTransition g;
    const Token& name = ts_.expect_identifier();
    g.name = name.text;
    for (const auto& t : m_.transitions) {
      if (t.name == g.name) ts_.fail_at(name, "duplicate transition '" + g.name + "'");
    }
    ts_.expect(":");
    do {
      int mult = 1;
      if (ts_.peek().kind == TokenKind::Number) {
        const Token& k = ts_.next();
        const double v = std::stod(k.text);
        if (v < 1 || v != std::floor(v)) ts_.fail_at(k, "multiplicity must be a positive integer");
        mult = static_cast<int>(v);
        ts_.expect("*");
      }
      const int src = state_ref();
      ts_.expect("->");
      const int dst = state_ref();
      std::string label = g.name;
      if (ts_.accept(":")) label = ts_.expect_identifier().text;
      int local = m_.agent.find_local(src, label, dst);
      if (local < 0) {
        m_.agent.local_transitions.push_back({src, label, dst});
        local = static_cast<int>(m_.agent.local_transitions.size()) - 1;
      }
      bool merged = false;
      for (auto& e : g.sync) {
        if (e.local == local) {
          e.multiplicity += mult;
          merged = true;
        }
      }
      if (!merged) g.sync.push_back({local, mult});
    } while (ts_.accept(","));
    ts_.expect("@");
    g.rate = expr(true);
    ts_.expect(";");
    m_.transitions.push_back(std::move(g));
  }

  void parse_init(const Token& kw) {
    saw_init_ = true;
    m_.initial_exprs.resize(m_.agent.states.size());
    do {
      const Token& t = ts_.peek();
      const int s = state_ref();
      if (!m_.initial_exprs[static_cast<std::size_t>(s)].empty()) ts_.fail_at(t, "state initialized twice");
      ts_.expect("=");
      m_.initial_exprs[static_cast<std::size_t>(s)] = expr(false);
    } while (ts_.accept(","));
    ts_.expect(";");
    (void)kw;
  }

  TokenStream ts_;
  PopulationModel m_;
  std::optional<double> pop_size_;
  bool saw_init_ = false;
};

}  // namespace

PopulationModel parse_model(std::string_view text) { return ModelParser(text).parse(); }

}  // namespace popmc
