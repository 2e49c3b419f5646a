// popmc: fluid, central-limit and moment-closure model checking of
// population models, with a stochastic simulation reference.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "popmc/collective.hpp"
#include "popmc/diagnostics.hpp"
#include "popmc/error.hpp"
#include "popmc/fluid.hpp"
#include "popmc/individual.hpp"
#include "popmc/io.hpp"
#include "popmc/moments.hpp"
#include "popmc/ssa.hpp"
#include "popmc/uniformization.hpp"

using namespace popmc;
using json = nlohmann::json;

namespace {

struct RunConfig {
  std::string verb;
  std::string model;
  std::string property;
  std::string target;  // formula / global / automaton name
  std::string method = "default";
  int N = 0;           // 0 keeps the model's value
  double T = 100.0;
  double t0_max = 0.0;
  std::size_t points = 1000;
  std::size_t runs = 10000;
  std::uint64_t seed = 1;
  bool correct = true;
  std::string mode = "global";
  std::string over;
  std::string csv_out;
  std::string json_out;
  double rtol = 1e-6;
  double atol = 1e-9;
  bool strict = false;
  int workers = 1;
  std::vector<std::string> set_params;
};

json to_json(const RunConfig& c) {
  return {{"verb", c.verb},       {"model", c.model},       {"property", c.property}, {"target", c.target},
          {"method", c.method},   {"N", c.N},               {"T", c.T},               {"t0_max", c.t0_max},
          {"points", c.points},   {"runs", c.runs},         {"seed", c.seed},         {"correct", c.correct},
          {"mode", c.mode},       {"over", c.over},         {"csv_out", c.csv_out},   {"json_out", c.json_out},
          {"rtol", c.rtol},       {"atol", c.atol},         {"strict", c.strict},     {"workers", c.workers},
          {"set", c.set_params}};
}

class UsageError : public Error {
 public:
  using Error::Error;
};

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

PopulationModel load(const RunConfig& c) {
  PopulationModel m = load_model(c.model);
  for (const auto& kv : c.set_params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects name=value, got '" + kv + "'");
    m.set_param(kv.substr(0, eq), std::stod(kv.substr(eq + 1)));
  }
  if (c.N > 0) m.set_population(c.N);
  return m;
}

OdeConfig ode_config(const RunConfig& c) {
  OdeConfig o;
  o.rtol = c.rtol;
  o.atol = c.atol;
  return o;
}

// "name" or "name:order".
std::pair<std::string, int> split_method(const std::string& s, int default_order) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {s, default_order};
  return {s.substr(0, colon), std::stoi(s.substr(colon + 1))};
}

LocalConfig local_config(const RunConfig& c) {
  LocalConfig lc;
  lc.ode = ode_config(c);
  lc.grid = c.points;
  auto [name, order] = split_method(c.method == "default" ? "fluid" : c.method, 4);
  if (name == "fluid") lc.method = ScheduleMethod::Fluid;
  else if (name == "moments") lc.method = ScheduleMethod::Moments;
  else throw UsageError("check-local: method must be fluid or moments:m");
  lc.order = order;
  return lc;
}

GlobalConfig global_config(const RunConfig& c) {
  GlobalConfig gc;
  gc.ode = ode_config(c);
  gc.correct = c.correct;
  gc.local = local_config(RunConfig{});
  auto [name, order] = split_method(c.method == "default" ? "cla" : c.method, 4);
  if (name == "cla") gc.method = GlobalMethod::Cla;
  else if (name == "moments") gc.method = GlobalMethod::Moments;
  else if (name == "maxent") gc.method = GlobalMethod::MaxEnt;
  else throw UsageError("check-global: method must be cla, moments:m or maxent");
  gc.order = order;
  return gc;
}

void emit_json(const RunConfig& c, json j) {
  j["config"] = to_json(c);
  j["warnings"] = take_warnings();
  const std::string text = j.dump(2);
  if (c.json_out.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream(c.json_out) << text << '\n';
  }
}

std::ostream& csv_stream(const RunConfig& c, std::ofstream& file) {
  if (c.csv_out.empty()) return std::cout;
  file.open(c.csv_out);
  if (!file) throw UsageError("cannot write '" + c.csv_out + "'");
  return file;
}

void run_fluid(const RunConfig& c) {
  const PopulationModel m = load(c);
  const auto grid = uniform_grid(0.0, c.T, c.points);
  std::ofstream f;
  std::ostream& out = csv_stream(c, f);
  auto [name, order] = split_method(c.method == "default" ? "fluid" : c.method, 4);
  const PopulationProcess p = m.to_process();
  if (name == "fluid") {
    write_solution_csv(out, fluid_solve(m, c.T, ode_config(c)), grid, m.agent.states);
  } else if (name == "cla") {
    const ClaSolution cla = cla_solve(m, c.T, ode_config(c));
    std::vector<std::string> header{"t"};
    for (const auto& s : m.agent.states) header.push_back("mean_" + s);
    for (const auto& s : m.agent.states) header.push_back("var_" + s);
    std::vector<std::vector<double>> rows;
    for (double t : grid) {
      const auto mu = cla.pop_mean(t);
      const auto C = cla.pop_cov(t);
      std::vector<double> r{t};
      for (Eigen::Index i = 0; i < mu.size(); ++i) r.push_back(mu[i]);
      for (Eigen::Index i = 0; i < mu.size(); ++i) r.push_back(C(i, i));
      rows.push_back(std::move(r));
    }
    write_csv(out, header, rows);
  } else if (name == "moments") {
    const MomentSpec spec = MomentSpec::full(p.dim(), order);
    const OdeSystem sys = moment_equations(p, spec);
    const OdeSolution sol = integrate(sys, 0.0, c.T, deterministic_moments(spec, p.initial), ode_config(c));
    write_solution_csv(out, sol, grid, sys.labels);
  } else {
    throw UsageError("fluid: method must be fluid, cla or moments:m");
  }
  if (!c.json_out.empty()) emit_json(c, {{"verb", "fluid"}});
}

void run_check_local(const RunConfig& c) {
  const PopulationModel m = load(c);
  const PropertyFile pf = load_property(c.property, m.agent);
  FormulaPtr f = pf.find_formula(c.target);
  if (!f) throw UsageError("no formula named '" + c.target + "'");
  const LocalConfig lc = local_config(c);
  const auto start = std::chrono::steady_clock::now();
  const RateSchedule r = RateSchedule::build(m, lc, required_horizon(*f, c.t0_max));
  const BooleanSignal sig = check_csl_ta(*f, m, r, c.t0_max, lc);
  json j;
  j["formula"] = f->text;
  j["signal"] = signal_to_json(sig, m.agent.states);
  if (f->kind == CslTaFormula::Kind::Prob && f->children.empty()) {
    const ProductAgentClass p = synchronize(m.agent, *f->dta, f->horizon);
    const PathProbabilityCurve curve = path_prob_curve(p, r, c.t0_max, lc);
    std::vector<std::string> header{"t0"};
    for (const auto& s : m.agent.states) header.push_back("p_" + s);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < curve.t0.size(); ++k) {
      std::vector<double> row{curve.t0[k]};
      for (const auto& v : curve.values) row.push_back(v[k]);
      rows.push_back(std::move(row));
    }
    if (!c.csv_out.empty()) {
      std::ofstream out(c.csv_out);
      write_csv(out, header, rows);
    }
    json at0 = json::object();
    for (std::size_t s = 0; s < m.agent.states.size(); ++s) at0[m.agent.states[s]] = curve.values[s].front();
    j["probability_at_t0_0"] = at0;
  }
  j["seconds"] = elapsed(start);
  emit_json(c, j);
}

void run_check_global(const RunConfig& c) {
  const PopulationModel m = load(c);
  const PropertyFile pf = load_property(c.property, m.agent);
  GlobalPtr g = pf.find_global(c.target);
  if (!g) throw UsageError("no global property named '" + c.target + "'");
  const GlobalConfig gc = global_config(c);
  const auto start = std::chrono::steady_clock::now();
  const Verdict v = check_global_formula(*g, m, gc);
  json j = verdict_to_json(v);
  j["seconds"] = elapsed(start);
  if (!c.csv_out.empty() && g->kind == GlobalProperty::Kind::Threshold && g->path && g->args.empty()) {
    const auto grid = uniform_grid(0.0, to_double(g->horizon), c.points);
    const GlobalCurve curve = check_path_global_curve(m, *g->dta, g->horizon, g->a, g->b, g->counts, grid, gc);
    std::ofstream out(c.csv_out);
    out << "T,estimate,method,corrected\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
      out << grid[k] << ',' << curve.estimate[k] << ',' << c.method << ',' << (c.correct ? 1 : 0) << '\n';
    }
  }
  emit_json(c, j);
}

void run_simulate(const RunConfig& c) {
  const PopulationModel m = load(c);
  const auto start = std::chrono::steady_clock::now();
  if (c.property.empty()) {
    const Trajectory tr = gillespie_run(m, c.T, replication_seed(c.seed, 0));
    std::ofstream f;
    write_trajectory_csv(csv_stream(c, f), tr);
    if (!c.json_out.empty()) emit_json(c, {{"jumps", tr.times.size()}});
    return;
  }
  const PropertyFile pf = load_property(c.property, m.agent);
  json j;
  if (c.mode == "local") {
    auto d = pf.find_dta(c.target);
    if (!d) throw UsageError("no automaton named '" + c.target + "'");
    const auto grid = uniform_grid(0.0, c.T, c.points);
    json per_state = json::object();
    std::vector<std::vector<EstimateWithCI>> curves;
    for (std::size_t s = 0; s < m.agent.states.size(); ++s) {
      if (m.initial[s] == 0) continue;
      const auto times = tagged_acceptance_times(m, *d, static_cast<int>(s), c.T, c.runs, c.seed);
      curves.push_back(acceptance_curve(times, grid));
      per_state[m.agent.states[s]] = estimate_to_json(curves.back().back());
    }
    j["estimate_at_T"] = per_state;
    if (!c.csv_out.empty()) {
      std::ofstream out(c.csv_out);
      out << "T";
      for (std::size_t s = 0; s < m.agent.states.size(); ++s) {
        if (m.initial[s] != 0) out << ",p_" << m.agent.states[s];
      }
      out << '\n';
      for (std::size_t k = 0; k < grid.size(); ++k) {
        out << grid[k];
        for (const auto& cv : curves) out << ',' << cv[k].estimate;
        out << '\n';
      }
    }
  } else {
    GlobalPtr g = pf.find_global(c.target);
    if (!g || g->kind != GlobalProperty::Kind::Threshold || !g->path || !g->args.empty()) {
      throw UsageError("simulate --mode global needs a path threshold property without arguments");
    }
    const ProductPopulationModel pm = product_population(m, synchronize(m.agent, *g->dta, g->horizon));
    const auto grid = uniform_grid(0.0, to_double(g->horizon), c.points);
    const auto counts = global_final_counts(pm, grid, c.runs, c.seed);
    const auto [lo, hi] = count_bounds(g->a, g->b, m.N, g->counts);
    const auto est = global_estimate_curve(counts, lo, hi);
    j["estimate"] = estimate_to_json(est.back());
    j["verdict"] = compare(est.back().estimate, g->cmp, g->p);
    if (!c.csv_out.empty()) {
      std::ofstream out(c.csv_out);
      out << "T,estimate,ci_low,ci_high\n";
      for (std::size_t k = 0; k < grid.size(); ++k) {
        out << grid[k] << ',' << est[k].estimate << ',' << est[k].lo << ',' << est[k].hi << '\n';
      }
    }
  }
  j["seconds"] = elapsed(start);
  emit_json(c, j);
}

void run_sweep(const RunConfig& c) {
  const auto eq = c.over.find('=');
  if (eq == std::string::npos) throw UsageError("--over expects N=v1,v2,... or T=v1,v2,...");
  const std::string key = c.over.substr(0, eq);
  std::vector<double> values;
  std::stringstream ss(c.over.substr(eq + 1));
  for (std::string item; std::getline(ss, item, ',');) values.push_back(std::stod(item));
  if (key != "N" && key != "T") throw UsageError("--over supports N or T");
  const PopulationModel base = load(c);
  const PropertyFile pf = load_property(c.property, base.agent);
  GlobalPtr g = pf.find_global(c.target);
  if (!g || g->kind != GlobalProperty::Kind::Threshold || !g->path || !g->args.empty()) {
    throw UsageError("sweep needs a path threshold property without arguments");
  }
  const GlobalConfig gc = global_config(c);
  struct Row {
    double value, estimate, seconds, ssa = -1.0, ssa_seconds = 0.0;
  };
  auto work = [&](double v) {
    PopulationModel m = base;
    Rational horizon = g->horizon;
    if (key == "N") m.set_population(static_cast<int>(v));
    else horizon = time_to_rational(v);
    Row row{v, 0.0, 0.0};
    auto start = std::chrono::steady_clock::now();
    row.estimate = check_path_global(m, *g->dta, horizon, g->a, g->b, g->counts, gc);
    row.seconds = elapsed(start);
    if (c.runs > 0) {
      start = std::chrono::steady_clock::now();
      const ProductPopulationModel pm = product_population(m, synchronize(m.agent, *g->dta, horizon));
      const auto counts = global_final_counts(pm, {to_double(horizon)}, c.runs, c.seed);
      const auto [lo, hi] = count_bounds(g->a, g->b, m.N, g->counts);
      row.ssa = global_estimate_curve(counts, lo, hi).front().estimate;
      row.ssa_seconds = elapsed(start);
    }
    return row;
  };
  std::vector<Row> rows(values.size());
  const std::size_t workers = static_cast<std::size_t>(std::max(1, c.workers));
  for (std::size_t i = 0; i < values.size(); i += workers) {
    std::vector<std::future<Row>> batch;
    for (std::size_t k = i; k < std::min(values.size(), i + workers); ++k) {
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, work, values[k]));
    }
    for (std::size_t k = 0; k < batch.size(); ++k) rows[i + k] = batch[k].get();
  }
  std::ofstream f;
  std::ostream& out = csv_stream(c, f);
  out << key << ",estimate,method,corrected,seconds,ssa_estimate,ssa_seconds\n";
  for (const auto& r : rows) {
    out << r.value << ',' << r.estimate << ',' << c.method << ',' << (c.correct ? 1 : 0) << ',' << r.seconds << ','
        << r.ssa << ',' << r.ssa_seconds << '\n';
  }
  if (!c.json_out.empty()) emit_json(c, {{"rows", rows.size()}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fluid and central-limit model checking of population models"};
  app.require_subcommand(1);
  RunConfig cfg;
  if (const char* w = std::getenv("POPMC_WORKERS")) cfg.workers = std::max(1, std::atoi(w));

  auto common = [&cfg](CLI::App* sub, bool needs_property) {
    sub->add_option("-m,--model", cfg.model, "population model (.pop)")->required()->check(CLI::ExistingFile);
    auto* p = sub->add_option("-p,--property", cfg.property, "property file (.prop)")->check(CLI::ExistingFile);
    if (needs_property) p->required();
    sub->add_option("-N,--population", cfg.N, "override the population size");
    sub->add_option("--set", cfg.set_params, "override a parameter, name=value");
    sub->add_option("--method", cfg.method,
                    "fluid | cla | moments:m | maxent (verb dependent; default fluid locally, cla globally)");
    sub->add_option("--rtol", cfg.rtol, "ODE relative tolerance")->capture_default_str();
    sub->add_option("--atol", cfg.atol, "ODE absolute tolerance")->capture_default_str();
    sub->add_option("--points", cfg.points, "output grid size")->capture_default_str();
    sub->add_option("--csv", cfg.csv_out, "CSV output path");
    sub->add_option("--json", cfg.json_out, "JSON output path (default stdout)");
    sub->add_flag("--strict", cfg.strict, "exit 3 when any warning was raised");
  };

  auto* fluid = app.add_subcommand("fluid", "trajectory CSV: t, <states> (fluid: fractions; cla: mean/var; moments)");
  common(fluid, false);
  fluid->add_option("-T,--horizon", cfg.T, "end time")->capture_default_str();

  auto* local = app.add_subcommand("check-local", "per-state truth signals of a CSL-TA formula; CSV t0, p_<state>");
  common(local, true);
  local->add_option("-f,--formula", cfg.target, "formula name")->required();
  local->add_option("--t0-max", cfg.t0_max, "latest initial time")->capture_default_str();

  auto* global = app.add_subcommand("check-global", "collective verdict JSON; CSV T, estimate, method, corrected");
  common(global, true);
  global->add_option("-g,--global", cfg.target, "global property name")->required();
  global->add_flag("!--no-correct", cfg.correct, "disable the finite-size threshold correction");

  auto* sim = app.add_subcommand("simulate", "SSA: trajectory CSV, or estimates with --property");
  common(sim, false);
  sim->add_option("-T,--horizon", cfg.T, "end time (trajectory and local mode)")->capture_default_str();
  sim->add_option("--target", cfg.target, "automaton (local) or global property (global) name");
  sim->add_option("--mode", cfg.mode, "local | global")->check(CLI::IsMember({"local", "global"}));
  sim->add_option("--runs", cfg.runs, "replications")->capture_default_str();
  sim->add_option("--seed", cfg.seed, "master seed")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "CSV: <key>, estimate, method, corrected, seconds, ssa_estimate, ssa_seconds");
  common(sweep, true);
  sweep->add_option("-g,--global", cfg.target, "global property name")->required();
  sweep->add_option("--over", cfg.over, "N=20,50,100 or T=10,20")->required();
  sweep->add_flag("!--no-correct", cfg.correct, "disable the finite-size threshold correction");
  sweep->add_option("--runs", cfg.runs, "SSA replications per point (0 skips SSA)")->capture_default_str();
  sweep->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  sweep->add_option("--workers", cfg.workers, "parallel grid points (env POPMC_WORKERS)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (fluid->parsed()) cfg.verb = "fluid", run_fluid(cfg);
    else if (local->parsed()) cfg.verb = "check-local", run_check_local(cfg);
    else if (global->parsed()) cfg.verb = "check-global", run_check_global(cfg);
    else if (sim->parsed()) cfg.verb = "simulate", run_simulate(cfg);
    else if (sweep->parsed()) cfg.verb = "sweep", run_sweep(cfg);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  for (const auto& w : take_warnings()) std::cerr << "warning: " << w << '\n';
  if (cfg.strict && total_warnings() > 0) return 3;
  return 0;
}
