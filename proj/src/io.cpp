#include "popmc/io.hpp"

#include <iomanip>

namespace popmc {

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n' << std::setprecision(10);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
}

void write_solution_csv(std::ostream& out, const OdeSolution& sol, const std::vector<double>& grid,
                        const std::vector<std::string>& labels, double scale) {
  std::vector<std::string> header{"t"};
  header.insert(header.end(), labels.begin(), labels.end());
  std::vector<std::vector<double>> rows;
  for (double t : grid) {
    const Eigen::VectorXd y = sol(t);
    std::vector<double> r{t};
    for (std::size_t i = 0; i < labels.size(); ++i) r.push_back(scale * y[static_cast<Eigen::Index>(i)]);
    rows.push_back(std::move(r));
  }
  write_csv(out, header, rows);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  std::vector<std::string> header{"t"};
  header.insert(header.end(), tr.labels.begin(), tr.labels.end());
  std::vector<std::vector<double>> rows;
  rows.push_back({0.0});
  rows.back().insert(rows.back().end(), tr.initial.begin(), tr.initial.end());
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    std::vector<double> r{tr.times[k]};
    r.insert(r.end(), tr.states[k].begin(), tr.states[k].end());
    rows.push_back(std::move(r));
  }
  write_csv(out, header, rows);
}

nlohmann::json signal_to_json(const BooleanSignal& sig, const std::vector<std::string>& state_names) {
  nlohmann::json j;
  j["horizon"] = sig.horizon;
  nlohmann::json states = nlohmann::json::object();
  for (std::size_t s = 0; s < sig.tracks.size(); ++s) {
    states[state_names[s]] = {{"initial", static_cast<bool>(sig.tracks[s].initial)},
                              {"switches", sig.tracks[s].switches}};
  }
  j["states"] = states;
  j["warnings"] = sig.warnings;
  return j;
}

nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json j;
  j["property"] = v.text;
  j["verdict"] = v.value;
  if (v.estimate >= 0.0) j["estimate"] = v.estimate;
  if (!v.warnings.empty()) j["warnings"] = v.warnings;
  if (!v.children.empty()) {
    j["children"] = nlohmann::json::array();
    for (const auto& c : v.children) j["children"].push_back(verdict_to_json(c));
  }
  return j;
}

nlohmann::json estimate_to_json(const EstimateWithCI& e) {
  return {{"estimate", e.estimate}, {"runs", e.runs},  {"successes", e.successes},
          {"ci_low", e.lo},         {"ci_high", e.hi}, {"half_width", e.half_width}};
}

}  // namespace popmc
