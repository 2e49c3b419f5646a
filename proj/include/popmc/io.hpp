#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "popmc/collective.hpp"
#include "popmc/ode.hpp"
#include "popmc/signal.hpp"
#include "popmc/ssa.hpp"

namespace popmc {

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// `t, <labels...>` sampled at `grid`; values optionally scaled.
void write_solution_csv(std::ostream& out, const OdeSolution& sol, const std::vector<double>& grid,
                        const std::vector<std::string>& labels, double scale = 1.0);

void write_trajectory_csv(std::ostream& out, const Trajectory& tr);

nlohmann::json signal_to_json(const BooleanSignal& sig, const std::vector<std::string>& state_names);
nlohmann::json verdict_to_json(const Verdict& v);
nlohmann::json estimate_to_json(const EstimateWithCI& e);

}  // namespace popmc
