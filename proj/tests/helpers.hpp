#pragma once

#include <string>

#include "popmc/model.hpp"
#include "popmc/property.hpp"

namespace testing {

inline std::string models_dir() { return POPMC_MODELS_DIR; }

inline popmc::PopulationModel local_model(int N = 100) {
  auto m = popmc::load_model(models_dir() + "/epidemic_local.pop");
  m.set_population(N);
  return m;
}

inline popmc::PopulationModel global_model(int N = 100) {
  auto m = popmc::load_model(models_dir() + "/epidemic_global.pop");
  m.set_population(N);
  return m;
}

inline popmc::PropertyFile epidemic_props(const popmc::PopulationModel& m) {
  return popmc::load_property(models_dir() + "/epidemic.prop", m.agent);
}

}  // namespace testing
