#pragma once

#include <string>

#include "tempofleet/world.hpp"

#ifndef TF_SCENARIO_DIR
#error "TF_SCENARIO_DIR must point at the scenarios directory"
#endif

inline std::string scenario_path(const std::string& name) { return std::string(TF_SCENARIO_DIR) + "/" + name + ".json"; }
inline tempofleet::world::Scenario fixture(const std::string& name) {
  return tempofleet::world::load_scenario(scenario_path(name));
}
