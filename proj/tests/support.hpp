#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "robosched/plan.hpp"
#include "robosched/scenario.hpp"

namespace testing {

inline std::string src_path(const std::string& rel) { return std::string(RS_SOURCE_DIR) + "/" + rel; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline robosched::Scenario wall() { return robosched::load_scenario(src_path("scenarios/wall_assembly.scn.json")); }
inline robosched::Scenario grid() { return robosched::load_scenario(src_path("scenarios/scan_grid.scn.json")); }

inline robosched::Plan fixture(const std::string& exp, const std::string& name) {
  return robosched::parse_plan(slurp(src_path("fixtures/" + exp + "/" + name + ".plan")));
}

}  // namespace testing
