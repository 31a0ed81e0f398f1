#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "gridledger/scenario.hpp"
#include "gridledger/simnet.hpp"

namespace fixtures {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline gridledger::Scenario scenario_file(const std::string& name) {
  return gridledger::parse_scenario(read_file(std::string(GRIDLEDGER_SCENARIOS) + "/" + name));
}

inline gridledger::SimReport run_file(const std::string& name) {
  const auto sc = scenario_file(name);
  gridledger::Simulation sim(gridledger::SimConfig::from_scenario(sc), sc);
  return sim.run(*sc.run_until);
}

// `n` nodes, all authorised, assessment descending with id.
inline gridledger::Scenario desk(std::size_t n) {
  gridledger::Scenario sc;
  for (std::uint32_t i = 1; i <= n; ++i) {
    sc.nodes.push_back({i, 1000 - i});
    sc.authorized.push_back(i);
  }
  return sc;
}

inline gridledger::SimConfig desk_config(std::uint64_t seed = 1) {
  gridledger::SimConfig c;
  c.seed = seed;
  c.max_recorders = 3;
  c.max_supervisors = 1;
  return c;
}

}  // namespace fixtures
