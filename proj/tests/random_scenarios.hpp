#pragma once

#include <random>
#include <string>

#include "json.hpp"
#include "robosched/scenario.hpp"

namespace testing {

/// Shuttle scenario: stock at S, build site at B, charger at C, optional detour node D.
/// `pressure` picks a battery rate that a charge-free schedule may not survive.
inline robosched::Scenario random_shuttle(std::mt19937& rng, bool pressure) {
  using nlohmann::json;
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };
  int pairs = pick(1, 3);
  int demand = 3;
  json doc;
  doc["name"] = "shuttle";
  json edges = json::array({json::array({"S", "B", pick(1, 2)}), json::array({"B", "C", 1}),
                            json::array({"C", "S", pick(1, 2)})});
  json nodes = json::array({"S", "B", "C"});
  if (rng() % 2) {
    nodes.push_back("D");
    edges.push_back(json::array({"D", "B", 1}));
  }
  doc["site"] = {{"kind", "named_graph"}, {"nodes", nodes}, {"edges", edges}, {"chargers", json::array({"C"})}};
  int rate = pressure ? pick(3, 7) * 5 : 5;
  doc["robots"] = json::array({{{"id", "r1"},
                                {"skills", json::array({"MOVE", "PICK", "BUILD", "CHARGE", "IDLE"})},
                                {"payload_capacity", 3},
                                {"battery_max", 100},
                                {"battery_init", pick(6, 10) * 10},
                                {"start_location", "C"}}});
  json tasks = json::array(), dag = json::array();
  for (int i = 1; i <= pairs; ++i) {
    std::string p = "pick_" + std::to_string(i), b = "build_" + std::to_string(i);
    tasks.push_back({{"id", p}, {"type", "PICK"}, {"location", "S"}, {"demand", demand}});
    tasks.push_back({{"id", b}, {"type", "BUILD"}, {"location", "B"}, {"demand", demand}});
    dag.push_back(json::array({p, b}));
    if (i > 1) dag.push_back(json::array({"build_" + std::to_string(i - 1), p}));
  }
  doc["tasks"] = tasks;
  doc["dag"] = dag;
  doc["cost"] = {{"battery_per_du", rate}};
  doc["resources"] = {{"S", demand * pairs}};
  return robosched::parse_scenario(doc.dump(), "shuttle");
}

/// Two-robot variant with split skills, for schedule properties.
inline robosched::Scenario random_team(std::mt19937& rng) {
  using nlohmann::json;
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)); };
  json doc;
  doc["site"] = {{"kind", "named_graph"},
                 {"nodes", json::array({"S", "B", "C", "D"})},
                 {"edges", json::array({json::array({"S", "B", pick(1, 3)}), json::array({"B", "C", pick(1, 3)}),
                                        json::array({"C", "D", pick(1, 3)}), json::array({"D", "S", pick(1, 3)})})},
                 {"chargers", json::array({"C"})}};
  doc["robots"] = json::array(
      {{{"id", "ra"}, {"skills", json::array({"MOVE", "PICK", "BUILD", "IDLE"})}, {"payload_capacity", 30},
        {"start_location", "C"}},
       {{"id", "rb"}, {"skills", json::array({"MOVE", "BUILD", "INSPECT", "IDLE"})}, {"payload_capacity", 3},
        {"start_location", "D"}}});
  json tasks = json::array(), dag = json::array();
  int n = pick(2, 6);
  const char* kinds[] = {"PICK", "INSPECT", "NAVIGATE"};
  const char* locs[] = {"S", "B", "C", "D"};
  for (int i = 0; i < n; ++i) {
    std::string type = kinds[rng() % 3];
    std::string loc = type == "PICK" ? "S" : locs[rng() % 4];
    tasks.push_back({{"id", "t" + std::to_string(i)}, {"type", type}, {"location", loc}, {"demand", type == "PICK" ? 3 * pick(1, 2) : pick(1, 4)}});
    for (int j = 0; j < i; ++j)
      if (rng() % 4 == 0) dag.push_back(json::array({"t" + std::to_string(j), "t" + std::to_string(i)}));
  }
  doc["tasks"] = tasks;
  doc["dag"] = dag;
  doc["cost"] = {{"battery_per_du", 1}};
  doc["resources"] = {{"S", 100}};
  return robosched::parse_scenario(doc.dump(), "team");
}

}  // namespace testing
