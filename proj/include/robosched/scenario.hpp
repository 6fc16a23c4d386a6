#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "robosched/action.hpp"
#include "robosched/prompt_context.hpp"

namespace robosched {

enum class SiteKind { NamedGraph, Grid };

/// Which cells a single SCAN reveals.
enum class ScanFootprint {
  Self,        // the scanner's cell
  Chebyshev1,  // the 3x3 block around the scanner
  RowColLos,   // same row and column until a blocked cell or the border
};

struct Edge {
  LocationId a;
  LocationId b;
  double du = 1.0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Path {
  std::vector<LocationId> hops;  // excludes the origin
  double du = 0.0;
};

class SiteMap {
 public:
  SiteKind kind = SiteKind::NamedGraph;
  std::vector<LocationId> nodes;  // named graph only, declaration order
  std::vector<Edge> edges;
  int width = 0;
  int height = 0;
  std::set<Cell> blocked;
  std::set<LocationId> no_go;
  std::set<LocationId> chargers;
  std::optional<LocationId> goal;

  /// Rebuilds adjacency; call after mutating nodes/edges/blocked.
  void index();

  bool has_location(const LocationId& loc) const;
  /// Can a robot stand here (declared node, or non-blocked in-bounds cell).
  bool traversable(const LocationId& loc) const;
  std::optional<double> edge_du(const LocationId& from, const LocationId& to) const;
  std::vector<std::pair<LocationId, double>> neighbors(const LocationId& loc) const;
  std::optional<LocationId> step(const LocationId& from, Direction d) const;
  std::optional<Path> shortest_path(const LocationId& from, const LocationId& to) const;
  /// Grid: every traversable cell id in (y, x) order. Named graph: nodes.
  std::vector<LocationId> all_locations() const;
  std::vector<LocationId> footprint(const LocationId& at, ScanFootprint fp) const;

  bool operator==(const SiteMap& o) const {
    return kind == o.kind && nodes == o.nodes && edges == o.edges && width == o.width && height == o.height &&
           blocked == o.blocked && no_go == o.no_go && chargers == o.chargers && goal == o.goal;
  }

 private:
  std::map<LocationId, std::vector<std::pair<LocationId, double>>> adjacency_;
};

struct RobotSpec {
  RobotId id;
  SkillSet skills;
  int payload_capacity = 0;
  double battery_max = 100.0;
  double battery_init = 100.0;
  LocationId start_location;
  int cargo_init = 0;
  friend bool operator==(const RobotSpec&, const RobotSpec&) = default;
};

struct TaskSpec {
  TaskId id;
  ActionKind type = ActionKind::Idle;
  SkillSet required_skills;
  LocationId location;
  int demand = 0;
  double duration = 1.0;
  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct PrecedenceDag {
  std::vector<std::pair<TaskId, TaskId>> edges;  // first must complete before second starts

  /// Kahn's algorithm with a stable tie-break on `order`; nullopt when cyclic.
  std::optional<std::vector<TaskId>> topological_order(const std::vector<TaskId>& order) const;
  std::vector<TaskId> predecessors(const TaskId& t) const;
  friend bool operator==(const PrecedenceDag&, const PrecedenceDag&) = default;
};

struct CostModel {
  double battery_per_du = 25.0;
  double tu_per_du = 1.0;
  double pick_build_tu_per_3mu = 1.0;
  double recharge_tu = 1.0;
  double scan_tu_per_su = 1.0;
  double idle_tu = 1.0;
  ScanFootprint scan_footprint = ScanFootprint::RowColLos;
  friend bool operator==(const CostModel&, const CostModel&) = default;
};

struct Scenario {
  std::string name;
  std::string instruction;
  SiteMap site;
  std::vector<RobotSpec> robots;
  std::vector<TaskSpec> tasks;
  PrecedenceDag dag;
  CostModel cost;
  std::map<LocationId, int> resources;
  std::vector<std::string> safety_rules;
  std::vector<std::string> warnings;  // not part of equality

  const RobotSpec* find_robot(const RobotId& id) const;
  const TaskSpec* find_task(const TaskId& id) const;
  SkillSet skill_union() const;
  bool rule_enabled(const std::string& rule) const;

  bool operator==(const Scenario& o) const {
    return name == o.name && instruction == o.instruction && site == o.site && robots == o.robots &&
           tasks == o.tasks && dag == o.dag && cost == o.cost && resources == o.resources &&
           safety_rules == o.safety_rules;
  }
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& default_name = "scenario");
std::string serialize_scenario(const Scenario& s);

/// Stage-0 context block. Pure function of the scenario.
PromptContext canonical_context(const Scenario& s);

std::string footprint_name(ScanFootprint fp);
std::string task_type_name(ActionKind k);

}  // namespace robosched
