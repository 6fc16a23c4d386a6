#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "robosched/action.hpp"

namespace robosched {

/// One six-field command record. `robot` is empty when the line carried no
/// prefix; it then refers to the sole robot of the scenario.
struct PlanStep {
  int step = 1;
  RobotId robot;
  std::vector<RobotId> coalition;  // non-empty only for "r1+r2:" lines
  LocationId location;
  Action action;
  int cargo = 0;
  int placed = 0;
  double battery = 100.0;

  /// Robots that execute this step.
  std::vector<RobotId> actors() const;
  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

struct Plan {
  std::vector<PlanStep> steps;  // grouped by robot in roster order, step-consecutive
  std::vector<RobotId> roster;  // explicit robot prefixes in order of first appearance

  bool empty() const { return steps.empty(); }
  std::size_t size() const { return steps.size(); }
  friend bool operator==(const Plan&, const Plan&) = default;
};

struct LineError {
  std::size_t line = 0;
  int step = 0;  // step index when the line got that far, otherwise 0
  std::string reason;
};

struct PlanParse {
  Plan plan;
  std::vector<LineError> errors;
};

/// Throws SchemaError on the first malformed line.
Plan parse_plan(const std::string& text);
/// Collects every line error instead of throwing; `plan` holds the good lines.
PlanParse parse_plan_lenient(const std::string& text);

std::string serialize_step(const PlanStep& s);
std::string serialize_plan(const Plan& p);

/// Per step: action name and location. `full_fields` appends cargo, placed, battery.
std::vector<std::string> tokenize_plan(const Plan& p, bool full_fields = false);

/// Canonical location spelling: "(x,y)" for cells, upper case otherwise.
LocationId normalize_location(std::string_view text);
std::string format_number(double v);

/// Re-groups steps by robot and renumbers each group from 1.
void renumber(Plan& p);

}  // namespace robosched
