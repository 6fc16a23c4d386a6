#pragma once

#include <map>
#include <string>
#include <vector>

#include "robosched/plan.hpp"
#include "robosched/scenario.hpp"

namespace robosched {

struct Assignment {
  std::map<TaskId, std::vector<RobotId>> alpha;
  std::map<TaskId, double> theta;  // start TU of the task's first action
  bool empty() const { return alpha.empty(); }
};

struct FcfsResult {
  Assignment assignment;
  Plan plan;
};

/// Throws UnassignableTask when no single robot covers a task's skills.
FcfsResult fcfs_schedule(const Scenario& s);

/// Canonical plan realizing the assignment; throws RealizationError when a
/// start time is earlier than the robot can reach the task.
Plan realize_schedule(const Scenario& s, const Assignment& a);

std::string assignment_json(const Assignment& a, int indent = 2);

}  // namespace robosched
