#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "robosched/errors.hpp"
#include "robosched/plan.hpp"
#include "robosched/scenario.hpp"

namespace robosched {

enum class ExecFault {
  NoEdge,            // MOVE_<X> where X is not adjacent
  OffGrid,           // grid move past the border
  Blocked,           // grid move into a blocked cell
  NotAGrid,          // MOVE_<Dir> on a named graph
  UnknownLocation,   // target not in the site
  NoPath,            // NAVIGATE target unreachable
  ChargeAwayFromCharger,
  PickAwayFromStock,
  UnknownRobot,
};

std::string fault_name(ExecFault f);

struct RobotState {
  RobotId id;
  LocationId location;
  double battery = 0.0;
  int cargo = 0;
  double clock = 0.0;
  friend bool operator==(const RobotState&, const RobotState&) = default;
};

struct WorldState {
  std::vector<RobotState> robots;  // scenario roster order
  int placed = 0;
  std::set<LocationId> scanned;
  std::set<LocationId> discovered;
  std::map<LocationId, int> stock;
  double elapsed = 0.0;  // max robot clock

  RobotState* find(const RobotId& id);
  const RobotState* find(const RobotId& id) const;
  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct StepRecord {
  std::size_t plan_index = 0;
  PlanStep step;
  RobotId robot;                 // resolved acting robot
  LocationId from;               // location before the step
  std::vector<LocationId> path;  // locations entered, excluding `from`
  double du = 0.0;
  double tu = 0.0;
  double start = 0.0;
  double end = 0.0;
  int moved = 0;        // MU picked or placed
  double topup = 0.0;   // battery restored by CHARGE
  WorldState after;
};

struct ExecFailure {
  std::size_t plan_index = 0;
  int step = 0;
  RobotId robot;
  ExecFault kind = ExecFault::NoEdge;
  std::string message;
};

struct Trace {
  WorldState initial;
  std::vector<StepRecord> records;  // execution order
  WorldState final_state;
  std::optional<ExecFailure> fault;

  bool complete() const { return !fault.has_value(); }
  std::size_t size() const { return records.size(); }
};

class ExecError : public Error {
 public:
  ExecError(ExecFailure f, Trace partial);
  const ExecFailure& failure() const { return failure_; }
  int step() const { return failure_.step; }
  ExecFault kind() const { return failure_.kind; }
  const Trace& partial() const { return partial_; }

 private:
  ExecFailure failure_;
  Trace partial_;
};

/// Step-at-a-time simulation with copyable state (used by the repair search).
class Simulator {
 public:
  explicit Simulator(const Scenario& s);

  const WorldState& state() const { return state_; }
  const Scenario& scenario() const { return *scenario_; }

  /// Resolves the acting robot id; empty when it cannot be resolved.
  RobotId resolve_robot(const PlanStep& step) const;

  /// Applies one step. On failure the state is unchanged and `fault` is set.
  std::optional<StepRecord> apply(const PlanStep& step, std::size_t plan_index, ExecFailure* fault = nullptr);

 private:
  const Scenario* scenario_;
  WorldState state_;
};

WorldState initial_state(const Scenario& s);

/// Never throws on faults: the returned Trace stops at the faulting step.
Trace simulate(const Scenario& s, const Plan& p);
/// Throws ExecError carrying the partial Trace.
Trace execute(const Scenario& s, const Plan& p);

double makespan(const Trace& t);

struct CoverageResult {
  bool complete = true;
  std::vector<LocationId> missing;  // all_locations order
};

CoverageResult coverage_complete(const Scenario& s, const Trace& t);

}  // namespace robosched
