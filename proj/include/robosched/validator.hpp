#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "robosched/executor.hpp"
#include "robosched/plan.hpp"
#include "robosched/scenario.hpp"

namespace robosched {

enum class CheckClass { Precedence, Capability, Capacity, Battery, Safety, Schema, Coverage };
using CheckSet = std::set<CheckClass>;

CheckSet all_checks();
std::string check_name(CheckClass c);
std::optional<CheckClass> parse_check(std::string_view text);
/// Comma list such as "battery,coverage"; "all" selects every class. Throws ConfigError.
CheckSet parse_checks(std::string_view text);

enum class HintKind { InsertBefore, InsertAfter, Substitute, SwapAdjacent, ReassignRobot };
std::string hint_name(HintKind k);

struct FixHint {
  HintKind kind = HintKind::Substitute;
  int anchor_step = 1;  // 1-based plan position
  std::optional<Action> suggested_action;
};

struct Violation {
  CheckClass cls = CheckClass::Schema;
  std::optional<int> step;  // 1-based plan position
  RobotId robot;
  std::string detail;
  std::map<std::string, std::string> payload;
  FixHint hint;
};

struct ViolationReport {
  std::vector<Violation> violations;
  int psi = 0;
  bool feasible = true;
  bool completed = true;  // execution reached the end of the plan
  CheckSet checks_run;
  bool coverage_separate = false;

  /// Violated class indicators as counted by psi.
  std::set<CheckClass> violated_classes() const;
  std::size_t count(CheckClass c) const;
};

struct ValidateOptions {
  CheckSet checks = all_checks();
  bool coverage_separate = false;  // count Coverage apart from Safety in psi
};

ViolationReport validate(const Scenario& s, const Plan& p, const ValidateOptions& opt = {});
ViolationReport validate(const Scenario& s, const Plan& p, const Trace& t, const ValidateOptions& opt);
ViolationReport validate_text(const Scenario& s, const std::string& text, const ValidateOptions& opt = {});

/// Check class an execution fault belongs to.
CheckClass fault_class(ExecFault f);

/// Violations that no later edit can undo: negative battery, no-go entry, missing skill.
bool step_locally_ok(const Scenario& s, const StepRecord& r, const CheckSet& checks);

std::string report_json(const ViolationReport& r, int indent = 2);

}  // namespace robosched
