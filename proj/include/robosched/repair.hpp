#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "robosched/errors.hpp"
#include "robosched/plan.hpp"
#include "robosched/scenario.hpp"
#include "robosched/validator.hpp"

namespace robosched {

enum class EditKind { Insert, Substitute, Transpose, Delete };
std::string edit_kind_name(EditKind k);

/// `source` indexes the plan being edited (1-based; Insert means "before source",
/// source == n+1 appends). `result` indexes the edited plan.
struct EditOp {
  EditKind kind = EditKind::Insert;
  int source = 1;
  int result = 1;
  std::optional<PlanStep> payload;  // Insert / Substitute
  std::optional<Action> replaced;   // Substitute / Delete: the draft action
  std::optional<Action> swapped;    // Transpose: the action moved forward

  std::string describe() const;
  friend bool operator==(const EditOp&, const EditOp&) = default;
};

struct EditProfile {
  int insertions = 0;
  int substitutions = 0;  // deletes are counted here
  int reorders = 0;
  int total() const { return insertions + substitutions + reorders; }
  friend bool operator==(const EditProfile&, const EditProfile&) = default;
};

struct EditScript {
  std::vector<EditOp> ops;
  int cost = 0;
  EditProfile profile;

  /// Result-plan step indices touched by the script, ascending.
  std::vector<int> touched() const;
};

EditProfile profile_of(const std::vector<EditOp>& ops);

/// Minimum-cost restricted Damerau alignment over (robot, action) tokens.
EditScript edit_script(const Plan& from, const Plan& to);

/// Applies ops in source order; state fields are copied from the payloads.
Plan apply_script(const Plan& from, const EditScript& script);

/// Recomputes location/cargo/placed/battery from execution and renumbers steps.
Plan reconcile(const Scenario& s, const Plan& p);

struct JustificationEntry {
  int iteration = 0;
  std::string supervisor;
  std::vector<Violation> violations;
  std::vector<std::pair<std::optional<Violation>, EditOp>> pairs;
  std::string note;
};

struct RepairResult {
  bool feasible = false;
  Plan plan;
  EditScript script;  // draft -> plan
  int iterations_used = 0;
  int repairs = 0;
  ViolationReport report;  // of `plan`
  std::vector<JustificationEntry> log;
};

struct SearchOptions {
  int budget = 4;
  ValidateOptions validate;
};

/// Cost-minimal feasible projection by iterative deepening over edit scripts.
RepairResult minimal_edit_repair(const Scenario& s, const Plan& draft, const SearchOptions& opt = {});

class SupervisorError : public Error {
 public:
  using Error::Error;
};

struct SupervisorOutput {
  Plan plan;
  std::optional<EditScript> script;  // when the supervisor knows its own edits
  std::string note;
};

class Supervisor {
 public:
  virtual ~Supervisor() = default;
  virtual std::string name() const = 0;
  /// Throws on failure; the loop records a failed iteration.
  virtual SupervisorOutput repair(const Scenario& s, const Plan& current, const ViolationReport& report,
                                  int iteration) = 0;
  /// Identical inputs give identical outputs.
  virtual bool deterministic() const { return false; }
};

enum class SearchStyle { Minimal, Conservative };

class SearchSupervisor : public Supervisor {
 public:
  SearchSupervisor(SearchStyle style, SearchOptions opt) : style_(style), opt_(std::move(opt)) {}
  std::string name() const override;
  SupervisorOutput repair(const Scenario& s, const Plan& current, const ViolationReport& report,
                          int iteration) override;
  bool deterministic() const override { return true; }

 private:
  SearchStyle style_;
  SearchOptions opt_;
};

class LlmGateway;
struct LlmProfile;

class LlmSupervisor : public Supervisor {
 public:
  LlmSupervisor(std::shared_ptr<LlmGateway> gateway, std::string profile) : gateway_(std::move(gateway)), profile_(std::move(profile)) {}
  std::string name() const override { return profile_; }
  SupervisorOutput repair(const Scenario& s, const Plan& current, const ViolationReport& report,
                          int iteration) override;

 private:
  std::shared_ptr<LlmGateway> gateway_;
  std::string profile_;
};

struct LoopOptions {
  int max_iters = 3;
  ValidateOptions validate;
};

RepairResult repair_loop(const Scenario& s, const Plan& draft, Supervisor& sup, const LoopOptions& opt = {});

std::string repair_json(const RepairResult& r, int indent = 2);
std::string script_json(const EditScript& s);

}  // namespace robosched
