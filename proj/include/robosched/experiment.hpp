#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robosched/metrics.hpp"
#include "robosched/validator.hpp"

namespace robosched {

struct ExperimentConfig {
  std::string scenario_path;
  std::vector<std::string> supervisors{"search-minimal"};  // search-minimal | search-conservative | llm:<profile>
  std::string draft_path;      // plan fixture used as the generator draft
  std::string generator;       // llm:<profile>, used when draft_path is empty
  std::string profiles_path;   // llm_profiles.json
  std::string manifest_path;   // mock manifest
  int max_iters = 3;
  int budget = 4;
  ValidateOptions checks;
  MetricOptions metrics;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool parallel_arms = false;
};

struct HybridRow {
  std::string supervisor;  // spec as given
  std::string label;
  std::string strategy;
  RepairResult result;
  EvalReport eval;
  EditScript minimal;  // edits required for feasibility
  EditScript policy;   // edits that could be reverted without losing feasibility
};

struct ArmSummary {
  bool feasible = false;
  int psi = 0;
  int battery_violations = 0;
  double makespan = 0.0;
  Plan plan;
};

struct ExperimentResult {
  std::string scenario;
  bool grid = false;
  ArmSummary generator_only;
  std::vector<HybridRow> hybrid;
  ArmSummary fcfs;
  std::string fcfs_error;
  std::vector<std::string> files;  // written outputs
};

/// Splits a supervisor's edits into minimal and policy parts.
void split_policy_edits(const Scenario& s, const Plan& draft, const EditScript& script, const ValidateOptions& opt,
                        EditScript& minimal, EditScript& policy);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string similarity_csv(const ExperimentResult& r);
std::string edit_profile_csv(const ExperimentResult& r);
std::string summary_json(const ExperimentResult& r, const ExperimentConfig& cfg);

/// Fixed four-decimal formatting used by every report.
std::string fixed4(double v);

}  // namespace robosched
