#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "robosched/executor.hpp"
#include "robosched/experiment.hpp"
#include "robosched/fcfs.hpp"
#include "robosched/llm_gateway.hpp"
#include "robosched/metrics.hpp"
#include "robosched/repair.hpp"
#include "robosched/validator.hpp"

using namespace robosched;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInternal = 2;
constexpr int kExitInfeasible = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

ValidateOptions validate_options(const std::string& checks, bool coverage_separate) {
  ValidateOptions o;
  o.checks = parse_checks(checks);
  o.coverage_separate = coverage_separate;
  return o;
}

Smoothing parse_smoothing(const std::string& s) {
  if (s == "none") return Smoothing::None;
  if (s == "add-one") return Smoothing::AddOne;
  throw ConfigError("unknown smoothing '" + s + "'");
}

std::string state_line(const StepRecord& r) {
  const RobotState* rs = r.after.find(r.robot);
  nlohmann::ordered_json j;
  j["step"] = r.step.step;
  j["robot"] = r.robot;
  j["action"] = r.step.action.name();
  j["location"] = rs->location;
  j["cargo"] = rs->cargo;
  j["placed"] = r.after.placed;
  j["battery"] = rs->battery;
  j["du"] = r.du;
  j["tu"] = r.tu;
  j["start"] = r.start;
  j["end"] = r.end;
  j["scanned"] = r.after.scanned.size();
  j["discovered"] = r.after.discovered.size();
  return j.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robosched: validate, repair, simulate and score robot task schedules"};
  app.require_subcommand(1);

  std::string scenario_path, plan_path, plan2_path, checks = "all", supervisor = "search-minimal";
  std::string profiles_path, manifest_path, out_dir = "out", smoothing = "none", draft_path, generator;
  int max_iters = 3, budget = 4;
  bool coverage_separate = false, full_tokens = false, parallel_arms = false;
  std::uint64_t seed = 0;

  auto* v = app.add_subcommand("validate", "Validate a plan; exit 0 iff feasible");
  v->add_option("scenario", scenario_path, "Scenario file")->required();
  v->add_option("plan", plan_path, "Plan text file")->required();
  v->add_option("--checks", checks, "Comma list of check classes, or all");
  v->add_flag("--coverage-separate", coverage_separate, "Count coverage apart from safety in psi");

  auto* r = app.add_subcommand("repair", "Run the validate/repair loop");
  r->add_option("scenario", scenario_path, "Scenario file")->required();
  r->add_option("plan", plan_path, "Draft plan file")->required();
  r->add_option("--supervisor", supervisor, "search-minimal | search-conservative | llm:<profile>");
  r->add_option("--max-iters", max_iters, "Repair iteration cap")->check(CLI::PositiveNumber);
  r->add_option("--budget", budget, "Edit budget of the search supervisor")->check(CLI::NonNegativeNumber);
  r->add_option("--checks", checks, "Comma list of check classes, or all");
  r->add_flag("--coverage-separate", coverage_separate, "Count coverage apart from safety in psi");
  r->add_option("--profiles", profiles_path, "llm_profiles.json");
  r->add_option("--manifest", manifest_path, "Mock manifest");

  auto* sim = app.add_subcommand("simulate", "Execute a plan and print its trace as JSON lines");
  sim->add_option("scenario", scenario_path, "Scenario file")->required();
  sim->add_option("plan", plan_path, "Plan text file")->required();

  auto* f = app.add_subcommand("fcfs", "Schedule with the FCFS baseline");
  f->add_option("scenario", scenario_path, "Scenario file")->required();

  auto* m = app.add_subcommand("metrics", "Similarity between a draft and a corrected plan");
  m->add_option("draft", plan_path, "Draft plan file")->required();
  m->add_option("corrected", plan2_path, "Corrected plan file")->required();
  m->add_option("--smoothing", smoothing, "BLEU smoothing: none | add-one");
  m->add_flag("--full-tokens", full_tokens, "Include cargo, placed and battery tokens");

  auto* e = app.add_subcommand("experiment", "Run generator-only, hybrid and FCFS arms");
  e->add_option("scenario", scenario_path, "Scenario file")->required();
  e->add_option("--draft", draft_path, "Draft plan fixture");
  e->add_option("--generator", generator, "llm:<profile> used when no draft is given");
  e->add_option("--supervisor", supervisor, "Comma list of supervisors");
  e->add_option("--max-iters", max_iters, "Repair iteration cap")->check(CLI::PositiveNumber);
  e->add_option("--budget", budget, "Edit budget of the search supervisor")->check(CLI::NonNegativeNumber);
  e->add_option("--checks", checks, "Comma list of check classes, or all");
  e->add_flag("--coverage-separate", coverage_separate, "Count coverage apart from safety in psi");
  e->add_option("--profiles", profiles_path, "llm_profiles.json");
  e->add_option("--manifest", manifest_path, "Mock manifest");
  e->add_option("--out-dir", out_dir, "Output directory");
  e->add_option("--smoothing", smoothing, "BLEU smoothing: none | add-one");
  e->add_flag("--full-tokens", full_tokens, "Include cargo, placed and battery tokens");
  e->add_flag("--parallel-arms", parallel_arms, "Run the three arms concurrently");
  e->add_option("--seed", seed, "Seed recorded in the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int code = app.exit(err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*v) {
      Scenario s = load_scenario(scenario_path);
      ViolationReport rep = validate_text(s, read_file(plan_path), validate_options(checks, coverage_separate));
      std::cout << report_json(rep);
      return rep.feasible ? kExitOk : kExitInfeasible;
    }
    if (*r) {
      Scenario s = load_scenario(scenario_path);
      Plan draft = parse_plan(read_file(plan_path));
      ValidateOptions vo = validate_options(checks, coverage_separate);
      std::unique_ptr<Supervisor> sup;
      if (supervisor == "search-minimal" || supervisor == "search-conservative") {
        SearchStyle style = supervisor == "search-minimal" ? SearchStyle::Minimal : SearchStyle::Conservative;
        sup = std::make_unique<SearchSupervisor>(style, SearchOptions{budget, vo});
      } else if (supervisor.rfind("llm:", 0) == 0) {
        if (profiles_path.empty()) throw ConfigError("llm supervisors need --profiles");
        auto gw = std::make_shared<LlmGateway>(load_profiles(profiles_path), manifest_path);
        gw->profile(supervisor.substr(4));
        sup = std::make_unique<LlmSupervisor>(gw, supervisor.substr(4));
      } else {
        throw ConfigError("unknown supervisor '" + supervisor + "'");
      }
      RepairResult res = repair_loop(s, draft, *sup, LoopOptions{max_iters, vo});
      std::cout << repair_json(res);
      return kExitOk;
    }
    if (*sim) {
      Scenario s = load_scenario(scenario_path);
      Plan p = parse_plan(read_file(plan_path));
      Trace t = simulate(s, p);
      for (const auto& rec : t.records) std::cout << state_line(rec) << "\n";
      auto cov = coverage_complete(s, t);
      nlohmann::ordered_json sum;
      sum["summary"] = true;
      sum["steps"] = t.records.size();
      sum["complete"] = t.complete();
      sum["fault"] = t.fault ? nlohmann::ordered_json(fault_name(t.fault->kind) + " at step " +
                                                      std::to_string(t.fault->step) + ": " + t.fault->message)
                             : nlohmann::ordered_json(nullptr);
      sum["makespan_tu"] = makespan(t);
      sum["placed"] = t.final_state.placed;
      sum["coverage_complete"] = cov.complete;
      sum["missing"] = cov.missing;
      std::cout << sum.dump() << "\n";
      return kExitOk;
    }
    if (*f) {
      Scenario s = load_scenario(scenario_path);
      FcfsResult res = fcfs_schedule(s);
      std::cout << serialize_plan(res.plan) << "\n" << assignment_json(res.assignment);
      return kExitOk;
    }
    if (*m) {
      MetricOptions mo{parse_smoothing(smoothing), full_tokens};
      Plan a = parse_plan(read_file(plan_path));
      Plan b = parse_plan(read_file(plan2_path));
      std::cout << scores_json(similarity(a, b, mo));
      return kExitOk;
    }
    if (*e) {
      ExperimentConfig cfg;
      cfg.scenario_path = scenario_path;
      cfg.supervisors = split_list(supervisor);
      cfg.draft_path = draft_path;
      cfg.generator = generator;
      cfg.profiles_path = profiles_path;
      cfg.manifest_path = manifest_path;
      cfg.max_iters = max_iters;
      cfg.budget = budget;
      cfg.checks = validate_options(checks, coverage_separate);
      cfg.metrics = MetricOptions{parse_smoothing(smoothing), full_tokens};
      cfg.out_dir = out_dir;
      cfg.seed = seed;
      cfg.parallel_arms = parallel_arms;
      ExperimentResult res = run_experiment(cfg);
      for (const auto& file : res.files) std::cout << file << "\n";
      return kExitOk;
    }
  } catch (const ExecError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
