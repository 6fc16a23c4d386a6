#include "robosched/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "robosched/executor.hpp"
#include "robosched/fcfs.hpp"
#include "robosched/llm_gateway.hpp"

namespace robosched {

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\n") == std::string::npos) return f;
  std::string out = "\"";
  for (char c : f) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string signed_tu(double v) {
  std::string s = format_number(v);
  return v > 0 ? "+" + s : s;
}

std::string profile_text(const EditProfile& p) {
  return "Substitutions = " + std::to_string(p.substitutions) + ", Insertions = " + std::to_string(p.insertions) +
         ", Reorders = " + std::to_string(p.reorders);
}

std::string ops_text(const EditScript& s) {
  std::string out;
  for (const auto& op : s.ops) out += (out.empty() ? "" : "; ") + op.describe();
  return out;
}

std::string policy_text(const EditScript& s) {
  if (s.ops.empty()) return "None";
  std::vector<std::string> parts;
  if (s.profile.insertions) parts.push_back("Insertions = " + std::to_string(s.profile.insertions));
  if (s.profile.substitutions) parts.push_back("Substitutions = " + std::to_string(s.profile.substitutions));
  if (s.profile.reorders) parts.push_back("Reorders = " + std::to_string(s.profile.reorders));
  std::string head;
  for (const auto& p : parts) head += (head.empty() ? "" : ", ") + p;
  return head + " (" + ops_text(s) + ")";
}

EditScript make_script(std::vector<EditOp> ops) {
  EditScript s;
  s.ops = std::move(ops);
  s.cost = static_cast<int>(s.ops.size());
  s.profile = profile_of(s.ops);
  return s;
}

ArmSummary summarize(const Scenario& s, const Plan& p, const ValidateOptions& opt) {
  ArmSummary a;
  a.plan = p;
  Trace t = simulate(s, p);
  ViolationReport rep = validate(s, p, t, opt);
  ViolationReport full = validate(s, p, t, ValidateOptions{});
  a.feasible = rep.feasible;
  a.psi = rep.psi;
  a.battery_violations = static_cast<int>(full.count(CheckClass::Battery));
  a.makespan = makespan(t);
  return a;
}

nlohmann::ordered_json arm_json(const ArmSummary& a) {
  nlohmann::ordered_json j;
  j["feasible"] = a.feasible;
  j["fr"] = a.feasible ? 1.0 : 0.0;
  j["psi"] = a.psi;
  j["battery_violations"] = a.battery_violations;
  j["makespan_tu"] = a.makespan;
  j["steps"] = a.plan.steps.size();
  return j;
}

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

}  // namespace

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void split_policy_edits(const Scenario& s, const Plan& draft, const EditScript& script, const ValidateOptions& opt,
                        EditScript& minimal, EditScript& policy) {
  std::vector<bool> dropped(script.ops.size(), false);
  for (std::size_t k = script.ops.size(); k-- > 0;) {
    dropped[k] = true;
    std::vector<EditOp> kept;
    for (std::size_t i = 0; i < script.ops.size(); ++i)
      if (!dropped[i]) kept.push_back(script.ops[i]);
    Plan p = reconcile(s, apply_script(draft, make_script(kept)));
    if (!validate(s, p, opt).feasible) dropped[k] = false;
  }
  std::vector<EditOp> min_ops, pol_ops;
  for (std::size_t i = 0; i < script.ops.size(); ++i) (dropped[i] ? pol_ops : min_ops).push_back(script.ops[i]);
  minimal = make_script(min_ops);
  policy = make_script(pol_ops);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!std::filesystem::exists(cfg.scenario_path)) throw ConfigError("scenario not found: " + cfg.scenario_path);
  if (cfg.supervisors.empty()) throw ConfigError("no supervisor given");
  Scenario s = load_scenario(cfg.scenario_path);

  std::shared_ptr<LlmGateway> gateway;
  auto need_gateway = [&]() {
    if (gateway) return;
    if (cfg.profiles_path.empty()) throw ConfigError("LLM supervisors need --profiles");
    gateway = std::make_shared<LlmGateway>(load_profiles(cfg.profiles_path), cfg.manifest_path);
  };
  for (const auto& sup : cfg.supervisors)
    if (sup.rfind("llm:", 0) == 0) need_gateway();

  Plan draft;
  if (!cfg.draft_path.empty()) {
    draft = parse_plan(read_text(cfg.draft_path));
  } else if (cfg.generator.rfind("llm:", 0) == 0) {
    need_gateway();
    const LlmProfile& p = gateway->profile(cfg.generator.substr(4));
    std::string prompt = build_generator_prompt(canonical_context(s));
    draft = parse_plan(strip_preamble(gateway->complete(p, prompt, s.name, 0)));
  } else {
    throw ConfigError("experiment needs --draft or --generator llm:<profile>");
  }

  ExperimentResult res;
  res.scenario = s.name;
  res.grid = s.site.kind == SiteKind::Grid;

  auto generator_arm = [&]() { return summarize(s, draft, cfg.checks); };
  auto hybrid_arm = [&]() {
    std::vector<HybridRow> rows;
    for (const auto& spec : cfg.supervisors) {
      HybridRow row;
      row.supervisor = spec;
      std::unique_ptr<Supervisor> sup;
      SearchOptions so{cfg.budget, cfg.checks};
      if (spec == "search-minimal") {
        sup = std::make_unique<SearchSupervisor>(SearchStyle::Minimal, so);
        row.label = spec;
        row.strategy = "Surgical minimal-edit";
      } else if (spec == "search-conservative") {
        sup = std::make_unique<SearchSupervisor>(SearchStyle::Conservative, so);
        row.label = spec;
        row.strategy = "Minimal + conservative tail";
      } else if (spec.rfind("llm:", 0) == 0) {
        const LlmProfile& p = gateway->profile(spec.substr(4));
        sup = std::make_unique<LlmSupervisor>(gateway, p.name);
        row.label = p.label;
        row.strategy = p.strategy;
      } else {
        throw ConfigError("unknown supervisor '" + spec + "'");
      }
      row.result = repair_loop(s, draft, *sup, LoopOptions{cfg.max_iters, cfg.checks});
      row.eval = eval_run(s, draft, row.result, cfg.metrics);
      split_policy_edits(s, draft, row.eval.script, cfg.checks, row.minimal, row.policy);
      rows.push_back(std::move(row));
    }
    return rows;
  };
  auto fcfs_arm = [&]() {
    std::pair<ArmSummary, std::string> out;
    try {
      out.first = summarize(s, fcfs_schedule(s).plan, cfg.checks);
    } catch (const UnassignableTask& e) {
      out.second = e.what();
    }
    return out;
  };

  std::pair<ArmSummary, std::string> fcfs_out;
  if (cfg.parallel_arms) {
    auto g = std::async(std::launch::async, generator_arm);
    auto h = std::async(std::launch::async, hybrid_arm);
    auto f = std::async(std::launch::async, fcfs_arm);
    res.generator_only = g.get();
    res.hybrid = h.get();
    fcfs_out = f.get();
  } else {
    res.generator_only = generator_arm();
    res.hybrid = hybrid_arm();
    fcfs_out = fcfs_arm();
  }
  res.fcfs = fcfs_out.first;
  res.fcfs_error = fcfs_out.second;

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::filesystem::path dir(cfg.out_dir);
    auto sim = dir / (s.name + "_similarity.csv");
    auto edits = dir / (s.name + "_edit_profile.csv");
    auto summary = dir / (s.name + "_summary.json");
    write_text(sim, similarity_csv(res));
    write_text(edits, edit_profile_csv(res));
    write_text(summary, summary_json(res, cfg));
    res.files = {sim.string(), edits.string(), summary.string()};
  }
  return res;
}

std::string similarity_csv(const ExperimentResult& r) {
  std::string out = r.grid ? "Supervisor,BLEU,R-1,R-2,R-L,METEOR\n" : "Supervisor,BLEU,ROUGE-1,ROUGE-L,METEOR\n";
  for (const auto& row : r.hybrid) {
    const auto& sc = row.eval.scores;
    out += csv_field(row.label) + "," + fixed4(sc.bleu) + "," + fixed4(sc.rouge1) + ",";
    if (r.grid) out += (sc.rouge2 ? fixed4(*sc.rouge2) : std::string("--")) + ",";
    out += fixed4(sc.rougeL) + "," + fixed4(sc.meteor) + "\n";
  }
  return out;
}

std::string edit_profile_csv(const ExperimentResult& r) {
  std::string out =
      "Supervisor,Minimal Edits,Edited Steps (minimal),Additional/Policy Edits,Delta Makespan (TU),FR,Strategy\n";
  for (const auto& row : r.hybrid) {
    out += csv_field(row.label) + "," + csv_field(profile_text(row.minimal.profile)) + "," +
           csv_field(row.minimal.ops.empty() ? "None" : ops_text(row.minimal)) + "," + csv_field(policy_text(row.policy)) +
           "," + signed_tu(row.eval.makespan_delta) + "," + (row.result.feasible ? "1.0" : "0.0") + "," +
           csv_field(row.strategy) + "\n";
  }
  return out;
}

std::string summary_json(const ExperimentResult& r, const ExperimentConfig& cfg) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["scenario"] = r.scenario;
  ordered_json c;
  c["max_iters"] = cfg.max_iters;
  c["budget"] = cfg.budget;
  ordered_json checks = ordered_json::array();
  for (auto k : cfg.checks.checks) checks.push_back(check_name(k));
  c["checks"] = checks;
  c["supervisors"] = cfg.supervisors;
  c["seed"] = cfg.seed;
  j["config"] = c;
  ordered_json arms;
  arms["generator_only"] = arm_json(r.generator_only);
  ordered_json hyb = ordered_json::array();
  std::vector<EvalReport> evals;
  for (const auto& row : r.hybrid) {
    ordered_json h;
    h["supervisor"] = row.supervisor;
    h["label"] = row.label;
    h["feasible"] = row.result.feasible;
    h["fr"] = row.result.feasible ? 1.0 : 0.0;
    h["t_rep"] = row.result.iterations_used;
    h["makespan_tu"] = row.eval.makespan;
    h["makespan_delta_tu"] = row.eval.makespan_delta;
    h["draft_battery_violations"] = row.eval.draft_battery_violations;
    h["battery_violations"] = row.eval.battery_violations;
    h["edits"] = {{"cost", row.eval.script.cost},
                  {"insertions", row.eval.script.profile.insertions},
                  {"substitutions", row.eval.script.profile.substitutions},
                  {"reorders", row.eval.script.profile.reorders},
                  {"minimal", row.minimal.cost},
                  {"policy", row.policy.cost}};
    const auto& sc = row.eval.scores;
    h["scores"] = {{"bleu", round4(sc.bleu)},
                   {"rouge1", round4(sc.rouge1)},
                   {"rouge2", sc.rouge2 ? ordered_json(round4(*sc.rouge2)) : ordered_json(nullptr)},
                   {"rougeL", round4(sc.rougeL)},
                   {"meteor", round4(sc.meteor)}};
    ordered_json plan = ordered_json::array();
    for (const auto& st : row.result.plan.steps) plan.push_back(serialize_step(st));
    h["plan"] = plan;
    hyb.push_back(h);
    evals.push_back(row.eval);
  }
  BatchReport b = aggregate(evals);
  arms["hybrid"] = {{"fr", round4(b.fr)}, {"fpr", round4(b.fpr)}, {"mean_edits", round4(b.mean_edits)},
                    {"mean_t_rep", round4(b.mean_t_rep)}, {"runs", hyb}};
  arms["fcfs"] = arm_json(r.fcfs);
  if (!r.fcfs_error.empty()) arms["fcfs"]["error"] = r.fcfs_error;
  j["arms"] = arms;
  return j.dump(2) + "\n";
}

}  // namespace robosched
