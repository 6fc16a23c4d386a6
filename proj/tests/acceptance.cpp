#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "metric_goldens.hpp"
#include "oracles.hpp"
#include "random_scenarios.hpp"
#include "robosched/errors.hpp"
#include "robosched/executor.hpp"
#include "robosched/experiment.hpp"
#include "robosched/fcfs.hpp"
#include "robosched/llm_gateway.hpp"
#include "robosched/metrics.hpp"
#include "robosched/repair.hpp"
#include "robosched/validator.hpp"
#include "support.hpp"

using namespace robosched;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed << v;
  return os.str();
}

std::string capture(const std::string& args, int* code) {
  std::string cmd = std::string("'") + RS_CLI + "' " + args + " 2>&1";
  std::string out;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) {
    *code = -1;
    return out;
  }
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  int status = pclose(f);
  *code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

Tokens chars(const char* s) {
  Tokens t;
  for (; *s; ++s) t.push_back(std::string(1, *s));
  return t;
}

Outcome criterion1() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  Scenario s = testing::wall();
  Plan draft = testing::fixture("exp1", "draft");
  ViolationReport before = validate(s, draft);
  o.require(!before.feasible, "draft validates infeasible");
  o.require(before.count(CheckClass::Battery) >= 1, "draft has a battery violation");
  SearchSupervisor sup(SearchStyle::Minimal, {});
  RepairResult r = repair_loop(s, draft, sup);
  double secs = seconds_since(t0);
  o.require(r.feasible && r.report.psi == 0, "repair is feasible with psi 0");
  o.require(r.script.cost == 2, "edit cost 2");
  o.require(r.script.profile == EditProfile{0, 2, 0}, "2 substitutions, 0 insertions, 0 reorders");
  o.require(r.iterations_used == 1, "T_rep = 1");
  o.require(secs < 5.0, "runtime < 5 s");
  std::string ops;
  for (const auto& op : r.script.ops) ops += (ops.empty() ? "" : "; ") + op.describe();
  o.note("battery violations " + std::to_string(before.count(CheckClass::Battery)) + ", edits [" + ops +
         "], T_rep " + std::to_string(r.iterations_used) + ", " + num(secs) + " s");
  return o;
}

Outcome criterion2() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  Scenario s = testing::grid();
  Plan draft = testing::fixture("exp2", "draft");
  ViolationReport before = validate(s, draft);
  bool gap = false;
  for (const auto& v : before.violations)
    if (v.cls == CheckClass::Coverage && v.payload.count("missing") && v.payload.at("missing") == "(2,0)") gap = true;
  o.require(!before.feasible && gap, "draft has a coverage violation at (2,0)");
  SearchSupervisor sup(SearchStyle::Minimal, {});
  RepairResult r = repair_loop(s, draft, sup);
  double secs = seconds_since(t0);
  o.require(r.feasible, "repair is feasible");
  o.require(r.script.profile == EditProfile{1, 0, 0} && r.script.ops.size() == 1 &&
                r.script.ops[0].payload && r.script.ops[0].payload->action.kind == ActionKind::Scan,
            "exactly one SCAN insertion");
  double delta = makespan(simulate(s, r.plan)) - makespan(simulate(s, draft));
  o.require(std::fabs(delta - 1.0) <= 0.5, "delta makespan about +1 TU");
  o.require(secs < 5.0, "runtime < 5 s");
  o.note((r.script.ops.empty() ? std::string("no edit") : r.script.ops[0].describe()) + ", delta makespan " +
         num(delta) + " TU, " + num(secs) + " s");
  return o;
}

Outcome criterion3() {
  Outcome o;
  struct Case {
    Scenario s;
    Plan draft;
    const char* name;
  };
  std::vector<Case> cases{{testing::wall(), testing::fixture("exp1", "draft"), "exp1"},
                          {testing::grid(), testing::fixture("exp2", "draft"), "exp2"}};
  for (auto& c : cases) {
    RepairResult r = minimal_edit_repair(c.s, c.draft);
    o.require(r.feasible, std::string(c.name) + " search finds a repair");
    auto t0 = std::chrono::steady_clock::now();
    testing::MinimalityResult m = testing::brute_force_below(c.s, c.draft, r.script.cost - 1, {});
    double secs = seconds_since(t0);
    o.require(!m.any_feasible, std::string(c.name) + " no feasible plan below cost " + std::to_string(r.script.cost));
    o.require(secs < 60.0, std::string(c.name) + " enumeration < 60 s");
    o.note(std::string(c.name) + ": cost " + std::to_string(r.script.cost) + ", " + std::to_string(m.plans_checked) +
           " plans below it checked in " + num(secs) + " s");
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  Scenario wall = testing::wall(), grid = testing::grid();
  Plan d1 = testing::fixture("exp1", "draft"), d2 = testing::fixture("exp2", "draft");
  ValidateOptions schema;
  schema.checks = {CheckClass::Schema};
  o.require(validate(wall, d1, schema).psi == 0 && !validate(wall, d1).feasible, "exp1 schema-only psi 0, full fails");
  o.require(validate(grid, d2, schema).psi == 0 && !validate(grid, d2).feasible, "exp2 schema-only psi 0, full fails");

  SearchOptions battery;
  battery.validate.checks = {CheckClass::Battery};
  RepairResult rb = minimal_edit_repair(wall, d1, battery);
  Trace tb = simulate(wall, rb.plan);
  bool nonneg = tb.complete();
  for (const auto& rec : tb.records)
    for (const auto& rs : rec.after.robots) nonneg = nonneg && rs.battery >= 0.0;
  double db = makespan(tb) - makespan(simulate(wall, d1));
  o.require(rb.feasible && nonneg, "battery-only repair leaves no negative battery");
  o.require(rb.script.cost <= 2, "battery-only repair uses <= 2 edits");
  o.require(db <= 2.0, "battery-only delta makespan <= 2 TU");

  SearchOptions coverage;
  coverage.validate.checks = {CheckClass::Coverage};
  RepairResult rc = minimal_edit_repair(grid, d2, coverage);
  Trace tc = simulate(grid, rc.plan);
  double dc = makespan(tc) - makespan(simulate(grid, d2));
  bool one_scan = rc.script.ops.size() == 1 && rc.script.ops[0].kind == EditKind::Insert &&
                  rc.script.ops[0].payload->action.kind == ActionKind::Scan;
  o.require(rc.feasible && coverage_complete(grid, tc).complete, "coverage-only repair closes the gap");
  o.require(one_scan, "coverage-only repair is one SCAN");
  o.require(dc <= 4.0, "coverage-only delta makespan <= 4 TU");
  o.note("battery-only: " + std::to_string(rb.script.cost) + " edits, delta " + num(db) + " TU; coverage-only: " +
         std::to_string(rc.script.cost) + " edit, delta " + num(dc) + " TU");
  return o;
}

Outcome criterion5() {
  Outcome o;
  struct Ref {
    const char* name;
    double bleu, r1, r2, rl, meteor;
  };
  const Ref t1[] = {{"gemma", 0.9407, 0.9444, NAN, 0.9444, 0.9655},
                    {"llama", 0.8750, 0.9230, NAN, 0.9230, 0.9140},
                    {"mistral", 0.8235, 0.8824, NAN, 0.8235, 0.8529}};
  const Ref t2[] = {{"gemma", 0.447, 0.625, NAN, 0.625, 0.672},
                    {"llama", 0.742, 0.933, 0.923, 0.933, 0.984},
                    {"mistral", 0.339, 0.7778, 0.625, 0.7778, 0.934}};
  std::map<std::string, SimilarityScores> e1, e2;
  int near = 0, cells = 0;
  auto proximity = [&](const Ref& ref, const SimilarityScores& s) {
    const double got[] = {s.bleu, s.rouge1, s.rouge2.value_or(NAN), s.rougeL, s.meteor};
    const double want[] = {ref.bleu, ref.r1, ref.r2, ref.rl, ref.meteor};
    for (int k = 0; k < 5; ++k) {
      if (std::isnan(want[k]) || std::isnan(got[k])) continue;
      ++cells;
      near += std::fabs(got[k] - want[k]) <= 0.05;
    }
  };
  for (const auto& r : t1) {
    e1[r.name] = similarity(testing::fixture("exp1", "draft"), testing::fixture("exp1", r.name));
    proximity(r, e1[r.name]);
  }
  for (const auto& r : t2) {
    e2[r.name] = similarity(testing::fixture("exp2", "draft"), testing::fixture("exp2", r.name));
    proximity(r, e2[r.name]);
  }
  o.require(e2["llama"].bleu > e2["gemma"].bleu && e2["gemma"].bleu > e2["mistral"].bleu,
            "exp2 BLEU LLaMA > Gemma > Mistral");
  o.require(e2["llama"].meteor > e2["gemma"].meteor && e2["llama"].meteor > e2["mistral"].meteor,
            "exp2 METEOR maximal for LLaMA");
  for (const auto& [name, s] : e1) {
    o.require(s.bleu >= 0.80, "exp1 " + name + " BLEU >= 0.80");
    o.require(s.rouge1 >= 0.85, "exp1 " + name + " ROUGE-1 >= 0.85");
  }
  auto row = [&](const std::string& tag, std::map<std::string, SimilarityScores>& m) {
    std::string out = tag + " BLEU";
    for (const char* n : {"gemma", "llama", "mistral"}) out += " " + std::string(n) + "=" + num(m[n].bleu);
    out += "; METEOR";
    for (const char* n : {"gemma", "llama", "mistral"}) out += " " + std::string(n) + "=" + num(m[n].meteor);
    return out;
  };
  o.note(row("exp1", e1));
  o.note(row("exp2", e2));
  o.note("non-blocking: " + std::to_string(near) + "/" + std::to_string(cells) +
         " reference scores within 0.05 (Gemma exp1 BLEU " + num(e1["gemma"].bleu) + " vs 0.9407, LLaMA exp2 METEOR " +
         num(e2["llama"].meteor) + " vs 0.984)");
  return o;
}

Outcome criterion6() {
  Outcome o;
  std::map<std::string, int> per_family;
  for (const auto& g : testing::metric_goldens()) {
    Tokens c = chars(g.candidate), r = chars(g.reference);
    std::string m = g.metric;
    std::optional<double> got;
    if (m == "bleu") got = bleu(c, r);
    if (m == "bleu+1") got = bleu(c, r, Smoothing::AddOne);
    if (m == "rouge1") got = rouge(c, r, RougeVariant::R1);
    if (m == "rouge2") got = rouge(c, r, RougeVariant::R2);
    if (m == "rougeL") got = rouge(c, r, RougeVariant::RL);
    if (m == "meteor") got = meteor(c, r);
    bool ok = g.defined ? (got && std::fabs(*got - g.expected) < 1e-9) : !got;
    o.require(ok, m + "(" + g.candidate + ", " + g.reference + ")");
    per_family[m.substr(0, 4)]++;
  }
  for (const char* f : {"bleu", "roug", "mete"}) o.require(per_family[f] >= 5, std::string(f) + " has >= 5 goldens");

  std::mt19937 rng(99);
  int out_of_range = 0, identity_fail = 0;
  for (int k = 0; k < 10000; ++k) {
    Tokens c(1 + rng() % 12), r(1 + rng() % 12);
    for (auto& t : c) t = std::string(1, static_cast<char>('a' + rng() % 5));
    for (auto& t : r) t = std::string(1, static_cast<char>('a' + rng() % 5));
    std::vector<double> vals{bleu(c, r), bleu(c, r, Smoothing::AddOne), *rouge(c, r, RougeVariant::R1),
                             *rouge(c, r, RougeVariant::RL), meteor(c, r)};
    if (auto r2 = rouge(c, r, RougeVariant::R2)) vals.push_back(*r2);
    for (double v : vals) out_of_range += !(v >= 0.0 && v <= 1.0);
    double m = static_cast<double>(r.size());
    bool id = std::fabs(bleu(r, r) - 1.0) < 1e-12 && std::fabs(*rouge(r, r, RougeVariant::R1) - 1.0) < 1e-12 &&
              std::fabs(*rouge(r, r, RougeVariant::RL) - 1.0) < 1e-12 &&
              (r.size() < 2 || std::fabs(*rouge(r, r, RougeVariant::R2) - 1.0) < 1e-12) &&
              meteor(r, r) >= 1.0 - 0.5 / (m * m * m) - 1e-12;
    identity_fail += !id;
  }
  o.require(out_of_range == 0, "no fuzzed score outside [0,1]");
  o.require(identity_fail == 0, "identity holds on fuzzed sequences");
  o.note(std::to_string(testing::metric_goldens().size()) + " goldens; 10000 fuzzed pairs, " +
         std::to_string(out_of_range) + " out of range, " + std::to_string(identity_fail) + " identity failures");
  return o;
}

Outcome criterion7() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  Scenario s = parse_scenario(testing::kMicroWorld);
  std::size_t total = 0, executable = 0, agree_exec = 0, disagree = 0, feasible = 0;
  testing::for_each_micro_plan(6, [&](const std::vector<int>& acts) {
    Plan p;
    testing::MicroVerdict v = testing::micro_oracle(acts, &p);
    bool got = validate(s, p).feasible;
    ++total;
    feasible += v.feasible;
    if (v.executable) {
      ++executable;
      agree_exec += got == v.feasible;
    }
    disagree += got != v.feasible;
  });
  double secs = seconds_since(t0);
  o.require(disagree == 0, "validator matches the oracle on every plan");
  o.require(agree_exec == executable, "100% agreement on executable plans");
  o.require(secs < 60.0, "runtime < 60 s");
  o.note(std::to_string(executable) + " executable of " + std::to_string(total) + " plans, " +
         std::to_string(feasible) + " feasible, " + std::to_string(disagree) + " disagreements, " + num(secs) + " s");
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::string wall = "'" + testing::src_path("scenarios/wall_assembly.scn.json") + "'";
  int fields = 0;
  for (const char* name : {"draft", "gemma", "llama", "mistral"}) {
    Plan fx = testing::fixture("exp1", name);
    int code = 0;
    std::string out =
        capture("simulate " + wall + " '" + testing::src_path(std::string("fixtures/exp1/") + name + ".plan") + "'",
                &code);
    o.require(code == 0, std::string(name) + " simulate exits 0");
    std::istringstream in(out);
    std::string line;
    std::vector<nlohmann::json> recs;
    while (std::getline(in, line))
      if (!line.empty()) recs.push_back(nlohmann::json::parse(line));
    if (recs.empty() || !recs.back().value("summary", false)) {
      o.require(false, std::string(name) + " simulate prints a summary line");
      continue;
    }
    recs.pop_back();
    o.require(recs.size() == fx.size(), std::string(name) + " one record per step");
    for (std::size_t i = 0; i < std::min(recs.size(), fx.size()); ++i) {
      o.require(recs[i]["battery"].get<double>() == fx.steps[i].battery,
                std::string(name) + " STEP " + std::to_string(i + 1) + " REMAINING_BATTERY");
      o.require(recs[i]["placed"].get<int>() == fx.steps[i].placed,
                std::string(name) + " STEP " + std::to_string(i + 1) + " PLACED_BRICKS");
      fields += 2;
    }
    if (std::string(name) == "draft" && recs.size() >= 7)
      o.require(recs[6]["location"] == "B" && recs[6]["battery"].get<double>() == 0.0,
                "draft STEP 7 arrives at B with 0%");
    if (std::string(name) == "gemma" && recs.size() >= 7)
      o.require(recs[6]["battery"].get<double>() == 75.0, "gemma STEP 7 at 75%");
  }
  o.note(std::to_string(fields) + " battery/placed fields compared across 4 traces");
  return o;
}

Outcome criterion9() {
  Outcome o;
  auto profiles = load_profiles(testing::src_path("llm_profiles.json"));
  std::vector<std::string> sups{"search-minimal", "llm:gemma", "llm:llama", "llm:mistral"};
  for (const auto& sname : sups)
    if (sname.rfind("llm:", 0) == 0) o.require(profiles.at(sname.substr(4)).provider == "mock", sname + " is a mock");
  o.require(profiles.at("generator").provider == "mock", "generator is a mock");
  auto base = std::filesystem::temp_directory_path() / ("robosched_acceptance_" + std::to_string(::getpid()));
  std::filesystem::remove_all(base);
  std::size_t files = 0;
  for (const char* scen : {"wall_assembly", "scan_grid"}) {
    std::vector<std::map<std::string, std::string>> runs;
    for (int k = 0; k < 3; ++k) {
      ExperimentConfig cfg;
      cfg.scenario_path = testing::src_path(std::string("scenarios/") + scen + ".scn.json");
      cfg.generator = "llm:generator";
      cfg.supervisors = sups;
      cfg.profiles_path = testing::src_path("llm_profiles.json");
      cfg.manifest_path = testing::src_path("fixtures/mocks/manifest.json");
      cfg.out_dir = (base / (std::string(scen) + "_" + std::to_string(k))).string();
      cfg.parallel_arms = k == 2;
      ExperimentResult r;
      try {
        r = run_experiment(cfg);
      } catch (const std::exception& e) {
        o.require(false, std::string(scen) + " experiment ran: " + e.what());
        continue;
      }
      o.require(r.hybrid.size() == sups.size(), std::string(scen) + " hybrid arm has every supervisor");
      o.require(!r.generator_only.plan.empty(), std::string(scen) + " generator-only arm produced a plan");
      o.require(r.fcfs_error.empty(), std::string(scen) + " FCFS arm ran");
      std::map<std::string, std::string> contents;
      for (const auto& f : r.files) contents[std::filesystem::path(f).filename().string()] = testing::slurp(f);
      o.require(contents.size() == 3, std::string(scen) + " wrote 3 files");
      runs.push_back(contents);
    }
    for (std::size_t k = 1; k < runs.size(); ++k)
      o.require(runs[k] == runs[0], std::string(scen) + " run " + std::to_string(k) + " is byte-identical");
    if (!runs.empty()) files += runs[0].size();
  }
  std::filesystem::remove_all(base);
  o.note(std::to_string(files) + " report files per run, byte-identical over 3 runs (one with parallel arms)");
  return o;
}

Outcome criterion10() {
  Outcome o;
  std::mt19937 rng(20251014);
  int fcfs_ok = 0, hybrid_ok = 0, strictly = 0, worse = 0;
  const int n = 50;
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < n; ++i) {
    Scenario s = testing::random_shuttle(rng, true);
    Plan draft = fcfs_schedule(s).plan;
    bool f = validate(s, draft).feasible;
    SearchSupervisor sup(SearchStyle::Minimal, {});
    bool h = repair_loop(s, draft, sup).feasible;
    fcfs_ok += f;
    hybrid_ok += h;
    strictly += h && !f;
    worse += f && !h;
  }
  double secs = seconds_since(t0);
  o.require(hybrid_ok >= fcfs_ok, "hybrid feasibility rate >= FCFS");
  o.require(strictly >= 10, "hybrid strictly better on >= 10 instances");
  o.require(worse == 0, "hybrid never loses a feasible FCFS instance");
  o.note("FCFS " + std::to_string(fcfs_ok) + "/" + std::to_string(n) + ", hybrid " + std::to_string(hybrid_ok) +
         "/" + std::to_string(n) + ", strictly better on " + std::to_string(strictly) + ", " + num(secs) + " s");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Experiment-I feasibility repair", criterion1},
      {"Experiment-II coverage repair", criterion2},
      {"minimality oracle", criterion3},
      {"guardrail ablation", criterion4},
      {"similarity ordering", criterion5},
      {"metric correctness oracles", criterion6},
      {"validator-oracle equivalence", criterion7},
      {"executor ground truth", criterion8},
      {"offline end-to-end", criterion9},
      {"FCFS directional claim", criterion10},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (k + 1) << " " << criteria[k].first << "\n";
    for (const auto& n : o.notes) std::cout << "     " << n << "\n";
    std::cout.flush();
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
