#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "robosched/repair.hpp"
#include "robosched/validator.hpp"
#include "support.hpp"

using namespace robosched;

namespace {

class FailingSupervisor : public Supervisor {
 public:
  std::string name() const override { return "failing"; }
  SupervisorOutput repair(const Scenario&, const Plan&, const ViolationReport&, int) override {
    ++calls;
    throw SupervisorError("no repair");
  }
  bool deterministic() const override { return det; }
  int calls = 0;
  bool det = true;
};

class FixtureSupervisor : public Supervisor {
 public:
  explicit FixtureSupervisor(Plan p) : plan_(std::move(p)) {}
  std::string name() const override { return "fixture"; }
  SupervisorOutput repair(const Scenario&, const Plan&, const ViolationReport&, int) override {
    return {plan_, std::nullopt, "canned"};
  }

 private:
  Plan plan_;
};

std::vector<std::string> names(const Plan& p) {
  std::vector<std::string> out;
  for (const auto& s : p.steps) out.push_back(s.action.name());
  return out;
}

}  // namespace

TEST_CASE("search repairs exp1 with two substitutions at S7 and S8") {
  Scenario s = testing::wall();
  RepairResult r = minimal_edit_repair(s, testing::fixture("exp1", "draft"));
  REQUIRE(r.feasible);
  CHECK(r.report.psi == 0);
  CHECK(r.script.cost == 2);
  CHECK(r.script.profile == EditProfile{0, 2, 0});
  REQUIRE(r.script.ops.size() == 2);
  CHECK(r.script.ops[0].describe() == "S7: MOVE_B->MOVE_C");
  CHECK(r.script.ops[1].describe() == "S8: MOVE_C->CHARGE");
  CHECK(serialize_plan(r.plan) == serialize_plan(testing::fixture("exp1", "llama")));
}

TEST_CASE("search repairs exp2 with one scan at the goal") {
  Scenario s = testing::grid();
  RepairResult r = minimal_edit_repair(s, testing::fixture("exp2", "draft"));
  REQUIRE(r.feasible);
  CHECK(r.script.cost == 1);
  CHECK(r.script.profile == EditProfile{1, 0, 0});
  REQUIRE(r.script.ops.size() == 1);
  CHECK(r.script.ops[0].describe() == "S8: SCAN (+) at (2,2)");
}

TEST_CASE("search returns the draft unchanged when it is already feasible") {
  Scenario s = testing::wall();
  Plan p = testing::fixture("exp1", "llama");
  RepairResult r = minimal_edit_repair(s, p);
  CHECK(r.feasible);
  CHECK(r.script.cost == 0);
  CHECK(r.plan == p);
}

TEST_CASE("search reports failure when the budget is too small") {
  SearchOptions o;
  o.budget = 1;
  RepairResult r = minimal_edit_repair(testing::wall(), testing::fixture("exp1", "draft"), o);
  CHECK(!r.feasible);
}

TEST_CASE("search cost is minimal on the micro world") {
  Scenario s = parse_scenario(testing::kMicroWorld);
  std::mt19937 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<int> acts(3 + rng() % 3);
    for (auto& a : acts) a = static_cast<int>(rng() % testing::kMicroActs);
    Plan draft;
    testing::micro_oracle(acts, &draft);
    SearchOptions o;
    o.budget = 3;
    RepairResult r = minimal_edit_repair(s, draft, o);
    if (!r.feasible) continue;
    ++checked;
    CHECK(validate(s, r.plan).feasible);
    if (r.script.cost > 0) CHECK(!testing::brute_force_below(s, draft, r.script.cost - 1, {}).any_feasible);
  }
  CHECK(checked > 5);
}

TEST_CASE("conservative style appends a terminal charge when the battery ends low") {
  Scenario s = testing::wall();
  Plan d = testing::fixture("exp1", "draft");
  SearchSupervisor sup(SearchStyle::Conservative, {});
  SupervisorOutput out = sup.repair(s, d, validate(s, d), 1);
  CHECK(validate(s, out.plan).feasible);
  CHECK(out.plan.size() == d.size() + 2);
  auto n = names(out.plan);
  CHECK(n[n.size() - 2] == "MOVE_C");
  CHECK(n.back() == "CHARGE");
}

TEST_CASE("edit script over fixtures") {
  Plan d = testing::fixture("exp1", "draft");
  EditScript e = edit_script(d, testing::fixture("exp1", "llama"));
  CHECK(e.cost == 2);
  CHECK(e.profile == EditProfile{0, 2, 0});
  EditScript m = edit_script(d, testing::fixture("exp1", "mistral"));
  CHECK(m.cost == 3);
  CHECK(m.profile.insertions == 1);
  EditScript g = edit_script(testing::fixture("exp2", "draft"), testing::fixture("exp2", "llama"));
  CHECK(g.cost == 1);
  CHECK(g.ops[0].kind == EditKind::Insert);
  CHECK(g.ops[0].source == 8);
  CHECK(edit_script(d, d).cost == 0);
}

TEST_CASE("edit script finds an adjacent transpose") {
  Plan a = parse_plan("STEP 1, [S], MOVE_S, [0], 0, [75]\nSTEP 2, [S], PICK, [3], 0, [75]\n");
  Plan b = parse_plan("STEP 1, [C], PICK, [0], 0, [100]\nSTEP 2, [S], MOVE_S, [0], 0, [75]\n");
  EditScript e = edit_script(a, b);
  CHECK(e.cost == 1);
  CHECK(e.profile == EditProfile{0, 0, 1});
  CHECK(e.ops[0].describe() == "S1<->S2: PICK moved earlier");
}

TEST_CASE("applying an alignment script reproduces the target's actions") {
  std::mt19937 rng(3);
  const std::vector<Action> alpha{Action::move_to("S"), Action::move_to("B"), Action::simple(ActionKind::Pick),
                                  Action::simple(ActionKind::Build), Action::simple(ActionKind::Idle)};
  for (int t = 0; t < 400; ++t) {
    Plan a, b;
    for (std::size_t k = rng() % 7; k > 0; --k) a.steps.push_back(testing::bare_step(alpha[rng() % alpha.size()]));
    for (std::size_t k = rng() % 7; k > 0; --k) b.steps.push_back(testing::bare_step(alpha[rng() % alpha.size()]));
    renumber(a);
    renumber(b);
    EditScript e = edit_script(a, b);
    CHECK(names(apply_script(a, e)) == names(b));
    CHECK(e.cost <= static_cast<int>(std::max(a.size(), b.size())));
    CHECK(e.profile.total() == e.cost);
  }
}

TEST_CASE("reconcile recomputes every state field") {
  Scenario s = testing::wall();
  Plan p = testing::fixture("exp1", "llama");
  Plan blank = p;
  for (auto& st : blank.steps) st = testing::bare_step(st.action);
  CHECK(reconcile(s, blank) == p);
}

TEST_CASE("repair loop with the search supervisor") {
  Scenario s = testing::wall();
  SearchSupervisor sup(SearchStyle::Minimal, {});
  RepairResult r = repair_loop(s, testing::fixture("exp1", "draft"), sup);
  CHECK(r.feasible);
  CHECK(r.iterations_used == 1);
  CHECK(r.repairs == 1);
  CHECK(r.script.profile == EditProfile{0, 2, 0});
  REQUIRE(r.log.size() == 1);
  CHECK(r.log[0].pairs.size() == 2);

  RepairResult ok = repair_loop(s, testing::fixture("exp1", "llama"), sup);
  CHECK(ok.feasible);
  CHECK(ok.repairs == 0);
  CHECK(ok.iterations_used == 1);
}

TEST_CASE("repair loop stops at the cap and caches deterministic failures") {
  Scenario s = testing::wall();
  FailingSupervisor sup;
  LoopOptions o;
  o.max_iters = 3;
  RepairResult r = repair_loop(s, testing::fixture("exp1", "draft"), sup, o);
  CHECK(!r.feasible);
  CHECK(r.iterations_used == 3);
  CHECK(sup.calls == 1);
  FailingSupervisor flaky;
  flaky.det = false;
  repair_loop(s, testing::fixture("exp1", "draft"), flaky, o);
  CHECK(flaky.calls == 3);
}

TEST_CASE("repair loop accepts a plan from an external supervisor") {
  Scenario s = testing::grid();
  FixtureSupervisor sup(testing::fixture("exp2", "gemma"));
  RepairResult r = repair_loop(s, testing::fixture("exp2", "draft"), sup);
  CHECK(r.feasible);
  CHECK(r.script.profile.insertions == 3);
  CHECK(repair_json(r).find("\"outcome\": \"feasible\"") != std::string::npos);
}
