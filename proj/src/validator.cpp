#include "robosched/validator.hpp"

#include <algorithm>

#include "json.hpp"
#include "robosched/errors.hpp"

namespace robosched {

namespace {

constexpr double kEps = 1e-9;

const std::vector<std::pair<CheckClass, std::string>> kCheckNames{
    {CheckClass::Precedence, "precedence"}, {CheckClass::Capability, "capability"},
    {CheckClass::Capacity, "capacity"},     {CheckClass::Battery, "battery"},
    {CheckClass::Safety, "safety"},         {CheckClass::Schema, "schema"},
    {CheckClass::Coverage, "coverage"},
};

struct TaskProgress {
  const TaskSpec* task = nullptr;
  int need = 0;
  int got = 0;
  std::optional<double> first_start;
  std::optional<std::size_t> first_record;
  std::optional<double> done_end;
  std::optional<std::size_t> done_record;
};

SkillSet actor_skills(const Scenario& s, const StepRecord& r) {
  SkillSet out;
  for (const auto& id : r.step.actors()) {
    const RobotSpec* spec = s.find_robot(id.empty() ? r.robot : id);
    if (spec) out.insert(spec->skills.begin(), spec->skills.end());
  }
  return out;
}

int position(const StepRecord& r) { return static_cast<int>(r.plan_index) + 1; }

class Checker {
 public:
  Checker(const Scenario& s, const Plan& p, const Trace& t, const ValidateOptions& opt)
      : s_(s), p_(p), t_(t), opt_(opt) {}

  ViolationReport run() {
    rep_.checks_run = opt_.checks;
    rep_.coverage_separate = opt_.coverage_separate;
    rep_.completed = t_.complete();
    if (t_.fault) fault();
    if (on(CheckClass::Schema)) schema();
    if (on(CheckClass::Capability)) capability();
    if (on(CheckClass::Battery)) battery();
    if (on(CheckClass::Safety)) safety();
    if (on(CheckClass::Precedence) || on(CheckClass::Capacity) || on(CheckClass::Capability)) tasks();
    if (on(CheckClass::Coverage)) coverage();
    std::stable_sort(rep_.violations.begin(), rep_.violations.end(), [](const Violation& a, const Violation& b) {
      int sa = a.step.value_or(1 << 30), sb = b.step.value_or(1 << 30);
      if (sa != sb) return sa < sb;
      return a.cls < b.cls;
    });
    rep_.psi = static_cast<int>(rep_.violated_classes().size());
    rep_.feasible = rep_.psi == 0 && rep_.completed;
    return std::move(rep_);
  }

 private:
  bool on(CheckClass c) const { return opt_.checks.count(c) > 0; }

  int last_position() const { return std::max<int>(1, static_cast<int>(p_.steps.size())); }

  void add(CheckClass c, std::optional<int> step, RobotId robot, std::string detail, FixHint hint,
           std::map<std::string, std::string> payload = {}) {
    rep_.violations.push_back({c, step, std::move(robot), std::move(detail), std::move(payload), std::move(hint)});
  }

  void fault() {
    const ExecFailure& f = *t_.fault;
    CheckClass c = fault_class(f.kind);
    if (!on(c)) return;
    int pos = static_cast<int>(f.plan_index) + 1;
    FixHint hint{HintKind::Substitute, pos, std::nullopt};
    if (f.kind == ExecFault::ChargeAwayFromCharger) {
      std::optional<Action> to_charger;
      if (!s_.site.chargers.empty()) to_charger = Action::navigate(*s_.site.chargers.begin());
      hint = {HintKind::InsertBefore, pos, to_charger};
    } else if (f.kind == ExecFault::PickAwayFromStock && !s_.resources.empty()) {
      hint = {HintKind::InsertBefore, pos, Action::navigate(s_.resources.begin()->first)};
    } else if (f.kind == ExecFault::UnknownRobot) {
      hint = {HintKind::ReassignRobot, pos, std::nullopt};
    }
    add(c, pos, f.robot, "execution halted: " + fault_name(f.kind) + ": " + f.message, hint,
        {{"fault", fault_name(f.kind)}});
  }

  void schema() {
    std::map<RobotId, int> next;
    for (std::size_t i = 0; i < p_.steps.size(); ++i) {
      const PlanStep& st = p_.steps[i];
      int& want = next[st.robot];
      ++want;
      if (st.step != want) {
        add(CheckClass::Schema, static_cast<int>(i) + 1, st.robot,
            "step index " + std::to_string(st.step) + " where " + std::to_string(want) + " was expected",
            {HintKind::Substitute, static_cast<int>(i) + 1, std::nullopt});
        want = st.step;
      }
    }
    for (const auto& r : t_.records) {
      const RobotState* rs = r.after.find(r.robot);
      if (rs && rs->location != r.step.location)
        add(CheckClass::Schema, position(r), r.robot,
            "declared location " + r.step.location + " contradicts executed location " + rs->location,
            {HintKind::Substitute, position(r), std::nullopt}, {{"declared", r.step.location}, {"actual", rs->location}});
    }
  }

  void capability() {
    for (const auto& r : t_.records) {
      auto need = required_skill(r.step.action);
      if (need && !actor_skills(s_, r).count(*need))
        add(CheckClass::Capability, position(r), r.robot,
            r.step.action.name() + " needs skill " + skill_name(*need) + " that the acting robot lacks",
            {HintKind::ReassignRobot, position(r), std::nullopt}, {{"skill", skill_name(*need)}});
    }
  }

  void battery() {
    for (const auto& r : t_.records) {
      for (const auto& id : r.step.actors()) {
        const RobotState* rs = r.after.find(id.empty() ? r.robot : id);
        if (!rs || rs->battery >= -kEps) continue;
        std::optional<Action> fix = Action::simple(ActionKind::Charge);
        add(CheckClass::Battery, position(r), rs->id,
            "battery " + format_number(rs->battery) + "% at " + rs->location + " after " + r.step.action.name(),
            {HintKind::InsertBefore, position(r), fix}, {{"battery", format_number(rs->battery)}});
      }
    }
  }

  void safety() {
    if (s_.site.no_go.empty()) return;
    for (const auto& r : t_.records)
      for (const auto& loc : r.path)
        if (s_.site.no_go.count(loc)) {
          add(CheckClass::Safety, position(r), r.robot, "enters no-go location " + loc,
              {HintKind::Substitute, position(r), std::nullopt}, {{"location", loc}});
          break;
        }
  }

  void tasks() {
    std::vector<TaskProgress> prog;
    std::map<std::pair<ActionKind, LocationId>, std::vector<std::size_t>> groups;
    for (const auto& t : s_.tasks) {
      TaskProgress tp;
      tp.task = &t;
      bool bricks = t.type == ActionKind::Pick || t.type == ActionKind::Build;
      tp.need = bricks ? t.demand : t.type == ActionKind::Navigate ? 1 : std::max(1, t.demand);
      if (tp.need == 0) tp.done_end = 0.0;
      groups[{t.type, t.location}].push_back(prog.size());
      prog.push_back(tp);
    }
    std::map<std::pair<ActionKind, LocationId>, std::size_t> cursor;
    for (std::size_t ri = 0; ri < t_.records.size(); ++ri) {
      const StepRecord& r = t_.records[ri];
      ActionKind kind = r.step.action.kind;
      LocationId loc = r.from;
      int amount = 1;
      if (kind == ActionKind::Navigate) {
        loc = r.path.empty() ? r.from : r.path.back();
      } else if (kind == ActionKind::Pick || kind == ActionKind::Build) {
        amount = r.moved;
      }
      auto g = groups.find({kind, loc});
      if (g == groups.end() || amount <= 0) continue;
      std::size_t& c = cursor[{kind, loc}];
      while (amount > 0 && c < g->second.size()) {
        TaskProgress& tp = prog[g->second[c]];
        if (tp.done_end) {
          ++c;
          continue;
        }
        if (!tp.first_start) {
          tp.first_start = r.start;
          tp.first_record = ri;
          if (on(CheckClass::Capability)) {
            SkillSet have = actor_skills(s_, r);
            for (auto k : tp.task->required_skills)
              if (!have.count(k))
                add(CheckClass::Capability, position(r), r.robot,
                    "task " + tp.task->id + " requires skill " + skill_name(k) + " that the acting robot lacks",
                    {HintKind::ReassignRobot, position(r), std::nullopt}, {{"task", tp.task->id}});
          }
        }
        int take = std::min(amount, tp.need - tp.got);
        tp.got += take;
        amount -= take;
        if (tp.got >= tp.need) {
          tp.done_end = r.end;
          tp.done_record = ri;
          ++c;
        }
      }
    }

    std::map<TaskId, const TaskProgress*> by_id;
    for (const auto& tp : prog) by_id[tp.task->id] = &tp;
    if (on(CheckClass::Precedence)) {
      for (const auto& [a, b] : s_.dag.edges) {
        const TaskProgress& pa = *by_id[a];
        const TaskProgress& pb = *by_id[b];
        if (!pb.first_start) continue;
        if (pa.done_end && *pa.done_end <= *pb.first_start + kEps) continue;
        const StepRecord& r = t_.records[*pb.first_record];
        add(CheckClass::Precedence, position(r), r.robot, "task " + b + " starts before " + a + " completes",
            {HintKind::SwapAdjacent, position(r), std::nullopt}, {{"before", a}, {"after", b}});
      }
    }
    for (const auto& tp : prog) {
      if (tp.done_end) continue;
      const TaskSpec& t = *tp.task;
      bool bricks = t.type == ActionKind::Pick || t.type == ActionKind::Build;
      CheckClass c = bricks ? CheckClass::Capacity : CheckClass::Precedence;
      if (!on(c)) continue;
      Action need = t.type == ActionKind::Navigate ? Action::navigate(t.location) : Action::simple(t.type);
      std::string detail = bricks ? "task " + t.id + " received " + std::to_string(tp.got) + " of " +
                                        std::to_string(t.demand) + " MU"
                                  : "task " + t.id + " never completed";
      add(c, std::nullopt, {}, detail, {HintKind::InsertAfter, last_position(), need},
          {{"task", t.id}, {"got", std::to_string(tp.got)}, {"need", std::to_string(tp.need)}});
    }
  }

  void coverage() {
    if (s_.site.kind != SiteKind::Grid) return;
    auto cov = coverage_complete(s_, t_);
    if (!cov.complete) {
      std::string cells;
      for (const auto& c : cov.missing) cells += (cells.empty() ? "" : " ") + c;
      add(CheckClass::Coverage, std::nullopt, {}, "undiscovered cells: " + cells,
          {HintKind::InsertAfter, last_position(), Action::simple(ActionKind::Scan)}, {{"missing", cells}});
    }
    if (s_.site.goal) {
      bool reached = false;
      for (const auto& rs : t_.final_state.robots) reached = reached || rs.location == *s_.site.goal;
      if (!reached)
        add(CheckClass::Coverage, std::nullopt, {}, "goal " + *s_.site.goal + " not reached",
            {HintKind::InsertAfter, last_position(), Action::navigate(*s_.site.goal)}, {{"goal", *s_.site.goal}});
    }
  }

  const Scenario& s_;
  const Plan& p_;
  const Trace& t_;
  const ValidateOptions& opt_;
  ViolationReport rep_;
};

}  // namespace

CheckSet all_checks() {
  CheckSet out;
  for (const auto& [c, _] : kCheckNames) out.insert(c);
  return out;
}

std::string check_name(CheckClass c) {
  for (const auto& [k, n] : kCheckNames)
    if (k == c) return n;
  return "schema";
}

std::optional<CheckClass> parse_check(std::string_view text) {
  std::string t = to_lower(trim(text));
  for (const auto& [k, n] : kCheckNames)
    if (n == t) return k;
  return std::nullopt;
}

CheckSet parse_checks(std::string_view text) {
  CheckSet out;
  std::string s(text);
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    std::string item = to_lower(trim(std::string_view(s).substr(start, comma - start)));
    start = comma == std::string::npos ? s.size() + 1 : comma + 1;
    if (item.empty()) continue;
    if (item == "all") {
      out = all_checks();
      continue;
    }
    auto c = parse_check(item);
    if (!c) throw ConfigError("unknown check class '" + item + "'");
    out.insert(*c);
  }
  return out;
}

std::string hint_name(HintKind k) {
  switch (k) {
    case HintKind::InsertBefore:
      return "insert_before";
    case HintKind::InsertAfter:
      return "insert_after";
    case HintKind::Substitute:
      return "substitute";
    case HintKind::SwapAdjacent:
      return "swap_adjacent";
    case HintKind::ReassignRobot:
      return "reassign_robot";
  }
  return "substitute";
}

std::set<CheckClass> ViolationReport::violated_classes() const {
  std::set<CheckClass> out;
  for (const auto& v : violations) {
    CheckClass c = v.cls;
    if (c == CheckClass::Coverage && !coverage_separate) c = CheckClass::Safety;
    out.insert(c);
  }
  return out;
}

std::size_t ViolationReport::count(CheckClass c) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [c](const Violation& v) { return v.cls == c; }));
}

CheckClass fault_class(ExecFault f) {
  switch (f) {
    case ExecFault::PickAwayFromStock:
      return CheckClass::Capacity;
    case ExecFault::UnknownRobot:
      return CheckClass::Schema;
    default:
      return CheckClass::Battery;
  }
}

ViolationReport validate(const Scenario& s, const Plan& p, const Trace& t, const ValidateOptions& opt) {
  return Checker(s, p, t, opt).run();
}

ViolationReport validate(const Scenario& s, const Plan& p, const ValidateOptions& opt) {
  Trace t = simulate(s, p);
  return validate(s, p, t, opt);
}

ViolationReport validate_text(const Scenario& s, const std::string& text, const ValidateOptions& opt) {
  PlanParse parsed = parse_plan_lenient(text);
  if (parsed.errors.empty()) return validate(s, parsed.plan, opt);
  ViolationReport rep;
  rep.checks_run = opt.checks;
  rep.coverage_separate = opt.coverage_separate;
  rep.completed = false;
  for (const auto& e : parsed.errors) {
    int anchor = e.step ? e.step : static_cast<int>(e.line);
    rep.violations.push_back({CheckClass::Schema, anchor, {}, "line " + std::to_string(e.line) + ": " + e.reason,
                              {{"line", std::to_string(e.line)}}, {HintKind::Substitute, anchor, std::nullopt}});
  }
  rep.psi = 1;
  rep.feasible = false;
  return rep;
}

bool step_locally_ok(const Scenario& s, const StepRecord& r, const CheckSet& checks) {
  if (checks.count(CheckClass::Battery))
    for (const auto& id : r.step.actors()) {
      const RobotState* rs = r.after.find(id.empty() ? r.robot : id);
      if (rs && rs->battery < -kEps) return false;
    }
  if (checks.count(CheckClass::Safety))
    for (const auto& loc : r.path)
      if (s.site.no_go.count(loc)) return false;
  if (checks.count(CheckClass::Capability)) {
    auto need = required_skill(r.step.action);
    if (need && !actor_skills(s, r).count(*need)) return false;
  }
  return true;
}

std::string report_json(const ViolationReport& r, int indent) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["feasible"] = r.feasible;
  j["psi"] = r.psi;
  j["completed"] = r.completed;
  ordered_json classes = ordered_json::array();
  for (auto c : r.violated_classes()) classes.push_back(check_name(c));
  j["violated_classes"] = classes;
  ordered_json run = ordered_json::array();
  for (auto c : r.checks_run) run.push_back(check_name(c));
  j["checks_run"] = run;
  ordered_json vs = ordered_json::array();
  for (const auto& v : r.violations) {
    ordered_json o;
    o["class"] = check_name(v.cls);
    o["step"] = v.step ? ordered_json(*v.step) : ordered_json(nullptr);
    if (!v.robot.empty()) o["robot"] = v.robot;
    o["detail"] = v.detail;
    ordered_json pl = ordered_json::object();
    for (const auto& [k, val] : v.payload) pl[k] = val;
    o["payload"] = pl;
    ordered_json h;
    h["kind"] = hint_name(v.hint.kind);
    h["anchor_step"] = v.hint.anchor_step;
    h["suggested_action"] = v.hint.suggested_action ? ordered_json(v.hint.suggested_action->name()) : ordered_json(nullptr);
    o["hint"] = h;
    vs.push_back(o);
  }
  j["violations"] = vs;
  return j.dump(indent) + "\n";
}

}  // namespace robosched
