#include "robosched/repair.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "robosched/executor.hpp"
#include "robosched/llm_gateway.hpp"

namespace robosched {

namespace {

std::vector<Action> hop_moves(const Scenario& s, LocationId at, const std::vector<LocationId>& hops) {
  std::vector<Action> out;
  for (const auto& h : hops) {
    if (s.site.kind == SiteKind::Grid) {
      for (auto d : {Direction::Left, Direction::Right, Direction::Up, Direction::Down})
        if (s.site.step(at, d) == std::optional<LocationId>(h)) {
          out.push_back(Action::move_dir(d));
          break;
        }
    } else {
      out.push_back(Action::move_to(h));
    }
    at = h;
  }
  return out;
}

struct Node {
  Simulator sim;
  std::vector<PlanStep> out;
  std::vector<StepRecord> recs;
  std::vector<EditOp> ops;
  int cost = 0;
};

struct Candidate {
  Plan plan;
  std::vector<EditOp> ops;
  Trace trace;
  int insertions = 0;
  int max_touched = 0;
  std::vector<std::string> names;

  auto key() const { return std::tie(insertions, max_touched, names); }
};

std::string op_action_name(const EditOp& op) {
  if (op.kind == EditKind::Transpose) return op.swapped->name();
  if (op.payload) return op.payload->action.name();
  return op.replaced ? op.replaced->name() : std::string{};
}

class Search {
 public:
  Search(const Scenario& s, const Plan& draft, const SearchOptions& opt)
      : s_(s), draft_(draft), opt_(opt), incremental_(s.robots.size() == 1) {}

  std::optional<Candidate> run() {
    for (limit_ = 0; limit_ <= opt_.budget; ++limit_) {
      found_.clear();
      Node root{Simulator(s_), {}, {}, {}, 0};
      dfs(0, root);
      if (!found_.empty()) {
        auto best = std::min_element(found_.begin(), found_.end(),
                                     [](const Candidate& a, const Candidate& b) { return a.key() < b.key(); });
        return *best;
      }
    }
    return std::nullopt;
  }

 private:
  std::vector<Action> alphabet(const Node& nd, const RobotId& robot) const {
    std::vector<Action> out;
    const RobotSpec* spec = s_.find_robot(robot.empty() ? s_.robots.front().id : robot);
    if (!spec) return out;
    for (auto k : spec->skills) {
      switch (k) {
        case Skill::Move:
          if (s_.site.kind == SiteKind::Grid) {
            for (auto d : {Direction::Left, Direction::Right, Direction::Up, Direction::Down})
              out.push_back(Action::move_dir(d));
          } else if (incremental_) {
            const RobotState* rs = nd.sim.state().find(spec->id);
            for (const auto& [n, _] : s_.site.neighbors(rs->location)) out.push_back(Action::move_to(n));
          } else {
            for (const auto& n : s_.site.nodes) out.push_back(Action::move_to(n));
          }
          break;
        case Skill::Pick:
          out.push_back(Action::simple(ActionKind::Pick));
          break;
        case Skill::Build:
          out.push_back(Action::simple(ActionKind::Build));
          break;
        case Skill::Charge:
          out.push_back(Action::simple(ActionKind::Charge));
          break;
        case Skill::Scan:
          out.push_back(Action::simple(ActionKind::Scan));
          break;
        case Skill::MarkLayout:
          out.push_back(Action::simple(ActionKind::MarkLayout));
          break;
        case Skill::Inspect:
          out.push_back(Action::simple(ActionKind::Inspect));
          break;
        case Skill::Idle:
        case Skill::CoCarry:
          break;
      }
    }
    out.push_back(Action::simple(ActionKind::Idle));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool push(Node& nd, PlanStep st) {
    if (!incremental_) {
      nd.out.push_back(std::move(st));
      return true;
    }
    ExecFailure f;
    auto rec = nd.sim.apply(st, nd.out.size(), &f);
    if (!rec) return false;
    const RobotState* rs = rec->after.find(rec->robot);
    st.step = static_cast<int>(nd.out.size()) + 1;
    st.location = rs->location;
    st.cargo = rs->cargo;
    st.placed = rec->after.placed;
    st.battery = rs->battery;
    rec->step = st;
    if (!step_locally_ok(s_, *rec, opt_.validate.checks)) return false;
    nd.out.push_back(std::move(st));
    nd.recs.push_back(std::move(*rec));
    return true;
  }

  PlanStep from_template(const PlanStep& like, const Action& a) const {
    PlanStep st = like;
    st.action = a;
    st.coalition.clear();
    return st;
  }

  void leaf(const Node& nd) {
    Candidate c;
    c.plan.steps = nd.out;
    if (incremental_) {
      renumber(c.plan);
      c.trace.initial = initial_state(s_);
      c.trace.records = nd.recs;
      c.trace.final_state = nd.sim.state();
    } else {
      c.plan = reconcile(s_, c.plan);
      c.trace = simulate(s_, c.plan);
    }
    if (!validate(s_, c.plan, c.trace, opt_.validate).feasible) return;
    c.ops = nd.ops;
    for (const auto& op : c.ops) {
      if (op.kind == EditKind::Insert) ++c.insertions;
      c.max_touched = std::max(c.max_touched, op.kind == EditKind::Transpose ? op.result + 1 : op.result);
      c.names.push_back(op_action_name(op));
    }
    found_.push_back(std::move(c));
  }

  void dfs(std::size_t i, Node& nd) {
    const auto& src = draft_.steps;
    const int src_pos = static_cast<int>(i) + 1;
    if (i == src.size()) {
      if (nd.cost == limit_) leaf(nd);
      if (nd.cost < limit_) {
        const PlanStep like = src.empty() ? PlanStep{} : src.back();
        for (const auto& a : alphabet(nd, like.robot)) {
          Node child = nd;
          if (!push(child, from_template(like, a))) continue;
          child.ops.push_back({EditKind::Insert, src_pos, static_cast<int>(child.out.size()), child.out.back(),
                               std::nullopt, std::nullopt});
          ++child.cost;
          dfs(i, child);
        }
      }
      return;
    }
    // keep
    {
      Node child = nd;
      if (push(child, src[i])) dfs(i + 1, child);
    }
    if (nd.cost >= limit_) return;
    // substitute
    for (const auto& a : alphabet(nd, src[i].robot)) {
      if (a == src[i].action) continue;
      Node child = nd;
      if (!push(child, from_template(src[i], a))) continue;
      child.ops.push_back({EditKind::Substitute, src_pos, static_cast<int>(child.out.size()), child.out.back(),
                           src[i].action, std::nullopt});
      ++child.cost;
      dfs(i + 1, child);
    }
    // adjacent transpose
    if (i + 1 < src.size() && !(src[i].action == src[i + 1].action && src[i].robot == src[i + 1].robot)) {
      Node child = nd;
      int first = static_cast<int>(child.out.size()) + 1;
      if (push(child, src[i + 1]) && push(child, src[i])) {
        child.ops.push_back({EditKind::Transpose, src_pos, first, child.out[first - 1], std::nullopt,
                             src[i + 1].action});
        ++child.cost;
        dfs(i + 2, child);
      }
    }
    // insert before src[i]
    for (const auto& a : alphabet(nd, src[i].robot)) {
      Node child = nd;
      if (!push(child, from_template(src[i], a))) continue;
      child.ops.push_back({EditKind::Insert, src_pos, static_cast<int>(child.out.size()), child.out.back(),
                           std::nullopt, std::nullopt});
      ++child.cost;
      dfs(i, child);
    }
  }

  const Scenario& s_;
  const Plan& draft_;
  const SearchOptions& opt_;
  bool incremental_;
  int limit_ = 0;
  std::vector<Candidate> found_;
};

std::vector<std::pair<std::optional<Violation>, EditOp>> pair_ops(const std::vector<Violation>& vs,
                                                                  const std::vector<EditOp>& ops) {
  std::vector<std::pair<std::optional<Violation>, EditOp>> out;
  for (const auto& op : ops) {
    std::optional<Violation> best;
    int best_d = std::numeric_limits<int>::max();
    for (const auto& v : vs) {
      int anchor = v.step.value_or(v.hint.anchor_step);
      int d = std::abs(anchor - op.source);
      if (d < best_d) {
        best_d = d;
        best = v;
      }
    }
    out.push_back({best, op});
  }
  return out;
}

}  // namespace

RepairResult minimal_edit_repair(const Scenario& s, const Plan& draft, const SearchOptions& opt) {
  RepairResult r;
  r.iterations_used = 1;
  r.repairs = 1;
  auto best = Search(s, draft, opt).run();
  if (!best) {
    r.plan = draft;
    r.report = validate(s, draft, opt.validate);
    return r;
  }
  r.feasible = true;
  r.plan = best->plan;
  r.script.ops = best->ops;
  r.script.cost = static_cast<int>(best->ops.size());
  r.script.profile = profile_of(best->ops);
  r.report = validate(s, r.plan, best->trace, opt.validate);
  return r;
}

std::string SearchSupervisor::name() const {
  return style_ == SearchStyle::Minimal ? "search-minimal" : "search-conservative";
}

SupervisorOutput SearchSupervisor::repair(const Scenario& s, const Plan& current, const ViolationReport&, int) {
  RepairResult r = minimal_edit_repair(s, current, opt_);
  if (!r.feasible) throw SupervisorError("no feasible plan within " + std::to_string(opt_.budget) + " edits");
  SupervisorOutput out{r.plan, r.script, "minimal edit cost " + std::to_string(r.script.cost)};
  if (style_ != SearchStyle::Conservative || r.plan.steps.empty()) return out;

  const PlanStep& last = r.plan.steps.back();
  Trace t = simulate(s, r.plan);
  RobotId id = Simulator(s).resolve_robot(last);
  const RobotState* rs = t.final_state.find(id);
  const RobotSpec* spec = s.find_robot(id);
  if (!rs || !spec || rs->battery >= 0.5 * spec->battery_max) return out;

  PlanStep base = last;
  base.coalition.clear();
  std::vector<std::vector<Action>> tails;
  if (spec->skills.count(Skill::Charge)) {
    if (s.site.chargers.count(rs->location)) tails.push_back({Action::simple(ActionKind::Charge)});
    std::optional<Path> nearest;
    for (const auto& c : s.site.chargers) {
      auto path = s.site.shortest_path(rs->location, c);
      if (path && !path->hops.empty() && (!nearest || path->du < nearest->du)) nearest = path;
    }
    if (nearest) {
      std::vector<Action> walk = hop_moves(s, rs->location, nearest->hops);
      walk.push_back(Action::simple(ActionKind::Charge));
      tails.push_back(walk);
    }
  }
  tails.push_back({Action::simple(ActionKind::Idle)});

  for (const auto& tail : tails) {
    Plan extended = r.plan;
    for (const auto& a : tail) {
      PlanStep st = base;
      st.action = a;
      extended.steps.push_back(st);
    }
    extended = reconcile(s, extended);
    if (!validate(s, extended, opt_.validate).feasible) continue;
    EditScript script = r.script;
    const int n = static_cast<int>(current.steps.size());
    const int first = static_cast<int>(r.plan.steps.size());
    for (std::size_t k = 0; k < tail.size(); ++k)
      script.ops.push_back({EditKind::Insert, n + 1, first + static_cast<int>(k) + 1,
                            extended.steps[static_cast<std::size_t>(first) + k], std::nullopt, std::nullopt});
    script.cost = static_cast<int>(script.ops.size());
    script.profile = profile_of(script.ops);
    return {extended, script, out.note + ", terminal " + tail.back().name() + " appended"};
  }
  return out;
}

SupervisorOutput LlmSupervisor::repair(const Scenario& s, const Plan& current, const ViolationReport& report,
                                       int iteration) {
  const LlmProfile& p = gateway_->profile(profile_);
  PromptContext ctx = canonical_context(s);
  std::string prompt = build_supervisor_prompt(ctx, current, report);
  std::string text = strip_preamble(gateway_->complete(p, prompt, s.name, iteration));
  try {
    return {parse_plan(text), std::nullopt, "llm " + profile_};
  } catch (const SchemaError& e) {
    std::string retry = prompt + "\n# your previous answer was rejected: " + std::string(e.what()) +
                        "\n# reply with plan lines only\n";
    std::string again = strip_preamble(gateway_->complete(p, retry, s.name, iteration));
    return {parse_plan(again), std::nullopt, "llm " + profile_ + " (re-prompted)"};
  }
}

RepairResult repair_loop(const Scenario& s, const Plan& draft, Supervisor& sup, const LoopOptions& opt) {
  if (opt.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  RepairResult r;
  Plan plan = draft;
  std::optional<EditScript> single_script;
  int successes = 0;
  std::optional<Plan> failed_on;
  std::string failed_note;
  for (int it = 1; it <= opt.max_iters; ++it) {
    ViolationReport rep = validate(s, plan, opt.validate);
    if (rep.feasible) {
      r.feasible = true;
      r.report = rep;
      break;
    }
    JustificationEntry entry;
    entry.iteration = it;
    entry.supervisor = sup.name();
    entry.violations = rep.violations;
    ++r.repairs;
    if (sup.deterministic() && failed_on && *failed_on == plan) {
      entry.note = "failed: " + failed_note;
      r.log.push_back(std::move(entry));
      continue;
    }
    try {
      SupervisorOutput out = sup.repair(s, plan, rep, it);
      EditScript step_script = out.script ? *out.script : edit_script(plan, out.plan);
      entry.pairs = pair_ops(rep.violations, step_script.ops);
      entry.note = out.note;
      single_script = ++successes == 1 ? out.script : std::nullopt;
      plan = std::move(out.plan);
    } catch (const Error& e) {
      failed_on = plan;
      failed_note = e.what();
      entry.note = "failed: " + failed_note;
    }
    r.log.push_back(std::move(entry));
  }
  if (!r.feasible) {
    r.report = validate(s, plan, opt.validate);
    r.feasible = r.report.feasible;
  }
  r.plan = plan;
  r.iterations_used = r.feasible ? std::max(1, r.repairs) : opt.max_iters;
  if (successes == 1 && single_script)
    r.script = *single_script;
  else
    r.script = edit_script(draft, plan);
  return r;
}

std::string script_json(const EditScript& s) {
  nlohmann::ordered_json j;
  j["cost"] = s.cost;
  j["profile"] = {{"insertions", s.profile.insertions},
                  {"substitutions", s.profile.substitutions},
                  {"reorders", s.profile.reorders}};
  nlohmann::ordered_json ops = nlohmann::ordered_json::array();
  for (const auto& op : s.ops) {
    nlohmann::ordered_json o;
    o["kind"] = edit_kind_name(op.kind);
    o["source"] = op.source;
    o["result"] = op.result;
    o["action"] = op_action_name(op);
    if (op.replaced) o["replaced"] = op.replaced->name();
    if (op.payload) o["location"] = op.payload->location;
    o["describe"] = op.describe();
    ops.push_back(o);
  }
  j["ops"] = ops;
  return j.dump();
}

std::string repair_json(const RepairResult& r, int indent) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["outcome"] = r.feasible ? "feasible" : "infeasible";
  j["iterations_used"] = r.iterations_used;
  j["repairs"] = r.repairs;
  j["script"] = ordered_json::parse(script_json(r.script));
  ordered_json lines = ordered_json::array();
  for (const auto& st : r.plan.steps) lines.push_back(serialize_step(st));
  j["plan"] = lines;
  j["report"] = ordered_json::parse(report_json(r.report));
  ordered_json log = ordered_json::array();
  for (const auto& e : r.log) {
    ordered_json o;
    o["iteration"] = e.iteration;
    o["supervisor"] = e.supervisor;
    o["violations"] = e.violations.size();
    o["note"] = e.note;
    ordered_json pairs = ordered_json::array();
    for (const auto& [v, op] : e.pairs) {
      ordered_json p;
      p["edit"] = op.describe();
      p["violation"] = v ? ordered_json(check_name(v->cls) + ": " + v->detail) : ordered_json(nullptr);
      pairs.push_back(p);
    }
    o["justification"] = pairs;
    log.push_back(o);
  }
  j["log"] = log;
  return j.dump(indent) + "\n";
}

}  // namespace robosched
