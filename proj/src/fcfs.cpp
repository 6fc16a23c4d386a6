#include "robosched/fcfs.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "robosched/errors.hpp"
#include "robosched/repair.hpp"

namespace robosched {

namespace {

constexpr double kEps = 1e-9;

struct Cursor {
  LocationId location;
  double clock = 0.0;
};

std::vector<Action> task_actions(const TaskSpec& t) {
  std::vector<Action> out;
  switch (t.type) {
    case ActionKind::Navigate:
      out.push_back(Action::navigate(t.location));
      break;
    case ActionKind::MoveTo:
    case ActionKind::MoveDir:
      break;
    case ActionKind::Pick:
    case ActionKind::Build: {
      int n = std::max(1, (t.demand + 2) / 3);
      out.assign(n, Action::simple(t.type));
      break;
    }
    default:
      out.assign(std::max(1, t.demand), Action::simple(t.type));
  }
  return out;
}

double action_tu(const Scenario& s, const Action& a) {
  switch (a.kind) {
    case ActionKind::Pick:
    case ActionKind::Build:
      return s.cost.pick_build_tu_per_3mu;
    case ActionKind::Charge:
      return s.cost.recharge_tu;
    case ActionKind::Scan:
      return s.cost.scan_tu_per_su;
    default:
      return s.cost.idle_tu;
  }
}

// Connecting moves along the shortest path, one hop per step.
std::vector<std::pair<Action, double>> moves(const Scenario& s, const LocationId& from, const LocationId& to) {
  std::vector<std::pair<Action, double>> out;
  if (from == to) return out;
  auto path = s.site.shortest_path(from, to);
  if (!path) throw RealizationError("no path from " + from + " to " + to);
  LocationId cur = from;
  for (const auto& hop : path->hops) {
    double du = *s.site.edge_du(cur, hop);
    if (s.site.kind == SiteKind::Grid) {
      Cell a = *parse_cell(cur), b = *parse_cell(hop);
      Direction d = b.x < a.x ? Direction::Left : b.x > a.x ? Direction::Right : b.y > a.y ? Direction::Up : Direction::Down;
      out.push_back({Action::move_dir(d), du});
    } else {
      out.push_back({Action::move_to(hop), du});
    }
    cur = hop;
  }
  return out;
}

double travel_tu(const Scenario& s, const LocationId& from, const LocationId& to) {
  double tu = 0.0;
  for (const auto& [a, du] : moves(s, from, to)) tu += s.cost.tu_per_du * du;
  return tu;
}

double task_tu(const Scenario& s, const TaskSpec& t, const LocationId& from) {
  if (t.type == ActionKind::Navigate) return travel_tu(s, from, t.location);
  double tu = 0.0;
  for (const auto& a : task_actions(t)) tu += action_tu(s, a);
  return tu;
}

std::vector<TaskId> declaration_order(const Scenario& s) {
  std::vector<TaskId> out;
  for (const auto& t : s.tasks) out.push_back(t.id);
  return out;
}

}  // namespace

FcfsResult fcfs_schedule(const Scenario& s) {
  auto order = s.dag.topological_order(declaration_order(s));
  if (!order) throw ValidationError("/dag", "precedence graph contains a cycle");
  std::map<RobotId, Cursor> cur;
  for (const auto& r : s.robots) cur[r.id] = {r.start_location, 0.0};
  std::map<TaskId, double> done;
  FcfsResult out;
  for (const auto& id : *order) {
    const TaskSpec& t = *s.find_task(id);
    const RobotSpec* pick = nullptr;
    for (const auto& r : s.robots) {
      if (!std::includes(r.skills.begin(), r.skills.end(), t.required_skills.begin(), t.required_skills.end()))
        continue;
      if (!pick || cur[r.id].clock < cur[pick->id].clock - kEps ||
          (std::fabs(cur[r.id].clock - cur[pick->id].clock) <= kEps && r.id < pick->id))
        pick = &r;
    }
    if (!pick) throw UnassignableTask(t.id);
    Cursor& c = cur[pick->id];
    bool walks = t.type != ActionKind::Navigate;
    double arrival = c.clock + (walks ? travel_tu(s, c.location, t.location) : 0.0);
    double ready = arrival;
    for (const auto& p : s.dag.predecessors(t.id)) ready = std::max(ready, done[p]);
    double pad = ready > arrival + kEps ? std::ceil((ready - arrival) / s.cost.idle_tu - kEps) : 0.0;
    double theta = arrival + pad * s.cost.idle_tu;
    out.assignment.alpha[t.id] = {pick->id};
    out.assignment.theta[t.id] = theta;
    c.clock = theta + task_tu(s, t, c.location);
    c.location = t.location;
    done[t.id] = c.clock;
  }
  out.plan = realize_schedule(s, out.assignment);
  return out;
}

Plan realize_schedule(const Scenario& s, const Assignment& a) {
  std::vector<const TaskSpec*> tasks;
  for (const auto& t : s.tasks)
    if (a.alpha.count(t.id)) tasks.push_back(&t);
  std::stable_sort(tasks.begin(), tasks.end(),
                   [&](const TaskSpec* x, const TaskSpec* y) { return a.theta.at(x->id) < a.theta.at(y->id) - kEps; });
  std::map<RobotId, Cursor> cur;
  for (const auto& r : s.robots) cur[r.id] = {r.start_location, 0.0};
  bool prefixed = s.robots.size() > 1;
  Plan plan;
  auto emit = [&](const RobotId& robot, const Action& act) {
    PlanStep st;
    st.robot = prefixed ? robot : RobotId{};
    st.action = act;
    plan.steps.push_back(st);
  };
  for (const TaskSpec* t : tasks) {
    const auto& robots = a.alpha.at(t->id);
    if (robots.empty()) throw RealizationError("task " + t->id + " has an empty robot set");
    const RobotId& r = robots.front();
    if (!s.find_robot(r)) throw RealizationError("task " + t->id + " assigned to unknown robot " + r);
    Cursor& c = cur[r];
    LocationId from = c.location;
    if (t->type != ActionKind::Navigate)
      for (const auto& [act, du] : moves(s, c.location, t->location)) {
        emit(r, act);
        c.clock += s.cost.tu_per_du * du;
      }
    c.location = t->location;
    double theta = a.theta.at(t->id);
    if (theta < c.clock - kEps)
      throw RealizationError("task " + t->id + " starts at " + format_number(theta) + " TU but robot " + r +
                             " arrives at " + format_number(c.clock) + " TU");
    while (c.clock < theta - kEps) {
      emit(r, Action::simple(ActionKind::Idle));
      c.clock += s.cost.idle_tu;
    }
    for (const auto& act : task_actions(*t)) {
      emit(r, act);
      c.clock += act.kind == ActionKind::Navigate ? travel_tu(s, from, t->location) : action_tu(s, act);
    }
  }
  return reconcile(s, plan);
}

std::string assignment_json(const Assignment& a, int indent) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json alpha = nlohmann::ordered_json::object();
  for (const auto& [t, rs] : a.alpha) alpha[t] = rs;
  nlohmann::ordered_json theta = nlohmann::ordered_json::object();
  for (const auto& [t, v] : a.theta) theta[t] = v;
  j["alpha"] = alpha;
  j["theta"] = theta;
  return j.dump(indent) + "\n";
}

}  // namespace robosched
