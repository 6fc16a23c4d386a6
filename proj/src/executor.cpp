#include "robosched/executor.hpp"

#include <algorithm>

namespace robosched {

std::string fault_name(ExecFault f) {
  switch (f) {
    case ExecFault::NoEdge:
      return "no-edge";
    case ExecFault::OffGrid:
      return "off-grid";
    case ExecFault::Blocked:
      return "blocked";
    case ExecFault::NotAGrid:
      return "not-a-grid";
    case ExecFault::UnknownLocation:
      return "unknown-location";
    case ExecFault::NoPath:
      return "no-path";
    case ExecFault::ChargeAwayFromCharger:
      return "charge-away-from-charger";
    case ExecFault::PickAwayFromStock:
      return "pick-away-from-stock";
    case ExecFault::UnknownRobot:
      return "unknown-robot";
  }
  return "unknown";
}

RobotState* WorldState::find(const RobotId& id) {
  for (auto& r : robots)
    if (r.id == id) return &r;
  return nullptr;
}

const RobotState* WorldState::find(const RobotId& id) const {
  for (const auto& r : robots)
    if (r.id == id) return &r;
  return nullptr;
}

ExecError::ExecError(ExecFailure f, Trace partial)
    : Error("step " + std::to_string(f.step) + ": " + fault_name(f.kind) + ": " + f.message),
      failure_(std::move(f)),
      partial_(std::move(partial)) {}

WorldState initial_state(const Scenario& s) {
  WorldState w;
  for (const auto& r : s.robots) w.robots.push_back({r.id, r.start_location, r.battery_init, r.cargo_init, 0.0});
  w.stock = s.resources;
  return w;
}

Simulator::Simulator(const Scenario& s) : scenario_(&s), state_(initial_state(s)) {}

RobotId Simulator::resolve_robot(const PlanStep& step) const {
  if (step.robot.empty()) return scenario_->robots.size() == 1 ? scenario_->robots.front().id : RobotId{};
  for (const auto& r : step.actors())
    if (!scenario_->find_robot(r)) return {};
  return step.robot;
}

std::optional<StepRecord> Simulator::apply(const PlanStep& step, std::size_t plan_index, ExecFailure* fault) {
  const Scenario& s = *scenario_;
  auto fail = [&](ExecFault kind, const std::string& msg, const RobotId& robot) -> std::optional<StepRecord> {
    if (fault) *fault = {plan_index, step.step, robot, kind, msg};
    return std::nullopt;
  };
  RobotId id = resolve_robot(step);
  if (id.empty()) return fail(ExecFault::UnknownRobot, "step names no robot of the scenario", step.robot);
  const RobotSpec& spec = *s.find_robot(id);
  RobotState cur = *state_.find(id);

  StepRecord rec;
  rec.plan_index = plan_index;
  rec.step = step;
  rec.robot = id;
  rec.from = cur.location;
  rec.start = cur.clock;
  for (const auto& m : step.actors())
    if (!m.empty() && m != id) rec.start = std::max(rec.start, state_.find(m)->clock);

  WorldState next = state_;
  RobotState& r = *next.find(id);
  const Action& a = step.action;
  switch (a.kind) {
    case ActionKind::MoveTo: {
      if (!s.site.traversable(a.target))
        return fail(ExecFault::UnknownLocation, "unknown location " + a.target, id);
      auto du = s.site.edge_du(cur.location, a.target);
      if (!du) return fail(ExecFault::NoEdge, "no edge " + cur.location + " -> " + a.target, id);
      rec.du = *du;
      rec.path = {a.target};
      break;
    }
    case ActionKind::MoveDir: {
      if (s.site.kind != SiteKind::Grid) return fail(ExecFault::NotAGrid, a.name() + " needs a grid site", id);
      auto to = s.site.step(cur.location, a.dir);
      if (!to) {
        auto c = parse_cell(cur.location);
        Cell n = *c;
        if (a.dir == Direction::Left) --n.x;
        if (a.dir == Direction::Right) ++n.x;
        if (a.dir == Direction::Up) ++n.y;
        if (a.dir == Direction::Down) --n.y;
        if (s.site.has_location(cell_id(n))) return fail(ExecFault::Blocked, "cell " + cell_id(n) + " is blocked", id);
        return fail(ExecFault::OffGrid, "move leaves the grid at " + cur.location, id);
      }
      rec.du = 1.0;
      rec.path = {*to};
      break;
    }
    case ActionKind::Navigate: {
      if (!s.site.traversable(a.target))
        return fail(ExecFault::UnknownLocation, "unknown location " + a.target, id);
      auto path = s.site.shortest_path(cur.location, a.target);
      if (!path) return fail(ExecFault::NoPath, "no path to " + a.target, id);
      rec.du = path->du;
      rec.path = path->hops;
      break;
    }
    case ActionKind::Pick: {
      auto it = next.stock.find(cur.location);
      if (it == next.stock.end()) return fail(ExecFault::PickAwayFromStock, "no stockpile at " + cur.location, id);
      int n = std::min({3, spec.payload_capacity - r.cargo, it->second});
      n = std::max(n, 0);
      it->second -= n;
      r.cargo += n;
      rec.moved = n;
      rec.tu = s.cost.pick_build_tu_per_3mu;
      break;
    }
    case ActionKind::Build: {
      int n = std::min(3, r.cargo);
      r.cargo -= n;
      next.placed += n;
      rec.moved = n;
      rec.tu = s.cost.pick_build_tu_per_3mu;
      break;
    }
    case ActionKind::Charge: {
      if (!s.site.chargers.count(cur.location))
        return fail(ExecFault::ChargeAwayFromCharger, "no charger at " + cur.location, id);
      rec.topup = spec.battery_max - r.battery;
      r.battery = spec.battery_max;
      rec.tu = s.cost.recharge_tu;
      break;
    }
    case ActionKind::Scan: {
      next.scanned.insert(cur.location);
      for (const auto& c : s.site.footprint(cur.location, s.cost.scan_footprint)) next.discovered.insert(c);
      rec.tu = s.cost.scan_tu_per_su;
      break;
    }
    case ActionKind::Idle:
    case ActionKind::MarkLayout:
    case ActionKind::Inspect:
    case ActionKind::CoCarry:
      rec.tu = s.cost.idle_tu;
      break;
  }
  if (a.is_motion()) {
    r.location = rec.path.empty() ? cur.location : rec.path.back();
    r.battery -= s.cost.battery_per_du * rec.du;
    rec.tu = s.cost.tu_per_du * rec.du;
  }
  rec.end = rec.start + rec.tu;
  for (const auto& m : step.actors()) next.find(m.empty() ? id : m)->clock = rec.end;
  next.elapsed = 0.0;
  for (const auto& rs : next.robots) next.elapsed = std::max(next.elapsed, rs.clock);
  state_ = std::move(next);
  rec.after = state_;
  return rec;
}

Trace simulate(const Scenario& s, const Plan& p) {
  Trace t;
  Simulator sim(s);
  t.initial = sim.state();

  // Per-robot queues of plan indices, merged by (start time, roster order).
  std::vector<std::vector<std::size_t>> queues(s.robots.size());
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    RobotId id = sim.resolve_robot(p.steps[i]);
    if (id.empty()) {
      t.fault = ExecFailure{i, p.steps[i].step, p.steps[i].robot, ExecFault::UnknownRobot,
                            "step names no robot of the scenario"};
      t.final_state = sim.state();
      return t;
    }
    for (std::size_t k = 0; k < s.robots.size(); ++k)
      if (s.robots[k].id == id) queues[k].push_back(i);
  }
  std::vector<std::size_t> head(queues.size(), 0);
  while (true) {
    std::optional<std::size_t> best;
    double best_start = 0.0;
    for (std::size_t k = 0; k < queues.size(); ++k) {
      if (head[k] >= queues[k].size()) continue;
      const PlanStep& st = p.steps[queues[k][head[k]]];
      double start = 0.0;
      for (const auto& m : st.actors()) {
        const RobotState* rs = sim.state().find(m.empty() ? s.robots[k].id : m);
        if (rs) start = std::max(start, rs->clock);
      }
      if (!best || start < best_start) {
        best = k;
        best_start = start;
      }
    }
    if (!best) break;
    std::size_t idx = queues[*best][head[*best]++];
    ExecFailure f;
    auto rec = sim.apply(p.steps[idx], idx, &f);
    if (!rec) {
      t.fault = f;
      break;
    }
    t.records.push_back(std::move(*rec));
  }
  t.final_state = sim.state();
  return t;
}

Trace execute(const Scenario& s, const Plan& p) {
  Trace t = simulate(s, p);
  if (t.fault) {
    ExecFailure f = *t.fault;
    throw ExecError(std::move(f), std::move(t));
  }
  return t;
}

double makespan(const Trace& t) { return t.final_state.elapsed; }

CoverageResult coverage_complete(const Scenario& s, const Trace& t) {
  CoverageResult out;
  if (s.site.kind != SiteKind::Grid) return out;
  for (const auto& c : s.site.all_locations())
    if (!t.final_state.discovered.count(c)) out.missing.push_back(c);
  out.complete = out.missing.empty();
  return out;
}

}  // namespace robosched
