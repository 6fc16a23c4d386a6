#include "robosched/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

#include "json.hpp"
#include "robosched/errors.hpp"

namespace robosched {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownSafetyRules{"no_go"};
const std::set<std::string> kReservedNames{"LEFT", "RIGHT", "UP", "DOWN"};

std::string fmt_num(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

std::string skills_text(const SkillSet& s) {
  std::vector<std::string> names;
  for (auto k : s) names.push_back(skill_name(k));
  return join(names, ", ");
}

class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {}

  const json& at(const json& obj, const std::string& key, const std::string& ptr) const {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(ptr + "/" + key, "missing required field");
    return obj.at(key);
  }

  double number(const json& v, const std::string& ptr) const {
    if (!v.is_number()) throw ParseError(ptr, "expected a number");
    return v.get<double>();
  }

  int integer(const json& v, const std::string& ptr) const {
    double d = number(v, ptr);
    if (d != std::floor(d)) throw ParseError(ptr, "expected an integer");
    return static_cast<int>(d);
  }

  std::string string(const json& v, const std::string& ptr) const {
    if (!v.is_string()) throw ParseError(ptr, "expected a string");
    return v.get<std::string>();
  }

  const json& array(const json& v, const std::string& ptr) const {
    if (!v.is_array()) throw ParseError(ptr, "expected an array");
    return v;
  }

 private:
  const json& root_;
};

LocationId read_location(const json& v, SiteKind kind, const std::string& ptr) {
  if (kind == SiteKind::Grid) {
    if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer())
      return cell_id({v[0].get<int>(), v[1].get<int>()});
    if (v.is_string()) {
      if (auto c = parse_cell(v.get<std::string>())) return cell_id(*c);
    }
    throw ParseError(ptr, "expected a grid cell [x, y] or \"(x,y)\"");
  }
  if (!v.is_string()) throw ParseError(ptr, "expected a location name");
  return to_upper(trim(v.get<std::string>()));
}

json write_location(const LocationId& loc, SiteKind kind) {
  if (kind == SiteKind::Grid) {
    auto c = parse_cell(loc);
    return json::array({c->x, c->y});
  }
  return loc;
}

std::optional<ActionKind> parse_task_type(std::string_view text) {
  std::string u = to_upper(trim(text));
  if (u == "NAVIGATE" || u == "MOVE") return ActionKind::Navigate;
  if (auto a = parse_action(u); a && !a->is_motion()) return a->kind;
  return std::nullopt;
}

SkillSet read_skills(const json& v, const std::string& ptr) {
  if (!v.is_array()) throw ParseError(ptr, "expected an array of skill names");
  SkillSet out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::string p = ptr + "/" + std::to_string(i);
    if (!v[i].is_string()) throw ParseError(p, "expected a skill name");
    auto s = parse_skill(v[i].get<std::string>());
    if (!s) throw ValidationError(p, "unknown action name '" + v[i].get<std::string>() + "'");
    out.insert(*s);
  }
  return out;
}

std::string footprint_key(ScanFootprint fp) {
  switch (fp) {
    case ScanFootprint::Self:
      return "self";
    case ScanFootprint::Chebyshev1:
      return "chebyshev1";
    case ScanFootprint::RowColLos:
      return "row_col_los";
  }
  return "row_col_los";
}

}  // namespace

std::string footprint_name(ScanFootprint fp) { return footprint_key(fp); }

std::string task_type_name(ActionKind k) {
  if (k == ActionKind::Navigate || k == ActionKind::MoveTo || k == ActionKind::MoveDir) return "NAVIGATE";
  return Action::simple(k).name();
}

// ---------------------------------------------------------------------------
// SiteMap

void SiteMap::index() {
  adjacency_.clear();
  if (kind == SiteKind::NamedGraph) {
    for (const auto& n : nodes) adjacency_[n];
    for (const auto& e : edges) {
      adjacency_[e.a].push_back({e.b, e.du});
      adjacency_[e.b].push_back({e.a, e.du});
    }
    for (auto& [_, v] : adjacency_) std::sort(v.begin(), v.end());
    return;
  }
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      Cell c{x, y};
      if (blocked.count(c)) continue;
      auto& adj = adjacency_[cell_id(c)];
      for (Cell n : {Cell{x - 1, y}, Cell{x + 1, y}, Cell{x, y - 1}, Cell{x, y + 1}}) {
        if (n.x < 0 || n.y < 0 || n.x >= width || n.y >= height || blocked.count(n)) continue;
        adj.push_back({cell_id(n), 1.0});
      }
      std::sort(adj.begin(), adj.end());
    }
}

bool SiteMap::has_location(const LocationId& loc) const {
  if (kind == SiteKind::NamedGraph) return std::find(nodes.begin(), nodes.end(), loc) != nodes.end();
  auto c = parse_cell(loc);
  return c && c->x >= 0 && c->y >= 0 && c->x < width && c->y < height;
}

bool SiteMap::traversable(const LocationId& loc) const { return adjacency_.count(loc) > 0; }

std::optional<double> SiteMap::edge_du(const LocationId& from, const LocationId& to) const {
  auto it = adjacency_.find(from);
  if (it == adjacency_.end()) return std::nullopt;
  std::optional<double> best;
  for (const auto& [n, w] : it->second)
    if (n == to && (!best || w < *best)) best = w;
  return best;
}

std::vector<std::pair<LocationId, double>> SiteMap::neighbors(const LocationId& loc) const {
  auto it = adjacency_.find(loc);
  if (it == adjacency_.end()) return {};
  return it->second;
}

std::optional<LocationId> SiteMap::step(const LocationId& from, Direction d) const {
  if (kind != SiteKind::Grid) return std::nullopt;
  auto c = parse_cell(from);
  if (!c) return std::nullopt;
  switch (d) {
    case Direction::Left:
      --c->x;
      break;
    case Direction::Right:
      ++c->x;
      break;
    case Direction::Up:
      ++c->y;
      break;
    case Direction::Down:
      --c->y;
      break;
  }
  auto id = cell_id(*c);
  if (!traversable(id)) return std::nullopt;
  return id;
}

std::optional<Path> SiteMap::shortest_path(const LocationId& from, const LocationId& to) const {
  if (!traversable(from) || !traversable(to)) return std::nullopt;
  if (from == to) return Path{};
  using Item = std::pair<double, LocationId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  std::map<LocationId, double> dist;
  std::map<LocationId, LocationId> prev;
  dist[from] = 0.0;
  pq.push({0.0, from});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == to) break;
    for (const auto& [v, w] : neighbors(u)) {
      double nd = d + w;
      auto it = dist.find(v);
      if (it == dist.end() || nd < it->second) {
        dist[v] = nd;
        prev[v] = u;
        pq.push({nd, v});
      }
    }
  }
  if (!dist.count(to)) return std::nullopt;
  Path p;
  p.du = dist[to];
  for (LocationId cur = to; cur != from; cur = prev[cur]) p.hops.push_back(cur);
  std::reverse(p.hops.begin(), p.hops.end());
  return p;
}

std::vector<LocationId> SiteMap::all_locations() const {
  if (kind == SiteKind::NamedGraph) return nodes;
  std::vector<LocationId> out;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (!blocked.count({x, y})) out.push_back(cell_id({x, y}));
  return out;
}

std::vector<LocationId> SiteMap::footprint(const LocationId& at, ScanFootprint fp) const {
  if (kind != SiteKind::Grid || fp == ScanFootprint::Self) return {at};
  auto c = parse_cell(at);
  if (!c) return {at};
  auto ok = [&](Cell q) { return q.x >= 0 && q.y >= 0 && q.x < width && q.y < height && !blocked.count(q); };
  std::vector<LocationId> out{at};
  if (fp == ScanFootprint::Chebyshev1) {
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        Cell q{c->x + dx, c->y + dy};
        if ((dx || dy) && ok(q)) out.push_back(cell_id(q));
      }
    return out;
  }
  const int dirs[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  for (const auto& d : dirs) {
    Cell q{c->x + d[0], c->y + d[1]};
    while (ok(q)) {
      out.push_back(cell_id(q));
      q = {q.x + d[0], q.y + d[1]};
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// PrecedenceDag

std::optional<std::vector<TaskId>> PrecedenceDag::topological_order(const std::vector<TaskId>& order) const {
  std::map<TaskId, int> indegree;
  for (const auto& t : order) indegree[t] = 0;
  for (const auto& [a, b] : edges) {
    indegree[a];
    ++indegree[b];
  }
  std::vector<TaskId> out;
  std::set<TaskId> done;
  // Stable: repeatedly take the first ready task in declaration order.
  std::vector<TaskId> all = order;
  for (const auto& [t, _] : indegree)
    if (std::find(all.begin(), all.end(), t) == all.end()) all.push_back(t);
  while (out.size() < all.size()) {
    bool progressed = false;
    for (const auto& t : all) {
      if (done.count(t) || indegree[t] != 0) continue;
      out.push_back(t);
      done.insert(t);
      for (const auto& [a, b] : edges)
        if (a == t) --indegree[b];
      progressed = true;
      break;
    }
    if (!progressed) return std::nullopt;
  }
  return out;
}

std::vector<TaskId> PrecedenceDag::predecessors(const TaskId& t) const {
  std::vector<TaskId> out;
  for (const auto& [a, b] : edges)
    if (b == t) out.push_back(a);
  return out;
}

// ---------------------------------------------------------------------------
// Scenario

const RobotSpec* Scenario::find_robot(const RobotId& id) const {
  for (const auto& r : robots)
    if (r.id == id) return &r;
  return nullptr;
}

const TaskSpec* Scenario::find_task(const TaskId& id) const {
  for (const auto& t : tasks)
    if (t.id == id) return &t;
  return nullptr;
}

SkillSet Scenario::skill_union() const {
  SkillSet out;
  for (const auto& r : robots) out.insert(r.skills.begin(), r.skills.end());
  return out;
}

bool Scenario::rule_enabled(const std::string& rule) const {
  return std::find(safety_rules.begin(), safety_rules.end(), rule) != safety_rules.end();
}

namespace {

void validate_site(SiteMap& site) {
  if (site.kind == SiteKind::NamedGraph) {
    std::set<LocationId> seen;
    for (std::size_t i = 0; i < site.nodes.size(); ++i) {
      const auto& n = site.nodes[i];
      std::string p = "/site/nodes/" + std::to_string(i);
      if (n.empty()) throw ValidationError(p, "empty location name");
      std::string upper = n;
      std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
      if (kReservedNames.count(upper)) throw ValidationError(p, "location name '" + n + "' is reserved for grid moves");
      if (!seen.insert(n).second) throw ValidationError(p, "duplicate location '" + n + "'");
    }
    for (std::size_t i = 0; i < site.edges.size(); ++i) {
      const auto& e = site.edges[i];
      std::string p = "/site/edges/" + std::to_string(i);
      if (!seen.count(e.a)) throw ValidationError(p, "unknown location '" + e.a + "'");
      if (!seen.count(e.b)) throw ValidationError(p, "unknown location '" + e.b + "'");
      if (e.a == e.b) throw ValidationError(p, "self-loop edge");
      if (!(e.du > 0)) throw ValidationError(p, "edge weight must be > 0 DU");
    }
  } else {
    if (site.width <= 0 || site.height <= 0) throw ValidationError("/site", "grid dimensions must be positive");
    for (Cell c : site.blocked)
      if (c.x < 0 || c.y < 0 || c.x >= site.width || c.y >= site.height)
        throw ValidationError("/site/blocked", "blocked cell " + cell_id(c) + " outside the grid");
  }
  site.index();
  for (const auto& z : site.no_go)
    if (!site.has_location(z)) throw ValidationError("/site/no_go", "unknown location '" + z + "'");
  for (const auto& c : site.chargers)
    if (!site.traversable(c)) throw ValidationError("/site/chargers", "charger '" + c + "' is not traversable");
  if (site.goal && !site.traversable(*site.goal))
    throw ValidationError("/site/goal", "goal '" + *site.goal + "' is not traversable");

  auto locs = site.all_locations();
  if (!locs.empty()) {
    std::set<LocationId> reached{locs.front()};
    std::deque<LocationId> q{locs.front()};
    while (!q.empty()) {
      auto u = q.front();
      q.pop_front();
      for (const auto& [v, _] : site.neighbors(u))
        if (reached.insert(v).second) q.push_back(v);
    }
    if (reached.size() != locs.size()) throw ValidationError("/site", "site is not connected over traversable locations");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& default_name) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), "malformed JSON");
  }
  if (!root.is_object()) throw ParseError("/", "expected a JSON object");
  Reader rd(root);
  Scenario s;
  s.name = root.contains("name") ? rd.string(root["name"], "/name") : default_name;
  s.instruction = root.contains("instruction") ? rd.string(root["instruction"], "/instruction") : "";

  // site
  const json& site = rd.at(root, "site", "");
  std::string kind = rd.string(rd.at(site, "kind", "/site"), "/site/kind");
  if (kind == "named_graph") {
    s.site.kind = SiteKind::NamedGraph;
    const json& nodes = rd.array(rd.at(site, "nodes", "/site"), "/site/nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i)
      s.site.nodes.push_back(read_location(nodes[i], SiteKind::NamedGraph, "/site/nodes/" + std::to_string(i)));
    if (site.contains("edges")) {
      const json& edges = rd.array(site["edges"], "/site/edges");
      for (std::size_t i = 0; i < edges.size(); ++i) {
        std::string p = "/site/edges/" + std::to_string(i);
        const json& e = edges[i];
        Edge edge;
        if (e.is_array() && e.size() == 3) {
          edge.a = read_location(e[0], SiteKind::NamedGraph, p + "/0");
          edge.b = read_location(e[1], SiteKind::NamedGraph, p + "/1");
          edge.du = rd.number(e[2], p + "/2");
        } else if (e.is_object()) {
          edge.a = read_location(rd.at(e, "from", p), SiteKind::NamedGraph, p + "/from");
          edge.b = read_location(rd.at(e, "to", p), SiteKind::NamedGraph, p + "/to");
          edge.du = rd.number(rd.at(e, "du", p), p + "/du");
        } else {
          throw ParseError(p, "expected [from, to, du] or {from, to, du}");
        }
        s.site.edges.push_back(edge);
      }
    }
  } else if (kind == "grid") {
    s.site.kind = SiteKind::Grid;
    s.site.width = rd.integer(rd.at(site, "width", "/site"), "/site/width");
    s.site.height = rd.integer(rd.at(site, "height", "/site"), "/site/height");
    if (site.contains("blocked")) {
      const json& b = rd.array(site["blocked"], "/site/blocked");
      for (std::size_t i = 0; i < b.size(); ++i)
        s.site.blocked.insert(*parse_cell(read_location(b[i], SiteKind::Grid, "/site/blocked/" + std::to_string(i))));
    }
  } else {
    throw ParseError("/site/kind", "expected \"named_graph\" or \"grid\"");
  }
  auto read_loc_set = [&](const char* key, std::set<LocationId>& out) {
    if (!site.contains(key)) return;
    std::string p = std::string("/site/") + key;
    const json& arr = rd.array(site[key], p);
    for (std::size_t i = 0; i < arr.size(); ++i)
      out.insert(read_location(arr[i], s.site.kind, p + "/" + std::to_string(i)));
  };
  read_loc_set("no_go", s.site.no_go);
  read_loc_set("chargers", s.site.chargers);
  if (site.contains("goal") && !site["goal"].is_null()) s.site.goal = read_location(site["goal"], s.site.kind, "/site/goal");
  validate_site(s.site);

  // robots
  const json& robots = rd.array(rd.at(root, "robots", ""), "/robots");
  std::set<RobotId> robot_ids;
  for (std::size_t i = 0; i < robots.size(); ++i) {
    std::string p = "/robots/" + std::to_string(i);
    const json& r = robots[i];
    RobotSpec spec;
    spec.id = to_lower(trim(rd.string(rd.at(r, "id", p), p + "/id")));
    if (spec.id.empty()) throw ValidationError(p + "/id", "empty robot id");
    if (spec.id.find_first_of("+:,[] ") != std::string::npos)
      throw ValidationError(p + "/id", "robot id may not contain '+', ':', ',', '[', ']' or spaces");
    if (!robot_ids.insert(spec.id).second) throw ValidationError(p + "/id", "duplicate robot id '" + spec.id + "'");
    spec.skills = read_skills(rd.at(r, "skills", p), p + "/skills");
    spec.payload_capacity = rd.integer(rd.at(r, "payload_capacity", p), p + "/payload_capacity");
    spec.battery_max = r.contains("battery_max") ? rd.number(r["battery_max"], p + "/battery_max") : 100.0;
    spec.battery_init = r.contains("battery_init") ? rd.number(r["battery_init"], p + "/battery_init") : spec.battery_max;
    spec.start_location = read_location(rd.at(r, "start_location", p), s.site.kind, p + "/start_location");
    spec.cargo_init = r.contains("cargo_init") ? rd.integer(r["cargo_init"], p + "/cargo_init") : 0;
    if (!(0 <= spec.battery_init && spec.battery_init <= spec.battery_max && spec.battery_max <= 100))
      throw ValidationError(p, "require 0 <= battery_init <= battery_max <= 100");
    if (spec.payload_capacity < 0) throw ValidationError(p + "/payload_capacity", "negative capacity");
    if (spec.cargo_init < 0 || spec.cargo_init > spec.payload_capacity)
      throw ValidationError(p + "/cargo_init", "cargo_init must be within [0, payload_capacity]");
    if (!s.site.traversable(spec.start_location))
      throw ValidationError(p + "/start_location", "unknown or blocked location '" + spec.start_location + "'");
    s.robots.push_back(std::move(spec));
  }

  // tasks
  std::set<TaskId> task_ids;
  if (root.contains("tasks")) {
    const json& tasks = rd.array(root["tasks"], "/tasks");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      std::string p = "/tasks/" + std::to_string(i);
      const json& t = tasks[i];
      TaskSpec spec;
      spec.id = to_lower(trim(rd.string(rd.at(t, "id", p), p + "/id")));
      if (spec.id.empty()) throw ValidationError(p + "/id", "empty task id");
      if (!task_ids.insert(spec.id).second) throw ValidationError(p + "/id", "duplicate task id '" + spec.id + "'");
      auto type = parse_task_type(rd.string(rd.at(t, "type", p), p + "/type"));
      if (!type) throw ValidationError(p + "/type", "unknown task type");
      spec.type = *type;
      spec.required_skills = t.contains("required_skills") ? read_skills(t["required_skills"], p + "/required_skills")
                                                           : SkillSet{skill_for_kind(spec.type)};
      spec.location = read_location(rd.at(t, "location", p), s.site.kind, p + "/location");
      spec.demand = t.contains("demand") ? rd.integer(t["demand"], p + "/demand") : 0;
      spec.duration = t.contains("duration") ? rd.number(t["duration"], p + "/duration") : 1.0;
      if (!s.site.traversable(spec.location))
        throw ValidationError(p + "/location", "unknown location '" + spec.location + "'");
      if (!(spec.duration > 0)) throw ValidationError(p + "/duration", "duration must be > 0");
      if (spec.demand < 0) throw ValidationError(p + "/demand", "demand must be >= 0");
      s.tasks.push_back(std::move(spec));
    }
  }

  // dag
  if (root.contains("dag")) {
    const json& dag = rd.array(root["dag"], "/dag");
    for (std::size_t i = 0; i < dag.size(); ++i) {
      std::string p = "/dag/" + std::to_string(i);
      const json& e = dag[i];
      if (!e.is_array() || e.size() != 2) throw ParseError(p, "expected [before, after]");
      TaskId a = to_lower(trim(rd.string(e[0], p + "/0")));
      TaskId b = to_lower(trim(rd.string(e[1], p + "/1")));
      if (!task_ids.count(a)) throw ValidationError(p + "/0", "unknown task '" + a + "'");
      if (!task_ids.count(b)) throw ValidationError(p + "/1", "unknown task '" + b + "'");
      s.dag.edges.push_back({a, b});
    }
    std::vector<TaskId> order;
    for (const auto& t : s.tasks) order.push_back(t.id);
    if (!s.dag.topological_order(order)) throw ValidationError("/dag", "precedence graph contains a cycle");
  }

  // cost
  if (root.contains("cost")) {
    const json& c = root["cost"];
    if (!c.is_object()) throw ParseError("/cost", "expected an object");
    auto rate = [&](const char* key, double& out) {
      if (!c.contains(key)) return;
      std::string p = std::string("/cost/") + key;
      out = rd.number(c[key], p);
      if (out < 0) throw ValidationError(p, "negative rate");
    };
    rate("battery_per_du", s.cost.battery_per_du);
    rate("tu_per_du", s.cost.tu_per_du);
    rate("pick_build_tu_per_3mu", s.cost.pick_build_tu_per_3mu);
    rate("recharge_tu", s.cost.recharge_tu);
    rate("scan_tu_per_su", s.cost.scan_tu_per_su);
    rate("idle_tu", s.cost.idle_tu);
    if (c.contains("scan_footprint")) {
      std::string fp = rd.string(c["scan_footprint"], "/cost/scan_footprint");
      if (fp == "self")
        s.cost.scan_footprint = ScanFootprint::Self;
      else if (fp == "chebyshev1")
        s.cost.scan_footprint = ScanFootprint::Chebyshev1;
      else if (fp == "row_col_los")
        s.cost.scan_footprint = ScanFootprint::RowColLos;
      else
        throw ValidationError("/cost/scan_footprint", "unknown footprint '" + fp + "'");
    }
  }

  // resources
  if (root.contains("resources")) {
    const json& res = root["resources"];
    if (!res.is_object()) throw ParseError("/resources", "expected an object");
    for (const auto& [k, v] : res.items()) {
      std::string p = "/resources/" + k;
      LocationId loc = read_location(json(k), s.site.kind, p);
      if (!s.site.traversable(loc)) throw ValidationError(p, "unknown location '" + loc + "'");
      int mu = rd.integer(v, p);
      if (mu < 0) throw ValidationError(p, "negative stock");
      s.resources[loc] = mu;
    }
  }

  if (root.contains("safety_rules")) {
    const json& rules = rd.array(root["safety_rules"], "/safety_rules");
    for (std::size_t i = 0; i < rules.size(); ++i) {
      std::string p = "/safety_rules/" + std::to_string(i);
      std::string r = to_lower(trim(rd.string(rules[i], p)));
      if (!kKnownSafetyRules.count(r)) throw ValidationError(p, "unknown safety rule '" + r + "'");
      s.safety_rules.push_back(r);
    }
  }

  SkillSet all = s.skill_union();
  for (const auto& t : s.tasks)
    for (auto k : t.required_skills)
      if (!all.count(k)) s.warnings.push_back("task " + t.id + " requires skill " + skill_name(k) + " that no robot has");
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string stem = std::filesystem::path(path).filename().string();
  for (const char* ext : {".scn.json", ".json"}) {
    std::string e(ext);
    if (stem.size() > e.size() && stem.compare(stem.size() - e.size(), e.size(), e) == 0) {
      stem.resize(stem.size() - e.size());
      break;
    }
  }
  try {
    return parse_scenario(buf.str(), stem);
  } catch (const ParseError& e) {
    throw ParseError(path + ":" + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ":" + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  }
}

std::string serialize_scenario(const Scenario& s) {
  json root;
  root["name"] = s.name;
  root["instruction"] = s.instruction;
  json site;
  SiteKind k = s.site.kind;
  if (k == SiteKind::NamedGraph) {
    site["kind"] = "named_graph";
    site["nodes"] = s.site.nodes;
    json edges = json::array();
    for (const auto& e : s.site.edges) edges.push_back({e.a, e.b, e.du});
    site["edges"] = edges;
  } else {
    site["kind"] = "grid";
    site["width"] = s.site.width;
    site["height"] = s.site.height;
    json blocked = json::array();
    for (Cell c : s.site.blocked) blocked.push_back({c.x, c.y});
    site["blocked"] = blocked;
  }
  auto loc_array = [&](const std::set<LocationId>& xs) {
    json a = json::array();
    for (const auto& x : xs) a.push_back(write_location(x, k));
    return a;
  };
  site["no_go"] = loc_array(s.site.no_go);
  site["chargers"] = loc_array(s.site.chargers);
  if (s.site.goal) site["goal"] = write_location(*s.site.goal, k);
  root["site"] = site;

  json robots = json::array();
  for (const auto& r : s.robots) {
    json skills = json::array();
    for (auto sk : r.skills) skills.push_back(skill_name(sk));
    robots.push_back({{"id", r.id},
                      {"skills", skills},
                      {"payload_capacity", r.payload_capacity},
                      {"battery_max", r.battery_max},
                      {"battery_init", r.battery_init},
                      {"start_location", write_location(r.start_location, k)},
                      {"cargo_init", r.cargo_init}});
  }
  root["robots"] = robots;
  json tasks = json::array();
  for (const auto& t : s.tasks) {
    json skills = json::array();
    for (auto sk : t.required_skills) skills.push_back(skill_name(sk));
    tasks.push_back({{"id", t.id},
                     {"type", task_type_name(t.type)},
                     {"required_skills", skills},
                     {"location", write_location(t.location, k)},
                     {"demand", t.demand},
                     {"duration", t.duration}});
  }
  root["tasks"] = tasks;
  json dag = json::array();
  for (const auto& [a, b] : s.dag.edges) dag.push_back({a, b});
  root["dag"] = dag;
  root["cost"] = {{"battery_per_du", s.cost.battery_per_du},
                  {"tu_per_du", s.cost.tu_per_du},
                  {"pick_build_tu_per_3mu", s.cost.pick_build_tu_per_3mu},
                  {"recharge_tu", s.cost.recharge_tu},
                  {"scan_tu_per_su", s.cost.scan_tu_per_su},
                  {"idle_tu", s.cost.idle_tu},
                  {"scan_footprint", footprint_key(s.cost.scan_footprint)}};
  json res = json::object();
  for (const auto& [loc, mu] : s.resources) res[loc] = mu;
  root["resources"] = res;
  root["safety_rules"] = s.safety_rules;
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Stage-0 context

PromptContext canonical_context(const Scenario& s) {
  PromptContext ctx;
  std::ostringstream bg;
  if (s.site.kind == SiteKind::NamedGraph) {
    bg << "site: named graph\n";
    bg << "locations: " << join(s.site.nodes, ", ") << "\n";
    std::vector<std::string> edges;
    for (const auto& e : s.site.edges) edges.push_back(e.a + "-" + e.b + " " + fmt_num(e.du) + " DU");
    if (!edges.empty()) bg << "edges: " << join(edges, "; ") << "\n";
  } else {
    bg << "site: grid " << s.site.width << "x" << s.site.height << " (x grows right, y grows up; 1 DU per move)\n";
    std::vector<std::string> blocked;
    for (Cell c : s.site.blocked) blocked.push_back(cell_id(c));
    if (!blocked.empty()) bg << "blocked cells: " << join(blocked, ", ") << "\n";
    if (s.site.goal) bg << "goal: " << *s.site.goal << "\n";
    bg << "scan footprint: " << footprint_key(s.cost.scan_footprint) << "\n";
  }
  if (!s.site.chargers.empty())
    bg << "chargers: " << join(std::vector<std::string>(s.site.chargers.begin(), s.site.chargers.end()), ", ") << "\n";
  if (!s.resources.empty()) {
    std::vector<std::string> piles;
    for (const auto& [loc, mu] : s.resources) piles.push_back(loc + "=" + std::to_string(mu) + " MU");
    bg << "stockpiles: " << join(piles, ", ") << "\n";
  }
  if (!s.site.no_go.empty())
    bg << "# no-go zones\n"
       << "no-go: " << join(std::vector<std::string>(s.site.no_go.begin(), s.site.no_go.end()), ", ") << "\n";
  bg << "costs: battery " << fmt_num(s.cost.battery_per_du) << "%/DU; move " << fmt_num(s.cost.tu_per_du)
     << " TU/DU; PICK/BUILD " << fmt_num(s.cost.pick_build_tu_per_3mu) << " TU per 3 MU; recharge "
     << fmt_num(s.cost.recharge_tu) << " TU; scan " << fmt_num(s.cost.scan_tu_per_su) << " TU/SU; idle "
     << fmt_num(s.cost.idle_tu) << " TU\n";
  ctx.background = bg.str();

  std::ostringstream tasks;
  if (!s.instruction.empty()) tasks << "instruction: " << s.instruction << "\n";
  for (const auto& t : s.tasks)
    tasks << "- " << t.id << ": " << task_type_name(t.type) << " at " << t.location << ", demand " << t.demand
          << " MU, duration " << fmt_num(t.duration) << " TU, skills {" << skills_text(t.required_skills) << "}\n";
  if (!s.dag.edges.empty()) {
    std::vector<std::string> prec;
    for (const auto& [a, b] : s.dag.edges) prec.push_back(a + " < " + b);
    tasks << "precedence: " << join(prec, "; ") << "\n";
  }
  ctx.task_text = tasks.str();

  std::ostringstream roster;
  for (const auto& r : s.robots)
    roster << "- id: " << r.id << " | skills: " << skills_text(r.skills) << " | capacity: " << r.payload_capacity
           << " MU | battery: " << fmt_num(r.battery_init) << "/" << fmt_num(r.battery_max)
           << " % | start: " << r.start_location << " | cargo: " << r.cargo_init << " MU\n";
  ctx.roster = roster.str();

  std::ostringstream api;
  api << kStepSchemaLine << "\n";
  api << "line format: STEP <k>, [<CURRENT_LOCATION>], <ACTION>, [<INTERNAL_CARGO>], <PLACED_BRICKS>, "
         "[<REMAINING_BATTERY>]\n";
  if (s.robots.size() > 1) api << "multi-robot lines are prefixed with '<robot>:'\n";
  std::vector<std::string> actions;
  SkillSet skills = s.skill_union();
  if (skills.count(Skill::Move)) {
    if (s.site.kind == SiteKind::Grid)
      actions.insert(actions.end(), {"MOVE_Left", "MOVE_Right", "MOVE_Up", "MOVE_Down"});
    else
      for (const auto& n : s.site.nodes) actions.push_back("MOVE_" + n);
    actions.push_back("NAVIGATE(<location>)");
  }
  for (auto k : skills)
    if (k != Skill::Move) actions.push_back(skill_name(k));
  if (!skills.count(Skill::Idle)) actions.push_back("IDLE");
  api << "actions: " << join(actions, ", ") << "\n";
  ctx.api_schema = api.str();

  ctx.guardrails = {
      "respect precedence; do not duplicate actions; keep battery non-negative",
      "do: CHARGE only at a charger; PICK only at a stockpile; BUILD only at the build site",
      "do: change CURRENT_LOCATION only through MOVE/NAVIGATE actions",
      "don't: exceed payload capacity or enter no-go zones",
  };
  return ctx;
}

std::string PromptContext::render() const {
  std::ostringstream os;
  os << "# background\n" << background;
  os << "# tasks\n" << task_text;
  os << "# robots\n" << roster;
  os << "# api schema\n" << api_schema;
  if (!guardrails.empty()) {
    os << "# rules\n";
    for (const auto& g : guardrails) os << "# " << g << "\n";
  }
  if (!few_shot.empty()) {
    os << "# examples\n";
    for (std::size_t i = 0; i < few_shot.size(); ++i) {
      os << "## example " << i + 1 << "\n";
      if (!few_shot[i].context.empty()) os << few_shot[i].context << (few_shot[i].context.back() == '\n' ? "" : "\n");
      os << few_shot[i].plan << (few_shot[i].plan.empty() || few_shot[i].plan.back() == '\n' ? "" : "\n");
    }
  }
  return os.str();
}

}  // namespace robosched
