#include "robosched/plan.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>

#include "robosched/errors.hpp"

namespace robosched {

namespace {

struct LineFailure {
  int step;
  std::string reason;
};

std::vector<std::string> split_fields(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

std::string unbracket(const std::string& f) {
  if (f.size() >= 2 && f.front() == '[' && f.back() == ']') return trim(std::string_view(f).substr(1, f.size() - 2));
  return f;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(std::string s) {
  if (!s.empty() && s.back() == '%') s = trim(std::string_view(s).substr(0, s.size() - 1));
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool location_token(const std::string& s) {
  if (s.empty()) return false;
  if (parse_cell(s)) return true;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

// Parses one non-blank line into `out`; returns a failure on malformed input.
std::optional<LineFailure> parse_line(const std::string& line, PlanStep& out) {
  std::string upper = to_upper(line);
  std::size_t kw = upper.find("STEP");
  if (kw == std::string::npos) return LineFailure{0, "missing STEP keyword"};
  std::string prefix = trim(std::string_view(line).substr(0, kw));
  out = PlanStep{};
  if (!prefix.empty()) {
    if (prefix.back() != ':') return LineFailure{0, "unexpected text before STEP"};
    prefix = trim(std::string_view(prefix).substr(0, prefix.size() - 1));
    std::vector<RobotId> members;
    std::size_t start = 0;
    while (true) {
      std::size_t plus = prefix.find('+', start);
      std::string id = to_lower(trim(std::string_view(prefix).substr(start, plus - start)));
      if (id.empty() || id.find_first_of(" ,[]():") != std::string::npos)
        return LineFailure{0, "malformed robot prefix"};
      members.push_back(id);
      if (plus == std::string::npos) break;
      start = plus + 1;
    }
    out.robot = members.front();
    if (members.size() > 1) out.coalition = members;
  }

  std::size_t pos = kw + 4;
  while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '=')) ++pos;
  std::size_t digits = pos;
  while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
  auto step = parse_int(std::string_view(line).substr(pos, digits - pos));
  if (!step) return LineFailure{0, "missing step index"};
  if (*step < 1) return LineFailure{0, "step index must be >= 1"};
  out.step = *step;

  std::string rest = trim(std::string_view(line).substr(digits));
  if (!rest.empty() && (rest.front() == ',' || rest.front() == ':')) rest = trim(std::string_view(rest).substr(1));
  auto fields = split_fields(rest);
  if (fields.size() == 1 && rest.size() >= 2 && rest.front() == '(' && rest.back() == ')')
    fields = split_fields(std::string_view(rest).substr(1, rest.size() - 2));
  if (fields.size() != 5) return LineFailure{*step, "expected 6 fields, found " + std::to_string(fields.size() + 1)};

  std::string loc = unbracket(fields[0]);
  if (!location_token(loc)) return LineFailure{*step, "malformed location '" + loc + "'"};
  out.location = normalize_location(loc);

  std::string act = unbracket(fields[1]);
  auto action = parse_action(act);
  if (!action) return LineFailure{*step, "unknown action " + act};
  out.action = *action;
  if (!out.coalition.empty() && action->kind != ActionKind::CoCarry)
    return LineFailure{*step, "coalition prefix is only allowed on CO_CARRY"};

  auto cargo = parse_int(unbracket(fields[2]));
  if (!cargo || *cargo < 0) return LineFailure{*step, "malformed cargo '" + fields[2] + "'"};
  auto placed = parse_int(unbracket(fields[3]));
  if (!placed || *placed < 0) return LineFailure{*step, "malformed placed count '" + fields[3] + "'"};
  auto battery = parse_double(unbracket(fields[4]));
  if (!battery) return LineFailure{*step, "malformed battery '" + fields[4] + "'"};
  out.cargo = *cargo;
  out.placed = *placed;
  out.battery = *battery;
  return std::nullopt;
}

void group_by_roster(Plan& p) {
  std::map<RobotId, std::size_t> rank;
  for (std::size_t i = 0; i < p.roster.size(); ++i) rank[p.roster[i]] = i;
  std::stable_sort(p.steps.begin(), p.steps.end(), [&](const PlanStep& a, const PlanStep& b) {
    std::size_t ra = a.robot.empty() ? 0 : rank[a.robot];
    std::size_t rb = b.robot.empty() ? 0 : rank[b.robot];
    return ra < rb;
  });
}

}  // namespace

std::vector<RobotId> PlanStep::actors() const {
  if (!coalition.empty()) return coalition;
  return {robot};
}

LocationId normalize_location(std::string_view text) {
  std::string t = trim(text);
  if (auto c = parse_cell(t)) return cell_id(*c);
  return to_upper(t);
}

std::string format_number(double v) {
  if (v == 0) return "0";
  if (v == std::floor(v) && std::fabs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

PlanParse parse_plan_lenient(const std::string& text) {
  PlanParse out;
  std::map<RobotId, int> expected;
  bool saw_prefixed = false;
  bool saw_bare = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    std::string raw = text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    start = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string line = trim(raw);
    if (line.empty()) continue;

    PlanStep step;
    auto fail = parse_line(line, step);
    int& next = expected[step.robot];
    if (fail) {
      if (next == 0) next = 1;
      out.errors.push_back({line_no, fail->step, fail->reason});
      next = fail->step ? std::max(next, fail->step + 1) : next + 1;
      continue;
    }
    (step.robot.empty() ? saw_bare : saw_prefixed) = true;
    if (saw_bare && saw_prefixed) {
      out.errors.push_back({line_no, step.step, "mixed prefixed and unprefixed lines"});
      continue;
    }
    if (next == 0) next = step.step;
    if (step.step != next) {
      std::string reason = step.step < next ? "duplicate step index " + std::to_string(step.step)
                                            : "expected step " + std::to_string(next) + ", found " +
                                                  std::to_string(step.step);
      out.errors.push_back({line_no, step.step, reason});
      next = std::max(next, step.step + 1);
      continue;
    }
    ++next;
    for (const auto& r : step.actors())
      if (!r.empty() && std::find(out.plan.roster.begin(), out.plan.roster.end(), r) == out.plan.roster.end())
        out.plan.roster.push_back(r);
    out.plan.steps.push_back(std::move(step));
  }
  group_by_roster(out.plan);
  return out;
}

Plan parse_plan(const std::string& text) {
  auto r = parse_plan_lenient(text);
  if (!r.errors.empty()) throw SchemaError(r.errors.front().line, r.errors.front().reason);
  return std::move(r.plan);
}

std::string serialize_step(const PlanStep& s) {
  std::string out;
  if (!s.coalition.empty()) {
    for (std::size_t i = 0; i < s.coalition.size(); ++i) out += (i ? "+" : "") + s.coalition[i];
    out += ": ";
  } else if (!s.robot.empty()) {
    out += s.robot + ": ";
  }
  out += "STEP " + std::to_string(s.step) + ", [" + s.location + "], " + s.action.name() + ", [" +
         std::to_string(s.cargo) + "], " + std::to_string(s.placed) + ", [" + format_number(s.battery) + "]";
  return out;
}

std::string serialize_plan(const Plan& p) {
  Plan grouped = p;
  group_by_roster(grouped);
  std::string out;
  for (const auto& s : grouped.steps) out += serialize_step(s) + "\n";
  return out;
}

std::vector<std::string> tokenize_plan(const Plan& p, bool full_fields) {
  std::vector<std::string> out;
  out.reserve(p.steps.size() * (full_fields ? 5 : 2));
  for (const auto& s : p.steps) {
    out.push_back(s.action.name());
    out.push_back(s.location);
    if (full_fields) {
      out.push_back(std::to_string(s.cargo));
      out.push_back(std::to_string(s.placed));
      out.push_back(format_number(s.battery));
    }
  }
  return out;
}

void renumber(Plan& p) {
  p.roster.clear();
  for (const auto& s : p.steps)
    for (const auto& r : s.actors())
      if (!r.empty() && std::find(p.roster.begin(), p.roster.end(), r) == p.roster.end()) p.roster.push_back(r);
  group_by_roster(p);
  std::map<RobotId, int> next;
  for (auto& s : p.steps) s.step = ++next[s.robot];
}

}  // namespace robosched
