#include "robosched/action.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <utility>

namespace robosched {

namespace {

constexpr std::array<std::pair<ActionKind, std::string_view>, 8> kSimpleNames{{
    {ActionKind::Pick, "PICK"},
    {ActionKind::Build, "BUILD"},
    {ActionKind::Charge, "CHARGE"},
    {ActionKind::Scan, "SCAN"},
    {ActionKind::Idle, "IDLE"},
    {ActionKind::MarkLayout, "MARK_LAYOUT"},
    {ActionKind::Inspect, "INSPECT"},
    {ActionKind::CoCarry, "CO_CARRY"},
}};

constexpr std::array<std::pair<Direction, std::string_view>, 4> kDirNames{{
    {Direction::Left, "Left"},
    {Direction::Right, "Right"},
    {Direction::Up, "Up"},
    {Direction::Down, "Down"},
}};

constexpr std::array<std::pair<Skill, std::string_view>, 9> kSkillNames{{
    {Skill::Move, "MOVE"},
    {Skill::Pick, "PICK"},
    {Skill::Build, "BUILD"},
    {Skill::Charge, "CHARGE"},
    {Skill::Scan, "SCAN"},
    {Skill::Idle, "IDLE"},
    {Skill::MarkLayout, "MARK_LAYOUT"},
    {Skill::Inspect, "INSPECT"},
    {Skill::CoCarry, "CO_CARRY"},
}};

bool valid_location_token(std::string_view s) {
  if (s.empty()) return false;
  if (parse_cell(s)) return true;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

}  // namespace

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string cell_id(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

std::optional<Cell> parse_cell(std::string_view text) {
  std::string t;
  for (char c : text)
    if (c != ' ') t.push_back(c);
  if (t.size() < 5 || t.front() != '(' || t.back() != ')') return std::nullopt;
  auto comma = t.find(',');
  if (comma == std::string::npos) return std::nullopt;
  Cell c;
  auto parse_int = [](std::string_view v, int& out) {
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    return ec == std::errc() && p == v.data() + v.size();
  };
  std::string_view body(t);
  if (!parse_int(body.substr(1, comma - 1), c.x)) return std::nullopt;
  if (!parse_int(body.substr(comma + 1, t.size() - comma - 2), c.y)) return std::nullopt;
  return c;
}

std::string Action::name() const {
  switch (kind) {
    case ActionKind::MoveTo:
      return "MOVE_" + target;
    case ActionKind::MoveDir:
      for (auto [d, n] : kDirNames)
        if (d == dir) return "MOVE_" + std::string(n);
      break;
    case ActionKind::Navigate:
      return "NAVIGATE(" + target + ")";
    default:
      for (auto [k, n] : kSimpleNames)
        if (k == kind) return std::string(n);
  }
  return "IDLE";
}

std::optional<Action> parse_action(std::string_view raw) {
  std::string text = trim(raw);
  std::string upper = to_upper(text);
  for (auto [k, n] : kSimpleNames)
    if (upper == n) return Action::simple(k);
  if (upper.rfind("NAVIGATE", 0) == 0) {
    std::string rest = trim(std::string_view(text).substr(8));
    if (rest.size() >= 2 && rest.front() == '(' && rest.back() == ')') rest = trim(rest.substr(1, rest.size() - 2));
    if (auto c = parse_cell(rest)) return Action::navigate(cell_id(*c));
    if (!valid_location_token(rest)) return std::nullopt;
    return Action::navigate(to_upper(rest));
  }
  if (upper.rfind("MOVE_", 0) == 0) {
    std::string rest = text.substr(5);
    std::string rest_upper = to_upper(rest);
    for (auto [d, n] : kDirNames)
      if (rest_upper == to_upper(n)) return Action::move_dir(d);
    if (!valid_location_token(rest) || parse_cell(rest)) return std::nullopt;
    return Action::move_to(rest_upper);
  }
  return std::nullopt;
}

std::optional<Skill> parse_skill(std::string_view text) {
  std::string upper = to_upper(trim(text));
  if (upper == "NAVIGATE") return Skill::Move;
  for (auto [s, n] : kSkillNames)
    if (upper == n) return s;
  return std::nullopt;
}

std::string skill_name(Skill s) {
  for (auto [k, n] : kSkillNames)
    if (k == s) return std::string(n);
  return "IDLE";
}

Skill skill_for_kind(ActionKind k) {
  switch (k) {
    case ActionKind::MoveTo:
    case ActionKind::MoveDir:
    case ActionKind::Navigate:
      return Skill::Move;
    case ActionKind::Pick:
      return Skill::Pick;
    case ActionKind::Build:
      return Skill::Build;
    case ActionKind::Charge:
      return Skill::Charge;
    case ActionKind::Scan:
      return Skill::Scan;
    case ActionKind::Idle:
      return Skill::Idle;
    case ActionKind::MarkLayout:
      return Skill::MarkLayout;
    case ActionKind::Inspect:
      return Skill::Inspect;
    case ActionKind::CoCarry:
      return Skill::CoCarry;
  }
  return Skill::Idle;
}

std::optional<Skill> required_skill(const Action& a) {
  if (a.kind == ActionKind::Idle) return std::nullopt;
  return skill_for_kind(a.kind);
}

}  // namespace robosched
