#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace robosched {

using LocationId = std::string;
using RobotId = std::string;
using TaskId = std::string;

enum class ActionKind {
  MoveTo,     // MOVE_<location>, one edge of the site graph
  MoveDir,    // MOVE_Left / MOVE_Right / MOVE_Up / MOVE_Down on a grid
  Navigate,   // NAVIGATE(<location>), shortest path
  Pick,
  Build,
  Charge,
  Scan,
  Idle,
  MarkLayout,
  Inspect,
  CoCarry,
};

enum class Direction { Left, Right, Up, Down };

enum class Skill { Move, Pick, Build, Charge, Scan, Idle, MarkLayout, Inspect, CoCarry };

struct Action {
  ActionKind kind = ActionKind::Idle;
  LocationId target;  // MoveTo / Navigate only
  Direction dir = Direction::Left;  // MoveDir only

  static Action move_to(LocationId loc) { return {ActionKind::MoveTo, std::move(loc), Direction::Left}; }
  static Action move_dir(Direction d) { return {ActionKind::MoveDir, {}, d}; }
  static Action navigate(LocationId loc) { return {ActionKind::Navigate, std::move(loc), Direction::Left}; }
  static Action simple(ActionKind k) { return {k, {}, Direction::Left}; }

  bool is_motion() const {
    return kind == ActionKind::MoveTo || kind == ActionKind::MoveDir || kind == ActionKind::Navigate;
  }

  /// Canonical spelling, e.g. "MOVE_S", "MOVE_Left", "NAVIGATE(B)", "PICK".
  std::string name() const;

  friend bool operator==(const Action& a, const Action& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == ActionKind::MoveDir) return a.dir == b.dir;
    return a.target == b.target;
  }
  friend std::strong_ordering operator<=>(const Action& a, const Action& b) { return a.name() <=> b.name(); }
};

/// Case-insensitive parse of an action token; nullopt for unknown names.
std::optional<Action> parse_action(std::string_view text);

std::optional<Skill> parse_skill(std::string_view text);
std::string skill_name(Skill s);

/// Skill an action consumes; IDLE needs none.
std::optional<Skill> required_skill(const Action& a);

/// Skill gating the task type named by an action kind.
Skill skill_for_kind(ActionKind k);

using SkillSet = std::set<Skill>;

// Grid cells are addressed as "(x,y)"; x grows to the right, y grows upward.
struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

std::string cell_id(Cell c);
std::optional<Cell> parse_cell(std::string_view text);

std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

}  // namespace robosched
