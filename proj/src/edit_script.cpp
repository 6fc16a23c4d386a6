#include "robosched/repair.hpp"

#include <algorithm>
#include <map>

#include "robosched/executor.hpp"

namespace robosched {

namespace {

bool same_token(const PlanStep& a, const PlanStep& b) {
  return a.action == b.action && a.robot == b.robot && a.coalition == b.coalition;
}

// Lexicographic (cost, indels): substitutions win ties against insert/delete pairs.
struct Cell2 {
  int cost = 0;
  int indels = 0;
  friend auto operator<=>(const Cell2&, const Cell2&) = default;
};

}  // namespace

std::string edit_kind_name(EditKind k) {
  switch (k) {
    case EditKind::Insert:
      return "insert";
    case EditKind::Substitute:
      return "substitute";
    case EditKind::Transpose:
      return "transpose";
    case EditKind::Delete:
      return "delete";
  }
  return "insert";
}

std::string EditOp::describe() const {
  std::string at = "S" + std::to_string(result);
  switch (kind) {
    case EditKind::Insert:
      return at + ": " + payload->action.name() + " (+) at " + payload->location;
    case EditKind::Substitute:
      return at + ": " + replaced->name() + "->" + payload->action.name();
    case EditKind::Transpose:
      return at + "<->S" + std::to_string(result + 1) + ": " + swapped->name() + " moved earlier";
    case EditKind::Delete:
      return "S" + std::to_string(source) + ": " + replaced->name() + " (-)";
  }
  return at;
}

std::vector<int> EditScript::touched() const {
  std::vector<int> out;
  for (const auto& op : ops) {
    out.push_back(op.result);
    if (op.kind == EditKind::Transpose) out.push_back(op.result + 1);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

EditProfile profile_of(const std::vector<EditOp>& ops) {
  EditProfile p;
  for (const auto& op : ops) {
    if (op.kind == EditKind::Insert) ++p.insertions;
    if (op.kind == EditKind::Substitute || op.kind == EditKind::Delete) ++p.substitutions;
    if (op.kind == EditKind::Transpose) ++p.reorders;
  }
  return p;
}

EditScript edit_script(const Plan& from, const Plan& to) {
  const auto& a = from.steps;
  const auto& b = to.steps;
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<Cell2>> d(n + 1, std::vector<Cell2>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = {static_cast<int>(i), static_cast<int>(i)};
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = {static_cast<int>(j), static_cast<int>(j)};
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      bool eq = same_token(a[i - 1], b[j - 1]);
      Cell2 best = eq ? d[i - 1][j - 1] : Cell2{d[i - 1][j - 1].cost + 1, d[i - 1][j - 1].indels};
      best = std::min(best, Cell2{d[i - 1][j].cost + 1, d[i - 1][j].indels + 1});
      best = std::min(best, Cell2{d[i][j - 1].cost + 1, d[i][j - 1].indels + 1});
      if (i > 1 && j > 1 && same_token(a[i - 1], b[j - 2]) && same_token(a[i - 2], b[j - 1]) &&
          !same_token(a[i - 1], a[i - 2]))
        best = std::min(best, Cell2{d[i - 2][j - 2].cost + 1, d[i - 2][j - 2].indels});
      d[i][j] = best;
    }

  std::vector<EditOp> ops;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const Cell2 cur = d[i][j];
    if (i > 0 && j > 0 && same_token(a[i - 1], b[j - 1]) && d[i - 1][j - 1] == cur) {
      --i, --j;
      continue;
    }
    if (i > 1 && j > 1 && same_token(a[i - 1], b[j - 2]) && same_token(a[i - 2], b[j - 1]) &&
        !same_token(a[i - 1], a[i - 2]) && Cell2{d[i - 2][j - 2].cost + 1, d[i - 2][j - 2].indels} == cur) {
      EditOp op{EditKind::Transpose, static_cast<int>(i - 1), static_cast<int>(j - 1), b[j - 2], std::nullopt,
                a[i - 1].action};
      ops.push_back(op);
      i -= 2, j -= 2;
      continue;
    }
    if (i > 0 && j > 0 && !same_token(a[i - 1], b[j - 1]) &&
        Cell2{d[i - 1][j - 1].cost + 1, d[i - 1][j - 1].indels} == cur) {
      ops.push_back({EditKind::Substitute, static_cast<int>(i), static_cast<int>(j), b[j - 1], a[i - 1].action,
                     std::nullopt});
      --i, --j;
      continue;
    }
    if (j > 0 && Cell2{d[i][j - 1].cost + 1, d[i][j - 1].indels + 1} == cur) {
      ops.push_back({EditKind::Insert, static_cast<int>(i + 1), static_cast<int>(j), b[j - 1], std::nullopt,
                     std::nullopt});
      --j;
      continue;
    }
    ops.push_back({EditKind::Delete, static_cast<int>(i), static_cast<int>(j + 1), std::nullopt, a[i - 1].action,
                   std::nullopt});
    --i;
  }
  std::reverse(ops.begin(), ops.end());
  EditScript out;
  out.ops = std::move(ops);
  out.cost = d[n][m].cost;
  out.profile = profile_of(out.ops);
  return out;
}

Plan apply_script(const Plan& from, const EditScript& script) {
  std::vector<EditOp> ops = script.ops;
  std::stable_sort(ops.begin(), ops.end(), [](const EditOp& x, const EditOp& y) { return x.source < y.source; });
  Plan out;
  std::size_t k = 0;
  const int n = static_cast<int>(from.steps.size());
  for (int src = 1; src <= n + 1; ++src) {
    bool consumed = false;
    while (k < ops.size() && ops[k].source == src) {
      const EditOp& op = ops[k++];
      switch (op.kind) {
        case EditKind::Insert:
          out.steps.push_back(*op.payload);
          break;
        case EditKind::Substitute:
          out.steps.push_back(*op.payload);
          consumed = true;
          break;
        case EditKind::Delete:
          consumed = true;
          break;
        case EditKind::Transpose:
          out.steps.push_back(from.steps[src]);
          out.steps.push_back(from.steps[src - 1]);
          consumed = true;
          ++src;
          break;
      }
      if (consumed) break;
    }
    if (!consumed && src <= n) out.steps.push_back(from.steps[src - 1]);
  }
  renumber(out);
  return out;
}

Plan reconcile(const Scenario& s, const Plan& p) {
  Plan out = p;
  renumber(out);
  Trace t = simulate(s, out);
  for (const auto& r : t.records) {
    PlanStep& st = out.steps[r.plan_index];
    const RobotState* rs = r.after.find(r.robot);
    st.location = rs->location;
    st.cargo = rs->cargo;
    st.placed = r.after.placed;
    st.battery = rs->battery;
  }
  return out;
}

}  // namespace robosched
