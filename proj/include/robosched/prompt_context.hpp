#pragma once

#include <string>
#include <vector>

namespace robosched {

inline constexpr const char* kStepSchemaLine =
    "STEP, CURRENT_LOCATION, ACTION, INTERNAL_CARGO, PLACED_BRICKS, REMAINING_BATTERY";

struct Exemplar {
  std::string context;
  std::string plan;
};

struct PromptContext {
  std::string background;
  std::string task_text;
  std::string roster;
  std::string api_schema;
  std::vector<Exemplar> few_shot;
  std::vector<std::string> guardrails;

  /// Deterministic text rendering of all sections.
  std::string render() const;
};

}  // namespace robosched
