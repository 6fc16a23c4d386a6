#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "robosched/errors.hpp"
#include "robosched/plan.hpp"
#include "robosched/prompt_context.hpp"
#include "robosched/validator.hpp"

namespace robosched {

enum class Role { Generator, Supervisor };
std::string role_name(Role r);

struct LlmProfile {
  std::string name;
  Role role = Role::Supervisor;
  std::string provider = "mock";  // "mock" or "openai"
  std::string endpoint;           // e.g. https://host/v1/chat/completions
  std::string model_name;
  double temperature = 0.0;
  std::vector<std::string> stop_tokens;
  int max_tokens = 1024;
  std::string api_key_env;  // defaults to <NAME>_API_KEY
  std::optional<int> seed;
  std::string mock_key;  // manifest `profile` field; defaults to name
  std::string label;     // display name in reports; defaults to name
  std::string strategy;  // free-text description for the edit-profile table
};

enum class GatewayErrorKind { Transport, Auth, RateLimit, MalformedResponse };
std::string gateway_error_name(GatewayErrorKind k);

class GatewayError : public Error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& what)
      : Error(gateway_error_name(kind) + ": " + what), kind_(kind) {}
  GatewayErrorKind kind() const { return kind_; }

 private:
  GatewayErrorKind kind_;
};

/// Reads `llm_profiles.json`: {"profiles": {"<name>": {...}}}. Throws ConfigError.
std::map<std::string, LlmProfile> load_profiles(const std::string& path);
std::map<std::string, LlmProfile> parse_profiles(const std::string& json_text);

struct MockEntry {
  std::string profile;  // empty matches any profile
  Role role = Role::Generator;
  std::string scenario;
  int iteration = 0;
  std::string file;
};

class LlmGateway {
 public:
  LlmGateway(std::map<std::string, LlmProfile> profiles, std::string manifest_path = {});

  const LlmProfile& profile(const std::string& name) const;
  bool has_profile(const std::string& name) const { return profiles_.count(name) > 0; }

  /// Raw completion. Mock profiles look up (profile, role, scenario, iteration).
  std::string complete(const LlmProfile& p, const std::string& prompt, const std::string& scenario, int iteration);

  std::vector<std::string> call_log() const;

 private:
  std::string complete_mock(const LlmProfile& p, const std::string& scenario, int iteration) const;
  std::string complete_http(const LlmProfile& p, const std::string& prompt) const;

  std::map<std::string, LlmProfile> profiles_;
  std::string manifest_dir_;
  std::vector<MockEntry> entries_;
  mutable std::mutex mu_;
  std::vector<std::string> log_;
};

std::string build_generator_prompt(const PromptContext& ctx);
std::string build_supervisor_prompt(const PromptContext& ctx, const Plan& draft, const ViolationReport& report);

/// Keeps the lines from the first STEP line through the last one, minus code fences.
std::string strip_preamble(const std::string& text);

}  // namespace robosched
