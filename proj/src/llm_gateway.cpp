#include "robosched/llm_gateway.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace robosched {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Role parse_role(const std::string& r) {
  std::string l = to_lower(trim(r));
  if (l == "generator") return Role::Generator;
  if (l == "supervisor") return Role::Supervisor;
  throw ConfigError("unknown role '" + r + "'");
}

std::string counterexample(CheckClass c) {
  switch (c) {
    case CheckClass::Battery:
      return "bad: MOVE at 0% leaves [-25]; good: MOVE to the charger and CHARGE before the battery runs out";
    case CheckClass::Precedence:
      return "bad: BUILD before the PICK it depends on; good: finish every predecessor task first";
    case CheckClass::Capability:
      return "bad: SCAN by a robot without the SCAN skill; good: use only the robot's listed actions";
    case CheckClass::Capacity:
      return "bad: BUILD with [0] cargo; good: PICK at the stockpile, then BUILD";
    case CheckClass::Safety:
      return "bad: MOVE into a no-go location; good: route around it";
    case CheckClass::Schema:
      return "bad: STEP 5 listed twice (duplicated action); good: consecutive STEP indices, one action each";
    case CheckClass::Coverage:
      return "bad: a cell no SCAN footprint reaches; good: add a SCAN where its row or column covers the cell";
  }
  return {};
}

}  // namespace

std::string role_name(Role r) { return r == Role::Generator ? "generator" : "supervisor"; }

std::string gateway_error_name(GatewayErrorKind k) {
  switch (k) {
    case GatewayErrorKind::Transport:
      return "transport";
    case GatewayErrorKind::Auth:
      return "auth";
    case GatewayErrorKind::RateLimit:
      return "rate-limit";
    case GatewayErrorKind::MalformedResponse:
      return "malformed-response";
  }
  return "transport";
}

std::map<std::string, LlmProfile> parse_profiles(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed profiles file: ") + e.what());
  }
  if (!root.contains("profiles") || !root["profiles"].is_object()) throw ConfigError("profiles file needs a \"profiles\" object");
  std::map<std::string, LlmProfile> out;
  for (const auto& [name, v] : root["profiles"].items()) {
    try {
      LlmProfile p;
      p.name = name;
      p.role = parse_role(v.value("role", "supervisor"));
      p.provider = to_lower(v.value("provider", "mock"));
      if (p.provider != "mock" && p.provider != "openai") throw ConfigError("unknown provider '" + p.provider + "'");
      p.endpoint = v.value("endpoint", "");
      p.model_name = v.value("model", name);
      p.temperature = v.value("temperature", p.role == Role::Generator ? 0.2 : 0.0);
      if (p.temperature < 0) throw ConfigError("temperature must be >= 0");
      p.stop_tokens = v.value("stop", std::vector<std::string>{});
      p.max_tokens = v.value("max_tokens", 1024);
      p.api_key_env = v.value("api_key_env", to_upper(name) + "_API_KEY");
      if (v.contains("seed") && v["seed"].is_number_integer()) p.seed = v["seed"].get<int>();
      p.mock_key = v.value("mock_key", name);
      p.label = v.value("label", name);
      p.strategy = v.value("strategy", "llm supervision");
      if (p.provider == "openai" && p.endpoint.empty()) throw ConfigError("endpoint required");
      out[name] = p;
    } catch (const json::exception& e) {
      throw ConfigError("profile " + name + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("profile " + name + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, LlmProfile> load_profiles(const std::string& path) { return parse_profiles(read_file(path)); }

LlmGateway::LlmGateway(std::map<std::string, LlmProfile> profiles, std::string manifest_path)
    : profiles_(std::move(profiles)) {
  if (manifest_path.empty()) return;
  manifest_dir_ = std::filesystem::path(manifest_path).parent_path().string();
  json root;
  try {
    root = json::parse(read_file(manifest_path));
    for (const auto& e : root.at("entries")) {
      MockEntry m;
      m.profile = e.value("profile", "");
      m.role = parse_role(e.at("role").get<std::string>());
      m.scenario = e.at("scenario").get<std::string>();
      m.iteration = e.value("iteration", 0);
      m.file = e.at("file").get<std::string>();
      entries_.push_back(m);
    }
  } catch (const json::exception& e) {
    throw ConfigError("malformed mock manifest " + manifest_path + ": " + e.what());
  }
}

const LlmProfile& LlmGateway::profile(const std::string& name) const {
  auto it = profiles_.find(name);
  if (it == profiles_.end()) throw ConfigError("unknown LLM profile '" + name + "'");
  return it->second;
}

std::vector<std::string> LlmGateway::call_log() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_;
}

std::string LlmGateway::complete(const LlmProfile& p, const std::string& prompt, const std::string& scenario,
                                 int iteration) {
  std::string out = p.provider == "mock" ? complete_mock(p, scenario, iteration) : complete_http(p, prompt);
  std::lock_guard<std::mutex> lock(mu_);
  log_.push_back("call profile=" + p.name + " role=" + role_name(p.role) + " scenario=" + scenario +
                 " iteration=" + std::to_string(iteration) + " prompt_chars=" + std::to_string(prompt.size()) +
                 " response_chars=" + std::to_string(out.size()));
  return out;
}

std::string LlmGateway::complete_mock(const LlmProfile& p, const std::string& scenario, int iteration) const {
  for (const auto& e : entries_) {
    if (!e.profile.empty() && e.profile != p.mock_key) continue;
    if (e.role != p.role || e.scenario != scenario || e.iteration != iteration) continue;
    std::filesystem::path f = e.file;
    if (f.is_relative() && !manifest_dir_.empty()) f = std::filesystem::path(manifest_dir_) / f;
    std::ifstream in(f, std::ios::binary);
    if (!in) throw GatewayError(GatewayErrorKind::MalformedResponse, "mock file missing: " + f.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
  throw GatewayError(GatewayErrorKind::MalformedResponse, "no mock response for profile=" + p.mock_key + " role=" +
                                                              role_name(p.role) + " scenario=" + scenario +
                                                              " iteration=" + std::to_string(iteration));
}

std::string LlmGateway::complete_http(const LlmProfile& p, const std::string& prompt) const {
  const char* key = std::getenv(p.api_key_env.c_str());
  if (!key || !*key) throw GatewayError(GatewayErrorKind::Auth, "environment variable " + p.api_key_env + " not set");

  std::string base = p.endpoint, path = "/v1/chat/completions";
  auto scheme = base.find("://");
  auto slash = base.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash != std::string::npos) {
    path = base.substr(slash);
    base = base.substr(0, slash);
  }

  json body;
  body["model"] = p.model_name;
  body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = p.temperature;
  body["max_tokens"] = p.max_tokens;
  if (!p.stop_tokens.empty()) body["stop"] = p.stop_tokens;
  if (p.seed) body["seed"] = *p.seed;

  httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
  for (int attempt = 0; attempt < 2; ++attempt) {
    httplib::Client cli(base);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(120);
    auto res = cli.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      if (attempt == 0) continue;
      throw GatewayError(GatewayErrorKind::Transport, "request to " + p.endpoint + " failed: " +
                                                          httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) throw GatewayError(GatewayErrorKind::Auth, "HTTP " + std::to_string(res->status));
    if (res->status == 429) throw GatewayError(GatewayErrorKind::RateLimit, "HTTP 429");
    if (res->status >= 500 && attempt == 0) continue;
    if (res->status < 200 || res->status >= 300)
      throw GatewayError(GatewayErrorKind::Transport, "HTTP " + std::to_string(res->status));
    try {
      json r = json::parse(res->body);
      return r.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw GatewayError(GatewayErrorKind::MalformedResponse, e.what());
    }
  }
  throw GatewayError(GatewayErrorKind::Transport, "request to " + p.endpoint + " failed");
}

std::string build_generator_prompt(const PromptContext& ctx) {
  std::ostringstream os;
  os << "# role: generator\n";
  os << "# write a schedule for the scenario below as API command lines only\n";
  os << ctx.render();
  os << "# output\n";
  os << "# one line per step: " << kStepSchemaLine << "\n";
  os << "# no prose, no code fences\n";
  return os.str();
}

std::string build_supervisor_prompt(const PromptContext& ctx, const Plan& draft, const ViolationReport& report) {
  std::ostringstream os;
  os << "# role: supervisor\n";
  os << ctx.render();
  os << "# draft plan\n" << serialize_plan(draft);
  if (report.violations.empty()) {
    os << "# validation: the plan is feasible (psi=0)\n";
    os << "# reply with the plan unchanged to confirm\n";
    return os.str();
  }
  os << "# validation: psi=" << report.psi << "\n";
  std::map<CheckClass, std::vector<const Violation*>> by_class;
  for (const auto& v : report.violations) by_class[v.cls].push_back(&v);
  for (const auto& [c, vs] : by_class) {
    os << "## violation class: " << check_name(c) << "\n";
    for (const Violation* v : vs) {
      os << "- [" << check_name(c) << "] step " << (v->step ? std::to_string(*v->step) : std::string("-")) << ": "
         << v->detail << " | hint: " << hint_name(v->hint.kind) << " step " << v->hint.anchor_step;
      if (v->hint.suggested_action) os << " " << v->hint.suggested_action->name();
      os << "\n";
    }
    os << "  counterexample: " << counterexample(c) << "\n";
  }
  os << "# task\n";
  os << "# return the corrected plan with as few edits as possible (substitute, insert, swap adjacent steps)\n";
  os << "# plan lines only, same schema\n";
  return os.str();
}

std::string strip_preamble(const std::string& text) {
  auto is_step = [](const std::string& t) {
    std::string u = to_upper(t);
    auto colon = u.find(':');
    bool prefixed = colon != std::string::npos && trim(std::string_view(u).substr(colon + 1)).rfind("STEP", 0) == 0;
    return u.rfind("STEP", 0) == 0 || prefixed;
  };
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> kept;
  std::size_t last = 0;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.rfind("```", 0) == 0) continue;
    bool step = is_step(t);
    if (kept.empty() && !step) continue;
    kept.push_back(line);
    if (step) last = kept.size();
  }
  std::string out;
  for (std::size_t i = 0; i < last; ++i) out += kept[i] + "\n";
  return out;
}

}  // namespace robosched
