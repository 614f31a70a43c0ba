#include "ooprompt/gateway.hpp"

#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "mock_heuristics.hpp"

namespace ooprompt {

namespace {

constexpr AssistantRole kRoles[] = {
    AssistantRole::Extractor,        AssistantRole::ImplicitSuggester,
    AssistantRole::RelationDetector, AssistantRole::CandidateGenerator,
    AssistantRole::ExampleGenerator, AssistantRole::ConflictChecker,
    AssistantRole::Refiner,          AssistantRole::SafetyChecker,
    AssistantRole::Generator,        AssistantRole::Judge,
    AssistantRole::FeedbackIntegrator,
};

// Minimal structural checks; each returns an empty string on success.
std::string expect_string(const Json& j, const char* key, bool nonempty = false) {
  if (!j.is_object() || !j.contains(key)) return std::string("missing '") + key + "'";
  if (!j.at(key).is_string()) return std::string("'") + key + "' must be a string";
  if (nonempty && j.at(key).get<std::string>().empty()) return std::string("'") + key + "' is empty";
  return {};
}

std::string expect_string_array(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) return std::string("missing '") + key + "'";
  if (!j.at(key).is_array()) return std::string("'") + key + "' must be an array";
  for (const auto& s : j.at(key)) {
    if (!s.is_string()) return std::string("'") + key + "' must contain strings";
  }
  return {};
}

std::string expect_items(const Json& j, const char* key,
                         const std::vector<const char*>& string_fields) {
  if (!j.is_object() || !j.contains(key)) return std::string("missing '") + key + "'";
  if (!j.at(key).is_array()) return std::string("'") + key + "' must be an array";
  for (const auto& item : j.at(key)) {
    for (const char* f : string_fields) {
      if (auto why = expect_string(item, f); !why.empty()) return std::string(key) + "[]: " + why;
    }
  }
  return {};
}

std::string check_object_payload(const Json& input) {
  if (!input.is_object() || !input.contains("object")) return "missing 'object'";
  const Json& obj = input.at("object");
  if (auto why = expect_string(obj, "title"); !why.empty()) return "object: " + why;
  return expect_items(obj, "properties", {"name", "value"});
}

std::string check_property_payload(const Json& input) {
  if (!input.is_object() || !input.contains("property")) return "missing 'property'";
  const Json& p = input.at("property");
  if (auto why = expect_string(p, "name", true); !why.empty()) return "property: " + why;
  if (auto why = expect_string(p, "value"); !why.empty()) return "property: " + why;
  return expect_string_array(input, "existing");
}

std::string check_input(AssistantRole role, const Json& input) {
  switch (role) {
    case AssistantRole::Extractor:
      return expect_string(input, "text", true);
    case AssistantRole::ImplicitSuggester:
    case AssistantRole::RelationDetector:
    case AssistantRole::ConflictChecker:
    case AssistantRole::Refiner:
    case AssistantRole::SafetyChecker:
      return check_object_payload(input);
    case AssistantRole::CandidateGenerator:
    case AssistantRole::ExampleGenerator:
      return check_property_payload(input);
    case AssistantRole::Generator:
      if (auto why = expect_string(input, "prompt", true); !why.empty()) return why;
      return expect_string(input, "model", true);
    case AssistantRole::Judge: {
      if (!input.is_object() || !input.contains("criterion")) return "missing 'criterion'";
      if (auto why = expect_string(input.at("criterion"), "id", true); !why.empty()) return "criterion: " + why;
      if (auto why = expect_string(input.at("criterion"), "description", true); !why.empty()) {
        return "criterion: " + why;
      }
      if (auto why = expect_string(input, "output"); !why.empty()) return why;
      return expect_string(input, "prompt");
    }
    case AssistantRole::FeedbackIntegrator:
      if (auto why = check_object_payload(input); !why.empty()) return why;
      return expect_string(input, "feedback", true);
  }
  return "unknown role";
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(AssistantRole role) {
  switch (role) {
    case AssistantRole::Extractor: return "extractor";
    case AssistantRole::ImplicitSuggester: return "implicit_suggester";
    case AssistantRole::RelationDetector: return "relation_detector";
    case AssistantRole::CandidateGenerator: return "candidate_generator";
    case AssistantRole::ExampleGenerator: return "example_generator";
    case AssistantRole::ConflictChecker: return "conflict_checker";
    case AssistantRole::Refiner: return "refiner";
    case AssistantRole::SafetyChecker: return "safety_checker";
    case AssistantRole::Generator: return "generator";
    case AssistantRole::Judge: return "judge";
    case AssistantRole::FeedbackIntegrator: return "feedback_integrator";
  }
  return "extractor";
}

AssistantRole role_from_string(std::string_view s) {
  for (auto r : kRoles) {
    if (to_string(r) == s) return r;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown assistant role '" + std::string(s) + "'");
}

const std::vector<AssistantRole>& all_roles() {
  static const std::vector<AssistantRole> roles(std::begin(kRoles), std::end(kRoles));
  return roles;
}

void validate_request(const AssistantRequest& req) {
  if (req.temperature < 0.0 || req.temperature > 2.0) {
    throw Error(ErrorCode::InvalidArgument, "temperature must be in [0, 2]");
  }
  if (auto why = check_input(req.role, req.input); !why.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(to_string(req.role)) + " payload rejected: " + why);
  }
}

std::string check_response(AssistantRole role, const Json& out) {
  if (!out.is_object()) return "response must be a JSON object";
  switch (role) {
    case AssistantRole::Extractor: {
      if (auto why = expect_items(out, "properties", {"name", "value"}); !why.empty()) return why;
      for (const auto& p : out.at("properties")) {
        if (!p.contains("span")) continue;
        const Json& span = p.at("span");
        if (!span.is_array() || span.size() != 2 || !span[0].is_number_integer() ||
            !span[1].is_number_integer()) {
          return "properties[].span must be [begin, end]";
        }
      }
      return {};
    }
    case AssistantRole::ImplicitSuggester:
      return expect_items(out, "suggestions", {"name", "rationale"});
    case AssistantRole::RelationDetector: {
      if (auto why = expect_items(out, "groups", {"group"}); !why.empty()) return why;
      for (const auto& g : out.at("groups")) {
        if (auto why = expect_string_array(g, "members"); !why.empty()) return "groups[]: " + why;
      }
      return {};
    }
    case AssistantRole::CandidateGenerator:
      return expect_string_array(out, "candidates");
    case AssistantRole::ExampleGenerator:
      return expect_string_array(out, "examples");
    case AssistantRole::ConflictChecker: {
      if (auto why = expect_items(out, "conflicts", {"explanation", "suggested_fix"}); !why.empty()) return why;
      for (const auto& c : out.at("conflicts")) {
        if (auto why = expect_string_array(c, "properties"); !why.empty()) return "conflicts[]: " + why;
      }
      return {};
    }
    case AssistantRole::Refiner:
      return expect_items(out, "refinements", {"name", "value", "rationale"});
    case AssistantRole::SafetyChecker:
      return expect_items(out, "flags", {"category", "explanation"});
    case AssistantRole::Generator:
      return expect_string(out, "text");
    case AssistantRole::Judge: {
      if (!out.contains("score") || !out.at("score").is_number()) return "missing numeric 'score'";
      double s = out.at("score").get<double>();
      if (s < 0.0 || s > 1.0) return "'score' must be in [0, 1]";
      if (auto why = expect_string(out, "justification", true); !why.empty()) return why;
      if (out.contains("suggestion") && !out.at("suggestion").is_string()) return "'suggestion' must be a string";
      return {};
    }
    case AssistantRole::FeedbackIntegrator: {
      if (auto why = expect_items(out, "additions", {"name", "value", "rationale"}); !why.empty()) return why;
      if (auto why = expect_items(out, "updates", {"name", "rationale"}); !why.empty()) return why;
      return expect_items(out, "removals", {"name", "rationale"});
    }
  }
  return "unknown role";
}

std::string request_digest(AssistantRole role, const Json& input) {
  // Round-trip through the key-sorted json type so key order never affects the digest.
  std::string canonical = std::string(to_string(role)) + "\n" + nlohmann::json::parse(input.dump()).dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical)));
  return buf;
}

std::string request_digest(const AssistantRequest& req) { return request_digest(req.role, req.input); }

MockAssistant::MockAssistant(std::filesystem::path fixtures_dir) : dir_(std::move(fixtures_dir)) {}

std::optional<Json> MockAssistant::load_fixture(AssistantRole role, const std::string& file) const {
  if (dir_.empty()) return std::nullopt;
  auto path = dir_ / std::string(to_string(role)) / file;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    throw Error(ErrorCode::MalformedResponse, "fixture " + path.string() + " is not valid JSON",
                Json{{"raw_text", text}});
  }
}

AssistantResponse MockAssistant::complete(const AssistantRequest& req) {
  validate_request(req);
  auto start = std::chrono::steady_clock::now();
  const std::string digest = request_digest(req);

  std::optional<Json> fixture = load_fixture(req.role, digest + ".json");
  if (!fixture) {
    for (const auto& seed : seed_fixtures()) {
      if (seed.role == req.role && request_digest(seed.role, seed.input) == digest) {
        fixture = Json{{"output", seed.output}};
        break;
      }
    }
  }
  if (!fixture) fixture = load_fixture(req.role, "fallback.json");
  if (!fixture) fixture = Json{{"output", mock::fallback_output(req.role, req.input, digest)}};

  if (fixture->contains("delay_ms")) {
    std::this_thread::sleep_for(std::chrono::milliseconds(fixture->at("delay_ms").get<int>()));
  }
  std::string fault = fixture->value("fault", "");
  if (fault == "timeout") {
    throw Error(ErrorCode::Timeout, std::string(to_string(req.role)) + " request timed out",
                Json{{"digest", digest}});
  }
  if (fault == "unavailable") {
    throw Error(ErrorCode::ProviderUnavailable,
                std::string(to_string(req.role)) + " provider unavailable", Json{{"digest", digest}});
  }

  AssistantResponse resp;
  resp.role = req.role;
  if (fault == "malformed" || !fixture->contains("output")) {
    std::string raw = fixture->value("raw_text", std::string("<no output>"));
    throw Error(ErrorCode::MalformedResponse,
                std::string(to_string(req.role)) + " returned malformed output",
                Json{{"raw_text", raw}, {"digest", digest}});
  }
  resp.output = fixture->at("output");
  resp.raw_text = fixture->value("raw_text", resp.output.dump());
  if (auto why = check_response(req.role, resp.output); !why.empty()) {
    throw Error(ErrorCode::MalformedResponse,
                std::string(to_string(req.role)) + " response rejected: " + why,
                Json{{"raw_text", resp.raw_text}, {"digest", digest}});
  }
  resp.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return resp;
}

AssistantResponse OfflineAssistant::complete(const AssistantRequest& req) {
  throw Error(ErrorCode::ProviderUnavailable,
              std::string("no assistant provider configured for ") + std::string(to_string(req.role)) +
                  " (set OOPROMPT_MOCK=1, or OOPROMPT_API_KEY and OOPROMPT_BASE_URL)");
}

std::unique_ptr<Assistant> assistant_from_env(const std::filesystem::path& fixtures_dir) {
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? v : "";
  };
  if (env("OOPROMPT_MOCK") == "1") return std::make_unique<MockAssistant>(fixtures_dir);
  std::string key = env("OOPROMPT_API_KEY");
  std::string base = env("OOPROMPT_BASE_URL");
  if (!key.empty() && !base.empty()) {
    HttpProviderConfig cfg;
    cfg.base_url = base;
    cfg.api_key = key;
    if (auto model = env("OOPROMPT_MODEL"); !model.empty()) cfg.model = model;
    return std::make_unique<HttpAssistant>(cfg);
  }
  return std::make_unique<OfflineAssistant>();
}

std::vector<FanOutResult> fan_out(Assistant& assistant, const std::vector<AssistantRequest>& reqs) {
  if (reqs.empty()) throw Error(ErrorCode::InvalidArgument, "fan_out needs at least one request");
  std::vector<std::future<AssistantResponse>> futures;
  futures.reserve(reqs.size());
  for (const auto& req : reqs) {
    futures.push_back(std::async(std::launch::async, [&assistant, &req] { return assistant.complete(req); }));
  }
  std::vector<FanOutResult> out(reqs.size());
  for (std::size_t i = 0; i < futures.size(); ++i) {
    out[i].index = i;
    try {
      out[i].response = futures[i].get();
    } catch (const Error& e) {
      out[i].error = e;
    } catch (const std::exception& e) {
      out[i].error = Error(ErrorCode::ProviderUnavailable, e.what());
    }
  }
  return out;
}

void install_seed_fixtures(const std::filesystem::path& dir) {
  for (const auto& seed : seed_fixtures()) {
    auto role_dir = dir / std::string(to_string(seed.role));
    std::filesystem::create_directories(role_dir);
    Json file;
    file["role"] = to_string(seed.role);
    file["input"] = seed.input;
    file["output"] = seed.output;
    std::ofstream out(role_dir / (request_digest(seed.role, seed.input) + ".json"), std::ios::binary);
    out << file.dump(2) << '\n';
  }
}

}  // namespace ooprompt
