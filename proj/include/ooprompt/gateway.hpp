#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ooprompt/error.hpp"
#include "ooprompt/json.hpp"

namespace ooprompt {

enum class AssistantRole {
  Extractor,
  ImplicitSuggester,
  RelationDetector,
  CandidateGenerator,
  ExampleGenerator,
  ConflictChecker,
  Refiner,
  SafetyChecker,
  Generator,
  Judge,
  FeedbackIntegrator,
};

std::string_view to_string(AssistantRole role);
AssistantRole role_from_string(std::string_view s);
const std::vector<AssistantRole>& all_roles();

struct AssistantRequest {
  AssistantRole role = AssistantRole::Extractor;
  Json input = Json::object();
  double temperature = 0.2;
  std::optional<std::string> model_hint;
};

struct TokenUsage {
  int input_tokens = 0;
  int output_tokens = 0;
};

struct AssistantResponse {
  AssistantRole role = AssistantRole::Extractor;
  Json output;
  std::string raw_text;
  std::optional<TokenUsage> usage;
  std::int64_t latency_ms = 0;
};

/// Throws Error(InvalidArgument) when the payload does not fit the role's input schema.
void validate_request(const AssistantRequest& req);

/// Empty string when `output` fits the role's response schema, otherwise the reason.
std::string check_response(AssistantRole role, const Json& output);

/// Stable hex digest of (role, canonical input); keys mock fixtures.
std::string request_digest(const AssistantRequest& req);
std::string request_digest(AssistantRole role, const Json& input);

/// Pluggable LLM access by role. Implementations are reentrant and thread-safe.
class Assistant {
 public:
  virtual ~Assistant() = default;
  /// Throws Error with ProviderUnavailable, MalformedResponse or Timeout.
  virtual AssistantResponse complete(const AssistantRequest& req) = 0;
  virtual std::string_view name() const = 0;
};

/// Deterministic offline assistant. Output is a pure function of (role, digest):
/// <dir>/<role>/<digest>.json, then the built-in seed table, then
/// <dir>/<role>/fallback.json, then a built-in per-role fallback.
///
/// A fixture file is {"role", "input"?, "output", "raw_text"?, "delay_ms"?, "fault"?}
/// where fault is one of "timeout", "unavailable", "malformed".
class MockAssistant final : public Assistant {
 public:
  explicit MockAssistant(std::filesystem::path fixtures_dir = {});

  AssistantResponse complete(const AssistantRequest& req) override;
  std::string_view name() const override { return "mock"; }

 private:
  std::optional<Json> load_fixture(AssistantRole role, const std::string& file) const;

  std::filesystem::path dir_;
};

/// Always unavailable; used when neither mock mode nor a provider is configured.
class OfflineAssistant final : public Assistant {
 public:
  AssistantResponse complete(const AssistantRequest& req) override;
  std::string_view name() const override { return "offline"; }
};

struct HttpProviderConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1 or a full .../chat/completions URL
  std::string api_key;
  std::string model = "gpt-4o-mini";
  std::chrono::milliseconds timeout{60000};
};

/// Chat-completion-style provider: POST {model, messages, temperature} with bearer auth.
/// One retry on transport failure, none on malformed output.
class HttpAssistant final : public Assistant {
 public:
  explicit HttpAssistant(HttpProviderConfig config);

  AssistantResponse complete(const AssistantRequest& req) override;
  std::string_view name() const override { return "http"; }

  /// Body sent for `req`; exposed for tests.
  Json request_body(const AssistantRequest& req) const;

 private:
  HttpProviderConfig config_;
  std::string scheme_host_;
  std::string path_;
};

/// System instruction sent to a live provider for `role`.
std::string_view role_instructions(AssistantRole role);

/// OOPROMPT_MOCK=1 -> MockAssistant; OOPROMPT_API_KEY + OOPROMPT_BASE_URL -> HttpAssistant;
/// otherwise OfflineAssistant.
std::unique_ptr<Assistant> assistant_from_env(const std::filesystem::path& fixtures_dir);

struct FanOutResult {
  std::size_t index = 0;
  std::optional<AssistantResponse> response;
  std::optional<Error> error;
  bool ok() const { return response.has_value(); }
};

/// Dispatches every request concurrently; results come back in request order and a
/// failure in one never cancels the others.
std::vector<FanOutResult> fan_out(Assistant& assistant, const std::vector<AssistantRequest>& reqs);

struct SeedFixture {
  AssistantRole role;
  Json input;
  Json output;
};

/// Built-in fixtures covering the shipped walkthroughs.
const std::vector<SeedFixture>& seed_fixtures();

/// Writes the seed fixtures as <dir>/<role>/<digest>.json.
void install_seed_fixtures(const std::filesystem::path& dir);

}  // namespace ooprompt
