#include <httplib.h>

#include "ooprompt/gateway.hpp"

namespace ooprompt {

namespace {

constexpr std::string_view kCompletionsPath = "/chat/completions";

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string_view role_instructions(AssistantRole role) {
  switch (role) {
    case AssistantRole::Extractor:
      return "Extract the explicit intent properties stated in the user's text. Reply with JSON only: "
             "{\"properties\": [{\"name\": str, \"value\": str, \"span\": [begin, end]}]} where span is the "
             "byte range of the text the property was read from.";
    case AssistantRole::ImplicitSuggester:
      return "Given a structured prompt object, suggest relevant properties the user has not mentioned. "
             "Reply with JSON only: {\"suggestions\": [{\"name\": str, \"value\": str, \"rationale\": str}]}.";
    case AssistantRole::RelationDetector:
      return "Find properties that are ordered steps rather than parallel constraints. Reply with JSON only: "
             "{\"groups\": [{\"group\": str, \"members\": [property names in step order]}]}.";
    case AssistantRole::CandidateGenerator:
      return "Propose two to four alternative phrasings of the property value with the same meaning. "
             "Reply with JSON only: {\"candidates\": [str]}.";
    case AssistantRole::ExampleGenerator:
      return "Give concrete examples that illustrate the property value. Reply with JSON only: "
             "{\"examples\": [str]}.";
    case AssistantRole::ConflictChecker:
      return "Find pairs of properties whose values are incompatible. Reply with JSON only: "
             "{\"conflicts\": [{\"properties\": [name, name], \"explanation\": str, \"suggested_fix\": str}]}.";
    case AssistantRole::Refiner:
      return "Suggest clearer wording for property values. Reply with JSON only: "
             "{\"refinements\": [{\"name\": str, \"value\": str, \"rationale\": str}]}.";
    case AssistantRole::SafetyChecker:
      return "Flag properties that request unsafe or inappropriate content. Reply with JSON only: "
             "{\"flags\": [{\"property\": str or null, \"category\": str, \"explanation\": str}]}.";
    case AssistantRole::Generator:
      return "Carry out the prompt. Reply with JSON only: {\"text\": your complete answer}.";
    case AssistantRole::Judge:
      return "Judge the output against the criterion. Reply with JSON only: {\"score\": number in [0,1], "
             "\"justification\": str, \"suggestion\": str}.";
    case AssistantRole::FeedbackIntegrator:
      return "Turn the feedback into concrete property edits. Reply with JSON only: {\"additions\": [{\"name\", "
             "\"value\", \"rationale\"}], \"updates\": [{\"name\", \"value\", \"rationale\"}], \"removals\": "
             "[{\"name\", \"rationale\"}]}.";
  }
  return "";
}

HttpAssistant::HttpAssistant(HttpProviderConfig config) : config_(std::move(config)) {
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  if (!ends_with(url, kCompletionsPath)) url += kCompletionsPath;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "OOPROMPT_BASE_URL must start with http:// or https://");
  }
  auto path_start = url.find('/', scheme_end + 3);
  scheme_host_ = url.substr(0, path_start);
  path_ = url.substr(path_start);
}

Json HttpAssistant::request_body(const AssistantRequest& req) const {
  Json body;
  body["model"] = req.model_hint.value_or(config_.model);
  body["messages"] = Json::array({
      Json{{"role", "system"}, {"content", role_instructions(req.role)}},
      Json{{"role", "user"}, {"content", req.input.dump()}},
  });
  body["temperature"] = req.temperature;
  return body;
}

AssistantResponse HttpAssistant::complete(const AssistantRequest& req) {
  validate_request(req);
  const std::string role = std::string(to_string(req.role));
  const std::string payload = request_body(req).dump();
  auto start = std::chrono::steady_clock::now();

  httplib::Result res{nullptr, httplib::Error::Unknown};
  for (int attempt = 0; attempt < 2; ++attempt) {
    httplib::Client client(scheme_host_);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    client.set_connection_timeout(secs);
    client.set_read_timeout(secs);
    client.set_write_timeout(secs);
    client.set_bearer_token_auth(config_.api_key);
    res = client.Post(path_, payload, "application/json");
    if (!res) {
      if (res.error() == httplib::Error::ConnectionTimeout || res.error() == httplib::Error::Read) {
        throw Error(ErrorCode::Timeout, role + " request timed out",
                    Json{{"transport", httplib::to_string(res.error())}});
      }
      continue;  // transport failure: retry once
    }
    if (res->status >= 500) continue;
    break;
  }
  if (!res) {
    throw Error(ErrorCode::ProviderUnavailable, role + " provider unreachable",
                Json{{"transport", httplib::to_string(res.error())}});
  }
  if (res->status != 200) {
    throw Error(ErrorCode::ProviderUnavailable,
                role + " provider returned HTTP " + std::to_string(res->status),
                Json{{"status", res->status}, {"raw_text", res->body}});
  }

  AssistantResponse out;
  out.role = req.role;
  Json envelope;
  try {
    envelope = Json::parse(res->body);
    out.raw_text = envelope.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const std::exception&) {
    throw Error(ErrorCode::MalformedResponse, role + " provider reply is not a chat completion",
                Json{{"raw_text", res->body}});
  }
  try {
    out.output = Json::parse(out.raw_text);
  } catch (const Json::parse_error&) {
    throw Error(ErrorCode::MalformedResponse, role + " reply is not JSON", Json{{"raw_text", out.raw_text}});
  }
  if (auto why = check_response(req.role, out.output); !why.empty()) {
    throw Error(ErrorCode::MalformedResponse, role + " response rejected: " + why,
                Json{{"raw_text", out.raw_text}});
  }
  if (envelope.contains("usage") && envelope.at("usage").is_object()) {
    const Json& u = envelope.at("usage");
    out.usage = TokenUsage{u.value("prompt_tokens", 0), u.value("completion_tokens", 0)};
  }
  out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return out;
}

}  // namespace ooprompt
