#include "ooprompt/service.hpp"

#include <httplib.h>

#include <mutex>
#include <thread>
#include <vector>

#include "ooprompt/codec.hpp"
#include "ooprompt/lifecycle.hpp"

namespace ooprompt {

using namespace json_util;

int http_status(ErrorCode code) {
  switch (classify(code)) {
    case ErrorClass::User: return 400;
    case ErrorClass::NotFound: return 404;
    case ErrorClass::Conflict: return 409;
    case ErrorClass::Provider: return 502;
    case ErrorClass::Auth: return 401;
    case ErrorClass::Io: return 500;
  }
  return 500;
}

Json ok_envelope(Json data) {
  Json j;
  j["ok"] = true;
  j["data"] = std::move(data);
  return j;
}

Json error_envelope(const Error& e) {
  Json err;
  err["code"] = to_string(e.code());
  err["message"] = e.what();
  err["details"] = e.details();
  Json j;
  j["ok"] = false;
  j["error"] = std::move(err);
  return j;
}

std::pair<std::string, int> parse_listen_address(const std::string& spec) {
  std::string host = "127.0.0.1";
  int port = 8080;
  if (spec.empty()) return {host, port};
  auto colon = spec.rfind(':');
  std::string port_text = colon == std::string::npos ? spec : spec.substr(colon + 1);
  if (colon != std::string::npos && colon > 0) host = spec.substr(0, colon);
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size() || port < 0 || port > 65535) throw std::out_of_range("port");
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad listen address '" + spec + "' (expected host:port)");
  }
  return {host, port};
}

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto slash = path.find('/', start);
    std::string seg = path.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
    if (!seg.empty()) out.push_back(seg);
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return out;
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    Json j = Json::parse(body);
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

int object_version(const Json& body) {
  if (!body.contains("object_version") || !body.at("object_version").is_number_integer()) {
    throw Error(ErrorCode::InvalidArgument, "mutations must include the integer field 'object_version'");
  }
  return body.at("object_version").get<int>();
}

int parse_int(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be an integer, got '" + s + "'");
}

std::vector<std::size_t> item_list(const Json& body) {
  std::vector<std::size_t> items;
  if (!body.contains("items")) return items;
  if (!body.at("items").is_array()) throw Error(ErrorCode::InvalidArgument, "'items' must be an array of indices");
  for (const auto& i : body.at("items")) {
    if (!i.is_number_unsigned()) throw Error(ErrorCode::InvalidArgument, "'items' must be an array of indices");
    items.push_back(i.get<std::size_t>());
  }
  return items;
}

std::optional<std::string> optional_field(const Json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
  return require_string(body, key);
}

std::string query_or(const ApiRequest& req, const std::string& key, std::string fallback) {
  auto it = req.query.find(key);
  return it == req.query.end() ? fallback : it->second;
}

bool truthy(const std::string& s) { return s == "1" || s == "true" || s == "yes"; }

}  // namespace

struct Service::Impl {
  Impl(Workspace& w, Assistant& a, ServiceOptions o)
      : ws(w),
        assistant(a),
        lifecycle(w, a),
        cors_origin(o.cors_origin.value_or(w.config().cors_origin)),
        api_token(o.api_token.value_or(w.config().api_token)) {}

  Workspace& ws;
  Assistant& assistant;
  Lifecycle lifecycle;
  std::string cors_origin;
  std::string api_token;
  std::mutex mu;  // guards the workspace and `jobs`

  struct Job {
    std::string status;  // running | failed
    Json error;
  };
  std::map<std::string, Job> jobs;
  std::vector<std::thread> workers;

  httplib::Server server;
  std::thread listener;

  Json route(const ApiRequest& req, int& status);
  Json start_eval(const Json& body, int& status);
  Json eval_status(const std::string& run_id);
};

Json Service::Impl::start_eval(const Json& body, int& status) {
  std::vector<std::string> ids = string_list(body, "object_ids");
  std::size_t variants = body.contains("variants") ? require(body, "variants").get<std::size_t>() : 8;
  RenderFormat format = format_from_string(optional_string(body, "format", "natural_language"));
  std::vector<Criterion> criteria;
  if (body.contains("criteria")) {
    for (const auto& c : require(body, "criteria")) criteria.push_back(criterion_from_json(c));
  }
  std::vector<std::string> models = string_list(body, "models");

  auto plan = lifecycle.plan_eval(ids, variants, format, std::move(criteria), std::move(models));
  jobs[plan.run_id] = Job{"running", nullptr};
  workers.emplace_back([this, plan] {
    try {
      auto report = run_comparison(assistant, plan.artifacts, plan.criteria, plan.models, plan.run_id, now_timestamp());
      std::lock_guard lock(mu);
      lifecycle.finish_eval(std::move(report));
      jobs.erase(plan.run_id);
    } catch (const Error& e) {
      std::lock_guard lock(mu);
      jobs[plan.run_id] = Job{"failed", error_envelope(e).at("error")};
    } catch (const std::exception& e) {
      std::lock_guard lock(mu);
      jobs[plan.run_id] = Job{"failed", error_envelope(Error(ErrorCode::IoError, e.what())).at("error")};
    }
  });
  status = 202;
  return Json{{"run_id", plan.run_id}, {"status", "running"}};
}

Json Service::Impl::eval_status(const std::string& run_id) {
  if (auto it = jobs.find(run_id); it != jobs.end()) {
    Json j{{"run_id", run_id}, {"status", it->second.status}};
    if (it->second.status == "failed") j["error"] = it->second.error;
    return j;
  }
  return Json{{"run_id", run_id}, {"status", "done"}, {"report", lifecycle.eval_show(run_id)}};
}

Json Service::Impl::route(const ApiRequest& req, int& status) {
  const auto seg = split_path(req.path);
  const std::string& m = req.method;
  const Json body = (m == "GET" || m == "DELETE") && req.body.empty() ? Json::object() : parse_body(req.body);
  Lifecycle& lc = lifecycle;
  auto n = seg.size();

  if (n == 1 && seg[0] == "healthz" && m == "GET") return Json{{"status", "ok"}};

  if (n >= 1 && seg[0] == "objects") {
    if (n == 1 && m == "GET") return lc.list_objects();
    if (n == 1 && m == "POST") {
      std::map<std::string, std::vector<std::string>> selections;
      if (body.contains("selections")) {
        for (const auto& [t, names] : require(body, "selections").items()) {
          selections[t] = names.get<std::vector<std::string>>();
        }
      }
      status = 201;
      return lc.create_object(require_string(body, "title"), string_list(body, "template_refs"), selections,
                              optional_string(body, "notes"));
    }
    if (n < 2) throw Error(ErrorCode::UnknownRoute, "no route " + m + " " + req.path);
    const std::string& id = seg[1];
    if (n == 2 && m == "GET") return lc.show_object(id);
    if (n == 2 && m == "PATCH") {
      ObjectPatch patch;
      patch.title = optional_field(body, "title");
      patch.notes = optional_field(body, "notes");
      return lc.edit_object(id, patch, object_version(body));
    }
    if (n == 2 && m == "DELETE") {
      Json b = body;
      if (!b.contains("object_version") && req.query.count("object_version")) {
        b["object_version"] = parse_int(req.query.at("object_version"), "object_version");
      }
      int expected = object_version(b);
      if (ws.object(id).version != expected) {
        throw Error(ErrorCode::VersionConflict, id + " is at version " + std::to_string(ws.object(id).version),
                    Json{{"current_version", ws.object(id).version}, {"expected_version", expected}});
      }
      return lc.delete_object(id);
    }
    const std::string& sub = seg[2];
    if (sub == "properties") {
      if (n == 3 && m == "POST") {
        status = 201;
        return lc.add_property(id, spec_from_json(body.contains("property") ? require(body, "property") : body),
                               object_version(body));
      }
      if (n == 4 && m == "PATCH") {
        return lc.update_property(id, seg[3], patch_from_json(body.contains("patch") ? require(body, "patch") : body),
                                  object_version(body));
      }
      if (n == 4 && m == "DELETE") {
        Json b = body;
        if (!b.contains("object_version") && req.query.count("object_version")) {
          b["object_version"] = parse_int(req.query.at("object_version"), "object_version");
        }
        return lc.remove_property(id, seg[3], object_version(b));
      }
    }
    if (sub == "nest" && n == 4 && m == "POST") return lc.nest(id, seg[3], object_version(body));
    if (sub == "promote" && n == 4 && m == "POST") return lc.promote(id, seg[3], object_version(body));
    if (sub == "reorder" && n == 3 && m == "POST") return lc.reorder(id, string_list(body, "order"), object_version(body));
    if (sub == "templates" && n == 3 && m == "POST") {
      std::optional<std::vector<std::string>> selection;
      if (body.contains("selection")) selection = string_list(body, "selection");
      return lc.apply_template(id, require_string(body, "template_id"), selection, object_version(body));
    }
    if (sub == "analyze" && n == 3 && m == "POST") {
      return lc.analyze(id, format_from_string(optional_string(body, "format", query_or(req, "format", "nl"))));
    }
    if (sub == "render" && n == 3 && (m == "POST" || m == "GET")) {
      RenderFormat format = format_from_string(query_or(req, "format", optional_string(body, "format", "nl")));
      std::optional<std::size_t> variants;
      if (auto v = query_or(req, "variants", ""); !v.empty()) {
        int cap = parse_int(v, "variants");
        if (cap < 0) throw Error(ErrorCode::InvalidArgument, "variants must not be negative");
        variants = static_cast<std::size_t>(cap);
      }
      RenderOptions options;
      options.emphasis_text = truthy(query_or(req, "emphasis", "false"));
      return lc.render(id, format, variants, options);
    }
    if (sub == "chain" && n == 3 && (m == "POST" || m == "GET")) {
      return lc.chain(id, format_from_string(query_or(req, "format", "nl")));
    }
    if (sub == "history" && n == 3 && m == "GET") {
      if (auto name = query_or(req, "property", ""); !name.empty()) return lc.property_history(id, name);
      return lc.history(id);
    }
    if (sub == "restore" && n == 4 && m == "POST") {
      return lc.restore(id, parse_int(seg[3], "version"), object_version(body));
    }
    if (sub == "diff" && n == 3 && m == "GET") {
      return lc.diff(id, parse_int(query_or(req, "from", ""), "from"), parse_int(query_or(req, "to", ""), "to"));
    }
  }

  if (n == 2 && seg[0] == "assist" && m == "POST") {
    const std::string& op = seg[1];
    status = 201;
    if (op == "extract") return lc.extract(require_string(body, "text"), optional_field(body, "object_id"));
    std::string id = require_string(body, "object_id");
    if (op == "suggest") return lc.suggest_properties(id);
    if (op == "relations") return lc.suggest_relations(id);
    if (op == "candidates") return lc.suggest_candidates(id, require_string(body, "prop_id"));
    if (op == "examples") return lc.suggest_examples(id, require_string(body, "prop_id"));
    if (op == "refine") return lc.refine(id);
    if (op == "feedback") return lc.feedback(id, require_string(body, "feedback"));
    status = 200;
  }

  if (n >= 1 && seg[0] == "proposals") {
    if (n == 1 && m == "GET") {
      auto obj = query_or(req, "object_id", "");
      return lc.list_proposals(obj.empty() ? std::nullopt : std::optional(obj));
    }
    if (n == 2 && m == "GET") return lc.show_proposal(seg[1]);
    if (n == 3 && seg[2] == "apply" && m == "POST") return lc.apply_proposal(seg[1], item_list(body), object_version(body));
    if (n == 3 && seg[2] == "dismiss" && m == "POST") return lc.dismiss_proposal(seg[1], item_list(body));
  }

  if (n >= 1 && seg[0] == "templates") {
    if (n == 1 && m == "GET") return lc.list_templates();
    if (n == 2 && seg[1] == "search" && m == "POST") {
      return lc.search_templates(require_string(body, "query"),
                                 facet_from_string(optional_string(body, "by", "output_type")));
    }
    if (n == 2 && seg[1] == "derive" && m == "POST") {
      TemplateTags tags;
      tags.output_type = optional_string(body, "output_type");
      tags.use_cases = string_list(body, "use_cases");
      status = 201;
      return lc.derive_template(require_string(body, "object_id"), require_string(body, "template_id"),
                                optional_string(body, "description"), tags);
    }
  }

  if (n >= 2 && seg[0] == "eval" && seg[1] == "runs") {
    if (n == 2 && m == "POST") return start_eval(body, status);
    if (n == 3 && m == "GET") return eval_status(seg[2]);
    if (n == 4 && seg[3] == "suggest" && m == "POST") {
      status = 201;
      return lc.eval_suggest(seg[2], optional_field(body, "object_id"));
    }
  }

  throw Error(ErrorCode::UnknownRoute, "no route " + m + " " + req.path);
}

Service::Service(Workspace& ws, Assistant& assistant, ServiceOptions options)
    : impl_(std::make_unique<Impl>(ws, assistant, std::move(options))) {}

Service::~Service() {
  stop();
  drain();
}

ApiResponse Service::handle(const ApiRequest& req) {
  ApiResponse res;
  try {
    const std::string& token = impl_->api_token;
    if (!token.empty() && req.path != "/healthz" && req.authorization != "Bearer " + token) {
      throw Error(ErrorCode::Unauthorized, "missing or wrong bearer token");
    }
    std::lock_guard lock(impl_->mu);
    int status = 200;
    Json data = impl_->route(req, status);
    res.status = status;
    res.body = ok_envelope(std::move(data));
  } catch (const Error& e) {
    res.status = http_status(e.code());
    res.body = error_envelope(e);
  } catch (const Json::exception& e) {
    Error err(ErrorCode::InvalidArgument, std::string("malformed request: ") + e.what());
    res.status = 400;
    res.body = error_envelope(err);
  } catch (const std::exception& e) {
    Error err(ErrorCode::IoError, e.what());
    res.status = 500;
    res.body = error_envelope(err);
  }
  return res;
}

int Service::start(const std::string& host, int port) {
  auto& server = impl_->server;
  auto handler = [this](const httplib::Request& hreq, httplib::Response& hres) {
    ApiRequest req;
    req.method = hreq.method;
    req.path = hreq.path;
    for (const auto& [k, v] : hreq.params) req.query.emplace(k, v);
    req.body = hreq.body;
    req.authorization = hreq.get_header_value("Authorization");
    ApiResponse res = handle(req);
    hres.status = res.status;
    hres.set_content(res.body.dump(), "application/json");
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Patch(".*", handler);
  server.Delete(".*", handler);
  const std::string origin = impl_->cors_origin;
  if (!origin.empty()) {
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
    });
  }
  int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  impl_->listener = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return bound;
}

void Service::wait() {
  if (impl_->listener.joinable()) impl_->listener.join();
}

void Service::stop() {
  impl_->server.stop();
  wait();
}

void Service::drain() {
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->mu);
    workers.swap(impl_->workers);
  }
  for (auto& t : workers) t.join();
}

}  // namespace ooprompt
