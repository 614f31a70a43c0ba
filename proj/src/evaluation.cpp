#include "ooprompt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ooprompt/codec.hpp"

namespace ooprompt {

using namespace json_util;

std::vector<Criterion> default_criteria() {
  return {
      {"length_fit", "The output has an appropriate length for the task", 1.0},
      {"style_fit", "The output matches the requested style and tone", 1.0},
      {"cohesiveness", "The output is cohesive and reads as one consistent piece", 1.0},
  };
}

Json to_json(const Criterion& c) {
  Json j;
  j["id"] = c.id;
  j["description"] = c.description;
  j["weight"] = c.weight;
  return j;
}

Criterion criterion_from_json(const Json& j) {
  Criterion c;
  c.id = require_string(j, "id");
  c.description = require_string(j, "description");
  if (j.contains("weight")) {
    if (!j.at("weight").is_number()) throw Error(ErrorCode::InvalidArgument, "criterion weight must be a number");
    c.weight = j.at("weight").get<double>();
  }
  return c;
}

namespace {

std::string error_text(const Error& e) { return std::string(to_string(e.code())) + ": " + e.what(); }

void check_inputs(const std::vector<DeploymentArtifact>& artifacts, const std::vector<Criterion>& criteria,
                  const std::vector<std::string>& models) {
  if (artifacts.size() < 2) throw Error(ErrorCode::InvalidArgument, "a comparison needs at least two artifacts");
  if (criteria.empty()) throw Error(ErrorCode::InvalidArgument, "a comparison needs at least one criterion");
  if (models.empty()) throw Error(ErrorCode::InvalidArgument, "a comparison needs at least one model");
  std::set<std::string> ids;
  for (const auto& c : criteria) {
    if (c.id.empty() || !ids.insert(c.id).second) {
      throw Error(ErrorCode::InvalidArgument, "criterion ids must be nonempty and unique");
    }
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw Error(ErrorCode::InvalidArgument, "criterion '" + c.id + "' needs a positive weight");
    }
  }
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

ComparisonReport run_comparison(Assistant& assistant, const std::vector<DeploymentArtifact>& artifacts,
                                const std::vector<Criterion>& criteria, const std::vector<std::string>& models,
                                std::string run_id, std::string timestamp) {
  check_inputs(artifacts, criteria, models);
  ComparisonReport report;
  report.run_id = std::move(run_id);
  report.timestamp = std::move(timestamp);
  report.criteria = criteria;
  report.models = models;

  const std::size_t n_models = models.size();
  std::vector<AssistantRequest> gen_reqs;
  for (const auto& a : artifacts) {
    for (const auto& m : models) {
      AssistantRequest req;
      req.role = AssistantRole::Generator;
      req.input = Json{{"prompt", a.text}, {"model", m}};
      req.model_hint = m;
      req.temperature = 0.7;
      gen_reqs.push_back(std::move(req));
    }
  }
  auto generated = fan_out(assistant, gen_reqs);

  // Judge every successful output against every criterion.
  std::vector<AssistantRequest> judge_reqs;
  std::vector<std::size_t> judge_gen;  // index into generated
  for (std::size_t g = 0; g < generated.size(); ++g) {
    if (!generated[g].ok()) continue;
    for (const auto& c : criteria) {
      AssistantRequest req;
      req.role = AssistantRole::Judge;
      req.input = Json{{"criterion", {{"id", c.id}, {"description", c.description}}},
                       {"output", generated[g].response->output.at("text")},
                       {"prompt", artifacts[g / n_models].text}};
      req.temperature = 0.0;
      judge_reqs.push_back(std::move(req));
      judge_gen.push_back(g);
    }
  }
  auto judged = fan_out(assistant, judge_reqs);

  report.results.resize(artifacts.size());
  for (std::size_t i = 0; i < artifacts.size(); ++i) report.results[i].artifact = artifacts[i];

  for (std::size_t g = 0; g < generated.size(); ++g) {
    auto& res = report.results[g / n_models];
    Generation gen{models[g % n_models], std::nullopt, std::nullopt};
    if (generated[g].ok()) {
      gen.text = generated[g].response->output.at("text").get<std::string>();
    } else {
      gen.error = error_text(*generated[g].error);
      res.errors.push_back("generation with " + gen.model + " failed: " + *gen.error);
    }
    res.generations.push_back(std::move(gen));
  }

  // (artifact, model) pairs count only when every criterion was judged.
  std::vector<std::vector<std::optional<Verdict>>> per_gen(generated.size(),
                                                          std::vector<std::optional<Verdict>>(criteria.size()));
  for (std::size_t k = 0; k < judged.size(); ++k) {
    std::size_t g = judge_gen[k];
    std::size_t c = k % criteria.size();
    auto& res = report.results[g / n_models];
    if (!judged[k].ok()) {
      res.errors.push_back("judging '" + criteria[c].id + "' for " + models[g % n_models] +
                           " failed: " + error_text(*judged[k].error));
      continue;
    }
    const Json& out = judged[k].response->output;
    per_gen[g][c] = Verdict{criteria[c].id, models[g % n_models], out.at("score").get<double>(),
                            out.at("justification").get<std::string>(), out.value("suggestion", "")};
  }

  double weight_sum = 0.0;
  for (const auto& c : criteria) weight_sum += c.weight;
  for (std::size_t i = 0; i < artifacts.size(); ++i) {
    auto& res = report.results[i];
    std::vector<double> sums(criteria.size(), 0.0);
    std::size_t complete = 0;
    for (std::size_t m = 0; m < n_models; ++m) {
      const auto& vs = per_gen[i * n_models + m];
      if (!std::all_of(vs.begin(), vs.end(), [](const auto& v) { return v.has_value(); })) continue;
      ++complete;
      for (std::size_t c = 0; c < criteria.size(); ++c) {
        sums[c] += vs[c]->score;
        res.verdicts.push_back(*vs[c]);
      }
    }
    if (complete == 0) continue;
    double weighted = 0.0;
    for (std::size_t c = 0; c < criteria.size(); ++c) {
      res.criterion_scores.push_back(sums[c] / static_cast<double>(complete));
      weighted += criteria[c].weight * res.criterion_scores.back();
    }
    res.weighted_score = weighted / weight_sum;
  }

  std::vector<std::size_t> order(artifacts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = report.results[a];
    const auto& rb = report.results[b];
    if (ra.ok() != rb.ok()) return ra.ok();
    if (!ra.ok()) return false;
    return *ra.weighted_score > *rb.weighted_score;
  });
  for (auto i : order) report.ranking.push_back(RankEntry{i, report.results[i].weighted_score});

  for (std::size_t a = 0; a < artifacts.size(); ++a) {
    for (std::size_t b = a + 1; b < artifacts.size(); ++b) {
      const auto& ra = report.results[a];
      const auto& rb = report.results[b];
      if (!ra.ok() || !rb.ok()) continue;
      Preference p{a, b, std::nullopt, std::abs(*ra.weighted_score - *rb.weighted_score)};
      if (*ra.weighted_score > *rb.weighted_score) p.preferred = a;
      if (*rb.weighted_score > *ra.weighted_score) p.preferred = b;
      report.preferences.push_back(p);
    }
  }

  std::set<std::string> seen;
  for (const auto& res : report.results) {
    for (const auto& v : res.verdicts) {
      if (!v.suggestion.empty() && seen.insert(v.suggestion).second) report.suggestions.push_back(v.suggestion);
    }
  }
  return report;
}

Json to_json(const ComparisonReport& r) {
  Json j;
  j["run_id"] = r.run_id;
  j["timestamp"] = r.timestamp;
  j["criteria"] = Json::array();
  for (const auto& c : r.criteria) j["criteria"].push_back(to_json(c));
  j["models"] = r.models;
  j["artifacts"] = Json::array();
  for (std::size_t i = 0; i < r.results.size(); ++i) {
    const auto& res = r.results[i];
    Json ja;
    ja["index"] = i;
    ja["object_id"] = res.artifact.object_id;
    ja["object_version"] = res.artifact.object_version;
    ja["format"] = to_string(res.artifact.format);
    ja["variant_key"] = res.artifact.variant_key;
    ja["status"] = res.ok() ? "ok" : "error";
    ja["weighted_score"] = optional_number(res.weighted_score);
    ja["criterion_scores"] = res.criterion_scores;
    ja["verdicts"] = Json::array();
    for (const auto& v : res.verdicts) {
      ja["verdicts"].push_back(Json{{"criterion_id", v.criterion_id},
                                    {"model", v.model},
                                    {"score", v.score},
                                    {"justification", v.justification},
                                    {"suggestion", v.suggestion}});
    }
    ja["errors"] = res.errors;
    ja["prompt"] = res.artifact.text;
    ja["outputs"] = Json::array();
    for (const auto& g : res.generations) {
      Json jg;
      jg["model"] = g.model;
      jg["text"] = g.text ? Json(*g.text) : Json(nullptr);
      jg["error"] = g.error ? Json(*g.error) : Json(nullptr);
      ja["outputs"].push_back(std::move(jg));
    }
    j["artifacts"].push_back(std::move(ja));
  }
  j["ranking"] = Json::array();
  for (const auto& e : r.ranking) {
    j["ranking"].push_back(Json{{"artifact", e.artifact}, {"score", optional_number(e.score)}});
  }
  j["preferences"] = Json::array();
  for (const auto& p : r.preferences) {
    j["preferences"].push_back(Json{{"a", p.a},
                                    {"b", p.b},
                                    {"preferred", p.preferred ? Json(*p.preferred) : Json(nullptr)},
                                    {"margin", p.margin}});
  }
  j["suggestions"] = r.suggestions;
  return j;
}

ComparisonReport report_from_json(const Json& j) {
  ComparisonReport r;
  r.run_id = require_string(j, "run_id");
  r.timestamp = optional_string(j, "timestamp");
  for (const auto& c : require(j, "criteria")) r.criteria.push_back(criterion_from_json(c));
  r.models = string_list(j, "models");
  for (const auto& ja : require(j, "artifacts")) {
    ArtifactResult res;
    res.artifact.object_id = require_string(ja, "object_id");
    res.artifact.object_version = require_int(ja, "object_version");
    res.artifact.format = format_from_string(require_string(ja, "format"));
    res.artifact.variant_key = optional_string(ja, "variant_key");
    res.artifact.text = optional_string(ja, "prompt");
    if (ja.contains("weighted_score") && ja.at("weighted_score").is_number()) {
      res.weighted_score = ja.at("weighted_score").get<double>();
    }
    res.criterion_scores = ja.value("criterion_scores", std::vector<double>{});
    for (const auto& v : require(ja, "verdicts")) {
      res.verdicts.push_back(Verdict{require_string(v, "criterion_id"), require_string(v, "model"),
                                     require(v, "score").get<double>(), require_string(v, "justification"),
                                     optional_string(v, "suggestion")});
    }
    res.errors = string_list(ja, "errors");
    for (const auto& g : require(ja, "outputs")) {
      Generation gen;
      gen.model = require_string(g, "model");
      if (g.contains("text") && g.at("text").is_string()) gen.text = g.at("text").get<std::string>();
      if (g.contains("error") && g.at("error").is_string()) gen.error = g.at("error").get<std::string>();
      res.generations.push_back(std::move(gen));
    }
    r.results.push_back(std::move(res));
  }
  for (const auto& e : require(j, "ranking")) {
    RankEntry re;
    re.artifact = require(e, "artifact").get<std::size_t>();
    if (e.contains("score") && e.at("score").is_number()) re.score = e.at("score").get<double>();
    r.ranking.push_back(re);
  }
  for (const auto& p : require(j, "preferences")) {
    Preference pref;
    pref.a = require(p, "a").get<std::size_t>();
    pref.b = require(p, "b").get<std::size_t>();
    if (p.contains("preferred") && p.at("preferred").is_number()) pref.preferred = p.at("preferred").get<std::size_t>();
    pref.margin = require(p, "margin").get<double>();
    r.preferences.push_back(pref);
  }
  r.suggestions = string_list(j, "suggestions");
  return r;
}

MappingProposal suggest_from_report(Assistant& assistant, const ComparisonReport& report, const PromptObject& obj,
                                    const ObjectLookup& lookup) {
  if (report.suggestions.empty()) {
    MappingProposal empty;
    empty.object_id = obj.id;
    empty.object_version = obj.version;
    empty.operation = "suggest_from_report";
    return empty;
  }
  std::string feedback;
  for (const auto& s : report.suggestions) feedback += (feedback.empty() ? "" : "\n") + s;
  AssistantRequest req;
  req.role = AssistantRole::FeedbackIntegrator;
  req.input = Json{{"object", object_payload(obj, lookup)}, {"feedback", feedback}};
  auto resp = assistant.complete(req);
  if (auto why = check_response(req.role, resp.output); !why.empty()) {
    throw Error(ErrorCode::MalformedResponse, "feedback_integrator response rejected: " + why);
  }
  return proposal_from_feedback(obj, resp.output, "suggest_from_report");
}

}  // namespace ooprompt
