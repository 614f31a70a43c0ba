#include "ooprompt/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace ooprompt {

namespace {

std::string word_string(std::string_view text) {
  std::string out = " ";
  bool in_word = false;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      out += static_cast<char>(std::tolower(c));
      in_word = true;
    } else if (in_word) {
      out += ' ';
      in_word = false;
    }
  }
  if (in_word) out += ' ';
  return out;
}

bool has_term(const std::string& words, const std::string& term) {
  std::string t = word_string(term);
  return t.size() > 2 && words.find(t) != std::string::npos;
}

std::string property_words(const Property& p) {
  return word_string(p.name + " " + p.text() + " " + [&] {
    std::string ex;
    for (const auto& e : p.examples) ex += e + " ";
    return ex;
  }());
}

bool is_audience(const Property& p) { return normalize_name(p.name).find("audience") != std::string::npos; }

bool audience_is_children(const PromptObject& obj) {
  for (const auto& p : obj.properties) {
    if (p.polarity != Polarity::Include || !is_audience(p)) continue;
    auto w = word_string(p.text());
    for (const char* kid : {"child", "children", "kid", "kids", "toddler", "toddlers"}) {
      if (has_term(w, kid)) return true;
    }
  }
  return false;
}

const Property* by_name(const PromptObject& obj, const Json& name) {
  return name.is_string() ? obj.find_by_name(name.get<std::string>()) : nullptr;
}

Json status_json(const SectionStatus& s) {
  Json j;
  j["status"] = s.ran ? "ok" : "skipped";
  if (!s.ran) j["reason"] = s.reason;
  return j;
}

SectionStatus skipped(std::string reason) { return SectionStatus{false, std::move(reason)}; }

}  // namespace

std::vector<StructuralConflict> detect_structural_conflicts(const PromptObject& obj, const ObjectLookup& lookup) {
  std::vector<StructuralConflict> out;

  std::vector<const Property*> include, exclude;
  for (const auto& p : obj.properties) (p.polarity == Polarity::Include ? include : exclude).push_back(&p);
  for (const Property* x : exclude) {
    const std::string xname = normalize_name(x->name);
    const std::string xvalue = normalize_name(x->text());
    for (const Property* i : include) {
      const std::string iname = normalize_name(i->name);
      const std::string ivalue = normalize_name(i->text());
      bool same_name = xname == iname;
      bool same_value = !xvalue.empty() && xvalue == ivalue;
      if (!same_name && !same_value) continue;
      out.push_back({"include_exclude",
                     {i->id, x->id},
                     "'" + (same_value ? i->text() : i->name) + "' is both wanted ('" + i->name +
                         "') and excluded ('" + x->name + "')"});
    }
  }

  std::vector<std::string> group_order;
  std::map<std::string, std::vector<const Property*>> groups;
  for (const auto& p : obj.properties) {
    if (const auto* s = std::get_if<Sequential>(&p.relation)) {
      if (!groups.count(s->group)) group_order.push_back(s->group);
      groups[s->group].push_back(&p);
    }
  }
  for (const auto& g : group_order) {
    std::set<int> orders;
    std::vector<std::string> ids;
    for (const Property* p : groups[g]) {
      orders.insert(std::get<Sequential>(p->relation).order);
      ids.push_back(p->id);
    }
    int top = orders.empty() ? 0 : *orders.rbegin();
    std::vector<int> missing;
    for (int k = 1; k <= top; ++k) {
      if (!orders.count(k)) missing.push_back(k);
    }
    if (missing.empty()) continue;
    std::string m;
    for (int k : missing) m += (m.empty() ? "" : ", ") + std::to_string(k);
    out.push_back({"sequential_gap", ids,
                   "sequential group '" + g + "' is missing step" + (missing.size() > 1 ? "s " : " ") + m});
  }

  if (lookup) {
    for (const auto& p : obj.properties) {
      if (p.is_child() && !lookup(p.child_id())) {
        out.push_back({"dangling_child", {p.id}, "property '" + p.name + "' refers to missing object " + p.child_id()});
      }
    }
  }
  return out;
}

AssistantRequest semantic_conflict_request(const PromptObject& obj, const ObjectLookup& lookup) {
  AssistantRequest req;
  req.role = AssistantRole::ConflictChecker;
  req.input = Json{{"object", object_payload(obj, lookup)}};
  return req;
}

std::vector<SemanticConflict> semantic_conflicts_from(const PromptObject& obj, const AssistantResponse& resp) {
  std::vector<SemanticConflict> out;
  for (const auto& c : resp.output.at("conflicts")) {
    SemanticConflict sc;
    bool resolved = true;
    for (const auto& name : c.at("properties")) {
      const Property* p = by_name(obj, name);
      if (!p) {
        resolved = false;
        break;
      }
      if (std::find(sc.prop_ids.begin(), sc.prop_ids.end(), p->id) == sc.prop_ids.end()) sc.prop_ids.push_back(p->id);
    }
    if (!resolved || sc.prop_ids.size() < 2) continue;
    sc.explanation = c.at("explanation").get<std::string>();
    sc.suggested_fix = c.at("suggested_fix").get<std::string>();
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<SemanticConflict> detect_semantic_conflicts(Assistant& assistant, const PromptObject& obj,
                                                        const ObjectLookup& lookup) {
  if (obj.properties.size() < 2) return {};
  auto req = semantic_conflict_request(obj, lookup);
  auto resp = assistant.complete(req);
  if (auto why = check_response(req.role, resp.output); !why.empty()) {
    throw Error(ErrorCode::MalformedResponse, "conflict_checker response rejected: " + why);
  }
  return semantic_conflicts_from(obj, resp);
}

std::size_t estimate_tokens(std::string_view text) {
  std::size_t code_points = 0;
  for (char ch : text) {
    if ((static_cast<unsigned char>(ch) & 0xC0) != 0x80) ++code_points;
  }
  return (code_points + 3) / 4;
}

std::size_t estimate_tokens(const DeploymentArtifact& artifact) { return estimate_tokens(artifact.text); }

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& x : sa) common += sb.count(x);
  return static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
}

std::vector<TemplateScore> template_similarity(const PromptObject& obj, const TemplateLibrary& library) {
  if (library.empty()) throw Error(ErrorCode::EmptyLibrary, "the template library is empty");
  std::vector<std::string> names;
  for (const auto& p : obj.properties) {
    if (p.polarity == Polarity::Include) names.push_back(normalize_name(p.name));
  }
  std::vector<TemplateScore> out;
  for (const auto& t : library.all()) {
    std::vector<std::string> defaults;
    for (const auto& d : t.defaults) defaults.push_back(normalize_name(d.name));
    out.push_back({t.id, jaccard(names, defaults)});
  }
  std::stable_sort(out.begin(), out.end(), [](const TemplateScore& a, const TemplateScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.template_id < b.template_id;
  });
  return out;
}

std::vector<std::string> default_safety_blocklist() {
  return {"horror", "sorrow", "gore", "gory", "violence", "violent", "blood", "murder", "death",
          "scary", "terrifying", "weapons", "drugs", "alcohol", "abuse", "war"};
}

std::vector<std::string> parse_blocklist(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto term = normalize_name(line);
    if (term.empty() || term[0] == '#') continue;
    out.push_back(term);
  }
  return out;
}

std::vector<SafetyFlag> safety_scan_rules(const PromptObject& obj, const std::vector<std::string>& blocklist) {
  std::vector<SafetyFlag> out;
  if (!audience_is_children(obj)) return out;
  for (const auto& p : obj.properties) {
    if (p.polarity != Polarity::Include || is_audience(p)) continue;
    auto words = property_words(p);
    for (const auto& term : blocklist) {
      if (has_term(words, term)) {
        out.push_back({p.id, "dark_theme_for_children",
                       "'" + p.name + "' mentions \"" + term + "\" while the audience is children", "rule"});
        break;
      }
    }
  }
  return out;
}

AssistantRequest safety_request(const PromptObject& obj, const ObjectLookup& lookup) {
  AssistantRequest req;
  req.role = AssistantRole::SafetyChecker;
  req.input = Json{{"object", object_payload(obj, lookup)}};
  return req;
}

std::vector<SafetyFlag> safety_flags_from(const PromptObject& obj, const AssistantResponse& resp) {
  std::vector<SafetyFlag> out;
  for (const auto& f : resp.output.at("flags")) {
    SafetyFlag flag;
    if (f.contains("property")) {
      if (const Property* p = by_name(obj, f.at("property"))) flag.prop_id = p->id;
    }
    flag.category = f.at("category").get<std::string>();
    flag.explanation = f.at("explanation").get<std::string>();
    flag.source = "assistant";
    out.push_back(std::move(flag));
  }
  return out;
}

AnalysisReport build_static_report(Assistant& assistant, const PromptObject& obj, const TemplateLibrary& library,
                                   const DeploymentArtifact& artifact, const std::vector<std::string>& blocklist,
                                   const ObjectLookup& lookup) {
  AnalysisReport r;
  r.object_id = obj.id;
  r.object_version = obj.version;
  r.structural_conflicts = detect_structural_conflicts(obj, lookup);
  r.token_estimate = estimate_tokens(artifact);
  if (!library.empty()) r.template_similarity = template_similarity(obj, library);
  r.safety_flags = safety_scan_rules(obj, blocklist);

  enum Slot { kConflicts, kSafety, kCompleteness };
  std::vector<AssistantRequest> reqs;
  std::vector<Slot> slots;
  if (obj.properties.size() >= 2) {
    reqs.push_back(semantic_conflict_request(obj, lookup));
    slots.push_back(kConflicts);
  }
  reqs.push_back(safety_request(obj, lookup));
  slots.push_back(kSafety);
  if (!obj.properties.empty()) {
    reqs.push_back(implicit_suggestion_request(obj, lookup));
    slots.push_back(kCompleteness);
  } else {
    r.completeness_status = skipped("the object has no properties yet");
  }

  auto results = fan_out(assistant, reqs);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& res = results[i];
    SectionStatus status;
    if (!res.ok()) status = skipped(std::string(to_string(res.error->code())) + ": " + res.error->what());
    switch (slots[i]) {
      case kConflicts:
        r.semantic_status = status;
        if (res.ok()) r.semantic_conflicts = semantic_conflicts_from(obj, *res.response);
        break;
      case kSafety:
        r.safety_assistant_status = status;
        if (res.ok()) {
          auto more = safety_flags_from(obj, *res.response);
          r.safety_flags.insert(r.safety_flags.end(), more.begin(), more.end());
        }
        break;
      case kCompleteness:
        r.completeness_status = status;
        if (res.ok()) r.completeness_suggestions = implicit_suggestions_from(obj, *res.response);
        break;
    }
  }
  return r;
}

Json to_json(const AnalysisReport& r) {
  Json j;
  j["object_id"] = r.object_id;
  j["object_version"] = r.object_version;
  Json structural = Json::array();
  for (const auto& c : r.structural_conflicts) {
    structural.push_back(Json{{"kind", c.kind}, {"prop_ids", c.prop_ids}, {"message", c.message}});
  }
  j["structural_conflicts"] = std::move(structural);

  Json semantic = status_json(r.semantic_status);
  semantic["items"] = Json::array();
  for (const auto& c : r.semantic_conflicts) {
    semantic["items"].push_back(
        Json{{"prop_ids", c.prop_ids}, {"explanation", c.explanation}, {"suggested_fix", c.suggested_fix}});
  }
  j["semantic_conflicts"] = std::move(semantic);

  j["token_estimate"] = r.token_estimate;

  Json sim = Json::array();
  for (const auto& s : r.template_similarity) sim.push_back(Json{{"template_id", s.template_id}, {"score", s.score}});
  j["template_similarity"] = std::move(sim);

  Json safety;
  safety["assistant"] = status_json(r.safety_assistant_status);
  safety["flags"] = Json::array();
  for (const auto& f : r.safety_flags) {
    Json jf;
    jf["prop_id"] = f.prop_id.empty() ? Json(nullptr) : Json(f.prop_id);
    jf["category"] = f.category;
    jf["explanation"] = f.explanation;
    jf["source"] = f.source;
    safety["flags"].push_back(std::move(jf));
  }
  j["safety"] = std::move(safety);

  Json completeness = status_json(r.completeness_status);
  completeness["proposal"] = r.completeness_suggestions ? to_json(*r.completeness_suggestions) : Json(nullptr);
  j["completeness_suggestions"] = std::move(completeness);
  return j;
}

std::vector<std::string> cited_property_ids(const AnalysisReport& r) {
  std::vector<std::string> ids;
  for (const auto& c : r.structural_conflicts) ids.insert(ids.end(), c.prop_ids.begin(), c.prop_ids.end());
  for (const auto& c : r.semantic_conflicts) ids.insert(ids.end(), c.prop_ids.begin(), c.prop_ids.end());
  for (const auto& f : r.safety_flags) {
    if (!f.prop_id.empty()) ids.push_back(f.prop_id);
  }
  if (r.completeness_suggestions) {
    for (const auto& item : r.completeness_suggestions->items) {
      if (!item.prop_id.empty()) ids.push_back(item.prop_id);
    }
  }
  return ids;
}

}  // namespace ooprompt
