#include "ooprompt/mapping.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "ooprompt/codec.hpp"

namespace ooprompt {

using namespace json_util;

namespace {

AssistantResponse call(Assistant& assistant, AssistantRequest req) {
  auto resp = assistant.complete(req);
  if (auto why = check_response(req.role, resp.output); !why.empty()) {
    throw Error(ErrorCode::MalformedResponse, std::string(to_string(req.role)) + " response rejected: " + why,
                Json{{"raw_text", resp.raw_text}});
  }
  return resp;
}

MappingProposal start(const PromptObject* obj, std::string operation) {
  MappingProposal p;
  if (obj) {
    p.object_id = obj->id;
    p.object_version = obj->version;
  }
  p.operation = std::move(operation);
  return p;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const Property& require_property(const PromptObject& obj, std::string_view prop_id) {
  const Property* p = obj.find(prop_id);
  if (!p) {
    throw Error(ErrorCode::UnknownProperty, "object " + obj.id + " has no property '" + std::string(prop_id) + "'",
                Json{{"object_id", obj.id}, {"prop_id", prop_id}});
  }
  return *p;
}

// Values the proposal would add, minus blanks, duplicates and anything already present.
std::vector<std::string> fresh_values(const Json& arr, const std::vector<std::string>& existing,
                                      const std::string& current_value) {
  std::set<std::string> seen;
  for (const auto& e : existing) seen.insert(normalize_name(e));
  if (!current_value.empty()) seen.insert(normalize_name(current_value));
  std::vector<std::string> out;
  for (const auto& v : arr) {
    std::string s = trimmed(v.get<std::string>());
    if (s.empty() || !seen.insert(normalize_name(s)).second) continue;
    out.push_back(std::move(s));
  }
  return out;
}

std::string value_for_payload(const Property& p, const ObjectLookup& lookup) {
  if (p.is_text()) return p.text();
  const PromptObject* child = lookup ? lookup(p.child_id()) : nullptr;
  return "(sub-object: " + (child ? child->title : p.child_id()) + ")";
}

ProposalItemKind kind_from_string(const std::string& s) {
  if (s == "add") return ProposalItemKind::Add;
  if (s == "update") return ProposalItemKind::Update;
  if (s == "remove") return ProposalItemKind::Remove;
  throw Error(ErrorCode::InvalidArgument, "unknown proposal item kind '" + s + "'");
}

ProposalStatus status_from_string(const std::string& s) {
  if (s == "pending") return ProposalStatus::Pending;
  if (s == "applied") return ProposalStatus::Applied;
  if (s == "dismissed") return ProposalStatus::Dismissed;
  throw Error(ErrorCode::InvalidArgument, "unknown proposal status '" + s + "'");
}

std::vector<std::size_t> selected_items(const MappingProposal& proposal, const std::vector<std::size_t>& items) {
  std::vector<std::size_t> out;
  if (items.empty()) {
    for (std::size_t i = 0; i < proposal.items.size(); ++i) {
      if (proposal.items[i].status == ProposalStatus::Pending) out.push_back(i);
    }
    return out;
  }
  std::set<std::size_t> seen;
  for (auto i : items) {
    if (i >= proposal.items.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "proposal " + proposal.id + " has no item " + std::to_string(i));
    }
    if (proposal.items[i].status != ProposalStatus::Pending) {
      throw Error(ErrorCode::InvalidArgument, "item " + std::to_string(i) + " of proposal " + proposal.id +
                                                  " is already " + std::string(to_string(proposal.items[i].status)));
    }
    if (seen.insert(i).second) out.push_back(i);
  }
  return out;
}

}  // namespace

std::string_view to_string(ProposalItemKind k) {
  switch (k) {
    case ProposalItemKind::Add: return "add";
    case ProposalItemKind::Update: return "update";
    case ProposalItemKind::Remove: return "remove";
  }
  return "add";
}

std::string_view to_string(ProposalStatus s) {
  switch (s) {
    case ProposalStatus::Pending: return "pending";
    case ProposalStatus::Applied: return "applied";
    case ProposalStatus::Dismissed: return "dismissed";
  }
  return "pending";
}

std::size_t MappingProposal::pending() const {
  return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const ProposalItem& i) {
    return i.status == ProposalStatus::Pending;
  }));
}

Json to_json(const MappingProposal& p) {
  Json j;
  j["id"] = p.id;
  j["object_id"] = p.object_id;
  j["object_version"] = p.object_version;
  j["operation"] = p.operation;
  Json items = Json::array();
  for (std::size_t i = 0; i < p.items.size(); ++i) {
    const auto& item = p.items[i];
    Json ji;
    ji["index"] = i;
    ji["kind"] = to_string(item.kind);
    ji["status"] = to_string(item.status);
    switch (item.kind) {
      case ProposalItemKind::Add: ji["property"] = to_json(item.addition); break;
      case ProposalItemKind::Update:
        ji["prop_id"] = item.prop_id;
        ji["patch"] = to_json(item.patch);
        break;
      case ProposalItemKind::Remove: ji["prop_id"] = item.prop_id; break;
    }
    ji["rationale"] = item.rationale;
    if (item.span) ji["span"] = Json::array({item.span->begin, item.span->end});
    items.push_back(std::move(ji));
  }
  j["items"] = std::move(items);
  return j;
}

MappingProposal proposal_from_json(const Json& j) {
  MappingProposal p;
  p.id = require_string(j, "id");
  p.object_id = optional_string(j, "object_id");
  p.object_version = require_int(j, "object_version");
  p.operation = optional_string(j, "operation");
  for (const auto& ji : require(j, "items")) {
    ProposalItem item;
    item.kind = kind_from_string(require_string(ji, "kind"));
    item.status = status_from_string(require_string(ji, "status"));
    if (item.kind == ProposalItemKind::Add) item.addition = spec_from_json(require(ji, "property"));
    if (item.kind != ProposalItemKind::Add) item.prop_id = require_string(ji, "prop_id");
    if (item.kind == ProposalItemKind::Update) item.patch = patch_from_json(require(ji, "patch"));
    item.rationale = optional_string(ji, "rationale");
    if (ji.contains("span")) item.span = SourceSpan{ji.at("span").at(0).get<std::size_t>(), ji.at("span").at(1).get<std::size_t>()};
    p.items.push_back(std::move(item));
  }
  return p;
}

Json object_payload(const PromptObject& obj, const ObjectLookup& lookup) {
  Json props = Json::array();
  for (const auto& p : obj.properties) {
    Json jp;
    jp["name"] = p.name;
    jp["value"] = value_for_payload(p, lookup);
    jp["polarity"] = to_string(p.polarity);
    jp["tier"] = to_string(p.tier);
    jp["relation"] = to_json(p.relation);
    props.push_back(std::move(jp));
  }
  return Json{{"title", obj.title}, {"notes", obj.notes}, {"properties", props}};
}

MappingProposal extract_properties(Assistant& assistant, std::string_view raw_text, const PromptObject* target) {
  std::string text(raw_text);
  if (trimmed(text).empty()) throw Error(ErrorCode::EmptyInput, "nothing to extract from empty text");
  AssistantRequest req;
  req.role = AssistantRole::Extractor;
  req.input = Json{{"text", text}};
  auto resp = call(assistant, req);

  MappingProposal out = start(target, "extract");
  std::set<std::string> names;
  for (const auto& jp : resp.output.at("properties")) {
    std::string name = trimmed(jp.at("name").get<std::string>());
    std::string value = jp.at("value").get<std::string>();
    if (normalize_name(name).empty() || !names.insert(normalize_name(name)).second) continue;

    SourceSpan span{0, text.size()};
    bool have_span = false;
    if (jp.contains("span")) {
      auto b = jp.at("span").at(0).get<long long>();
      auto e = jp.at("span").at(1).get<long long>();
      if (b >= 0 && b < e && static_cast<std::size_t>(e) <= text.size()) {
        span = {static_cast<std::size_t>(b), static_cast<std::size_t>(e)};
        have_span = true;
      }
    }
    if (!have_span && !value.empty()) {
      if (auto at = lower(text).find(lower(value)); at != std::string::npos) span = {at, at + value.size()};
    }

    ProposalItem item;
    item.span = span;
    item.rationale = "Stated in the text: \"" + text.substr(span.begin, span.end - span.begin) + "\"";
    const Property* existing = target ? target->find_by_name(name) : nullptr;
    if (existing) {
      if (!existing->is_text() || existing->text() == value) continue;
      item.kind = ProposalItemKind::Update;
      item.prop_id = existing->id;
      item.patch.value = TextValue{value};
    } else {
      item.kind = ProposalItemKind::Add;
      item.addition.name = name;
      item.addition.value = TextValue{value};
      item.addition.provenance = Provenance::Explicit;
    }
    out.items.push_back(std::move(item));
  }
  return out;
}

AssistantRequest implicit_suggestion_request(const PromptObject& obj, const ObjectLookup& lookup) {
  AssistantRequest req;
  req.role = AssistantRole::ImplicitSuggester;
  req.input = Json{{"object", object_payload(obj, lookup)}};
  return req;
}

MappingProposal implicit_suggestions_from(const PromptObject& obj, const AssistantResponse& resp) {
  MappingProposal out = start(&obj, "suggest_implicit_properties");
  std::set<std::string> names;
  for (const auto& p : obj.properties) names.insert(normalize_name(p.name));
  for (const auto& s : resp.output.at("suggestions")) {
    std::string name = trimmed(s.at("name").get<std::string>());
    if (normalize_name(name).empty() || !names.insert(normalize_name(name)).second) continue;
    ProposalItem item;
    item.kind = ProposalItemKind::Add;
    item.addition.name = name;
    item.addition.value = TextValue{s.value("value", "")};
    item.addition.provenance = Provenance::Implicit;
    item.rationale = s.at("rationale").get<std::string>();
    out.items.push_back(std::move(item));
  }
  return out;
}

MappingProposal suggest_implicit_properties(Assistant& assistant, const PromptObject& obj,
                                            const ObjectLookup& lookup) {
  if (obj.properties.empty()) {
    throw Error(ErrorCode::PreconditionFailed, "suggesting implicit properties needs at least one property");
  }
  return implicit_suggestions_from(obj, call(assistant, implicit_suggestion_request(obj, lookup)));
}

MappingProposal detect_relations(Assistant& assistant, const PromptObject& obj, const ObjectLookup& lookup) {
  if (obj.properties.size() < 2) {
    throw Error(ErrorCode::PreconditionFailed, "relation detection needs at least two properties");
  }
  AssistantRequest req;
  req.role = AssistantRole::RelationDetector;
  req.input = Json{{"object", object_payload(obj, lookup)}};
  auto resp = call(assistant, req);

  MappingProposal out = start(&obj, "detect_relations");
  std::set<std::string> assigned;
  std::set<std::string> used_groups;
  for (const auto& p : obj.properties) {
    if (const auto* s = std::get_if<Sequential>(&p.relation)) used_groups.insert(s->group);
  }
  for (const auto& g : resp.output.at("groups")) {
    std::vector<const Property*> members;
    for (const auto& m : g.at("members")) {
      const Property* p = obj.find_by_name(m.get<std::string>());
      if (!p || assigned.count(p->id)) continue;
      if (std::find(members.begin(), members.end(), p) != members.end()) continue;
      members.push_back(p);
    }
    if (members.size() < 2) continue;

    std::string group = trimmed(g.at("group").get<std::string>());
    if (group.empty()) group = "steps";
    // A group name already used by non-members would collide on orders.
    auto taken_by_others = [&](const std::string& name) {
      for (const auto& p : obj.properties) {
        const auto* s = std::get_if<Sequential>(&p.relation);
        if (s && s->group == name && std::find(members.begin(), members.end(), &p) == members.end()) return true;
      }
      return false;
    };
    std::string base = group;
    for (int n = 2; taken_by_others(group); ++n) group = base + " " + std::to_string(n);

    for (std::size_t i = 0; i < members.size(); ++i) {
      const Property* p = members[i];
      assigned.insert(p->id);
      Relation want = Sequential{group, static_cast<int>(i + 1)};
      if (p->relation == want) continue;
      ProposalItem item;
      item.kind = ProposalItemKind::Update;
      item.prop_id = p->id;
      item.patch.relation = want;
      item.rationale = "'" + p->name + "' reads as step " + std::to_string(i + 1) + " of '" + group + "'";
      out.items.push_back(std::move(item));
    }
  }
  return out;
}

MappingProposal generate_candidates(Assistant& assistant, const PromptObject& obj, std::string_view prop_id) {
  const Property& p = require_property(obj, prop_id);
  if (!p.is_text()) {
    throw Error(ErrorCode::NotTextValued, "property '" + p.name + "' holds a sub-object; alternatives live in the child",
                Json{{"prop_id", p.id}});
  }
  AssistantRequest req;
  req.role = AssistantRole::CandidateGenerator;
  Json existing = Json::array();
  for (const auto& c : p.candidates) existing.push_back(c);
  req.input = Json{{"property", {{"name", p.name}, {"value", p.text()}}}, {"existing", existing}};
  auto resp = call(assistant, req);

  MappingProposal out = start(&obj, "generate_candidates");
  auto fresh = fresh_values(resp.output.at("candidates"), p.candidates, p.text());
  if (fresh.size() > kMaxCandidatesPerCall) fresh.resize(kMaxCandidatesPerCall);
  if (fresh.empty()) return out;
  ProposalItem item;
  item.kind = ProposalItemKind::Update;
  item.prop_id = p.id;
  auto all = p.candidates;
  all.insert(all.end(), fresh.begin(), fresh.end());
  item.patch.candidates = all;
  item.rationale = "Alternative ways to describe '" + p.text() + "'";
  out.items.push_back(std::move(item));
  return out;
}

MappingProposal generate_examples(Assistant& assistant, const PromptObject& obj, std::string_view prop_id,
                                  const ObjectLookup& lookup) {
  const Property& p = require_property(obj, prop_id);
  AssistantRequest req;
  req.role = AssistantRole::ExampleGenerator;
  Json existing = Json::array();
  for (const auto& e : p.examples) existing.push_back(e);
  req.input = Json{{"property", {{"name", p.name}, {"value", value_for_payload(p, lookup)}}}, {"existing", existing}};
  auto resp = call(assistant, req);

  MappingProposal out = start(&obj, "generate_examples");
  if (p.examples.size() >= kMaxExamples) return out;
  auto fresh = fresh_values(resp.output.at("examples"), p.examples, "");
  fresh.resize(std::min(fresh.size(), kMaxExamples - p.examples.size()));
  if (fresh.empty()) return out;
  ProposalItem item;
  item.kind = ProposalItemKind::Update;
  item.prop_id = p.id;
  auto all = p.examples;
  all.insert(all.end(), fresh.begin(), fresh.end());
  item.patch.examples = all;
  item.rationale = "Concrete examples of '" + p.name + "'";
  out.items.push_back(std::move(item));
  return out;
}

MappingProposal proposal_from_feedback(const PromptObject& obj, const Json& output, std::string operation) {
  MappingProposal out = start(&obj, std::move(operation));
  std::set<std::string> names;
  for (const auto& p : obj.properties) names.insert(normalize_name(p.name));
  std::set<std::string> touched;

  for (const auto& a : output.at("additions")) {
    std::string name = trimmed(a.at("name").get<std::string>());
    if (normalize_name(name).empty() || !names.insert(normalize_name(name)).second) continue;
    ProposalItem item;
    item.kind = ProposalItemKind::Add;
    item.addition.name = name;
    item.addition.value = TextValue{a.at("value").get<std::string>()};
    item.addition.provenance = Provenance::Suggested;
    item.rationale = a.at("rationale").get<std::string>();
    out.items.push_back(std::move(item));
  }
  for (const auto& u : output.at("updates")) {
    const Property* p = obj.find_by_name(u.at("name").get<std::string>());
    if (!p || touched.count(p->id)) continue;
    PropertyPatch patch;
    if (u.contains("value") && u.at("value").is_string() && p->is_text() &&
        u.at("value").get<std::string>() != p->text()) {
      patch.value = TextValue{u.at("value").get<std::string>()};
    }
    if (u.contains("tier") && u.at("tier").is_string()) {
      try {
        Tier t = tier_from_string(u.at("tier").get<std::string>());
        if (t != p->tier) patch.tier = t;
      } catch (const Error&) {
      }
    }
    if (u.contains("polarity") && u.at("polarity").is_string()) {
      try {
        Polarity pol = polarity_from_string(u.at("polarity").get<std::string>());
        if (pol != p->polarity && !(pol == Polarity::Exclude && p->is_child())) patch.polarity = pol;
      } catch (const Error&) {
      }
    }
    if (patch.empty()) continue;
    touched.insert(p->id);
    ProposalItem item;
    item.kind = ProposalItemKind::Update;
    item.prop_id = p->id;
    item.patch = std::move(patch);
    item.rationale = u.at("rationale").get<std::string>();
    out.items.push_back(std::move(item));
  }
  for (const auto& r : output.at("removals")) {
    const Property* p = obj.find_by_name(r.at("name").get<std::string>());
    if (!p || touched.count(p->id)) continue;
    touched.insert(p->id);
    ProposalItem item;
    item.kind = ProposalItemKind::Remove;
    item.prop_id = p->id;
    item.rationale = r.at("rationale").get<std::string>();
    out.items.push_back(std::move(item));
  }
  return out;
}

MappingProposal apply_holistic_feedback(Assistant& assistant, const PromptObject& obj, std::string_view feedback,
                                        const ObjectLookup& lookup) {
  if (trimmed(std::string(feedback)).empty()) throw Error(ErrorCode::EmptyInput, "feedback is empty");
  AssistantRequest req;
  req.role = AssistantRole::FeedbackIntegrator;
  req.input = Json{{"object", object_payload(obj, lookup)}, {"feedback", std::string(feedback)}};
  auto resp = call(assistant, req);
  return proposal_from_feedback(obj, resp.output, "apply_holistic_feedback");
}

MappingProposal refine_language(Assistant& assistant, const PromptObject& obj, const ObjectLookup& lookup) {
  AssistantRequest req;
  req.role = AssistantRole::Refiner;
  req.input = Json{{"object", object_payload(obj, lookup)}};
  auto resp = call(assistant, req);
  MappingProposal out = start(&obj, "refine_language");
  std::set<std::string> touched;
  for (const auto& r : resp.output.at("refinements")) {
    const Property* p = obj.find_by_name(r.at("name").get<std::string>());
    std::string value = r.at("value").get<std::string>();
    if (!p || !p->is_text() || p->text() == value || !touched.insert(p->id).second) continue;
    ProposalItem item;
    item.kind = ProposalItemKind::Update;
    item.prop_id = p->id;
    item.patch.value = TextValue{value};
    item.rationale = r.at("rationale").get<std::string>();
    out.items.push_back(std::move(item));
  }
  return out;
}

ApplyResult apply_proposal(const PromptObject& obj, const MappingProposal& proposal,
                           const std::vector<std::size_t>& items, IdAllocator& ids) {
  if (!proposal.object_id.empty() && proposal.object_id != obj.id) {
    throw Error(ErrorCode::InvalidArgument,
                "proposal " + proposal.id + " targets " + proposal.object_id + ", not " + obj.id);
  }
  auto chosen = selected_items(proposal, items);
  ApplyResult result{obj, proposal};
  if (chosen.empty()) return result;

  IdAllocator trial = ids;
  PromptObject& out = result.object;
  for (auto i : chosen) {
    const ProposalItem& item = proposal.items[i];
    switch (item.kind) {
      case ProposalItemKind::Add: {
        if (normalize_name(item.addition.name).empty()) {
          throw Error(ErrorCode::EmptyName, "proposal item " + std::to_string(i) + " has an empty name");
        }
        if (out.find_by_name(item.addition.name)) {
          throw Error(ErrorCode::DuplicateName,
                      "object " + obj.id + " already has a property named '" + item.addition.name + "'",
                      Json{{"item", i}});
        }
        out.properties.push_back(make_property(item.addition, trial.issue(IdKind::Property)));
        break;
      }
      case ProposalItemKind::Update: {
        auto it = std::find_if(out.properties.begin(), out.properties.end(),
                               [&](const Property& p) { return p.id == item.prop_id; });
        if (it == out.properties.end()) require_property(out, item.prop_id);
        const PropertyPatch& patch = item.patch;
        if (patch.name) it->name = *patch.name;
        if (patch.value) it->value = *patch.value;
        if (patch.polarity) it->polarity = *patch.polarity;
        if (patch.tier) it->tier = *patch.tier;
        if (patch.relation) it->relation = *patch.relation;
        if (patch.candidates) it->candidates = *patch.candidates;
        if (patch.examples) it->examples = *patch.examples;
        if (patch.references) it->references = *patch.references;
        break;
      }
      case ProposalItemKind::Remove: {
        require_property(out, item.prop_id);
        out.properties.erase(std::remove_if(out.properties.begin(), out.properties.end(),
                                            [&](const Property& p) { return p.id == item.prop_id; }),
                             out.properties.end());
        break;
      }
    }
    result.proposal.items[i].status = ProposalStatus::Applied;
  }
  auto before = validate_object(obj);
  for (const auto& v : validate_object(out)) {
    if (std::find(before.begin(), before.end(), v) == before.end()) {
      throw Error(ErrorCode::InvariantViolation, std::string(to_string(v.kind)) + ": " + v.detail,
                  Json{{"entity", v.entity}});
    }
  }
  out.version = obj.version + 1;
  ids = trial;
  return result;
}

MappingProposal dismiss_items(const MappingProposal& proposal, const std::vector<std::size_t>& items) {
  MappingProposal out = proposal;
  for (auto i : selected_items(proposal, items)) out.items[i].status = ProposalStatus::Dismissed;
  return out;
}

}  // namespace ooprompt
