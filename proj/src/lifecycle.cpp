#include "ooprompt/lifecycle.hpp"

#include <algorithm>
#include <cstdlib>

#include "ooprompt/analysis.hpp"
#include "ooprompt/codec.hpp"
#include "ooprompt/mapping.hpp"
#include "ooprompt/versioning.hpp"

namespace ooprompt {

namespace {

constexpr std::size_t kMaxTitleLength = 80;

std::string title_from_text(const std::string& text) {
  auto b = text.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = text.find('\n', b);
  std::string line = text.substr(b, e == std::string::npos ? std::string::npos : e - b);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
  if (line.size() > kMaxTitleLength) line = line.substr(0, kMaxTitleLength - 3) + "...";
  return line;
}

std::string items_label(const std::vector<std::size_t>& items) {
  if (items.empty()) return "all pending";
  std::string s = "items";
  for (auto i : items) s += " " + std::to_string(i);
  return s;
}

}  // namespace

std::string default_eval_model() {
  if (const char* m = std::getenv("OOPROMPT_MODEL"); m && *m) return m;
  return "gpt-4o-mini";
}

std::string Lifecycle::resolve_property(const PromptObject& obj, std::string_view ref) {
  if (const Property* p = obj.find(ref)) return p->id;
  if (const Property* p = obj.find_by_name(ref)) return p->id;
  throw Error(ErrorCode::UnknownProperty, "object " + obj.id + " has no property '" + std::string(ref) + "'",
              Json{{"object_id", obj.id}, {"property", ref}});
}

const PromptObject& Lifecycle::current(std::string_view id, std::optional<int> expected) const {
  const PromptObject& obj = ws_.object(id);
  if (expected && *expected != obj.version) {
    throw Error(ErrorCode::VersionConflict,
                obj.id + " is at version " + std::to_string(obj.version) + ", not " + std::to_string(*expected),
                Json{{"object_id", obj.id}, {"current_version", obj.version}, {"expected_version", *expected}});
  }
  return obj;
}

Json Lifecycle::commit(PromptObject obj, std::string changelog) {
  ws_.commit(obj, std::move(changelog));
  return to_json(ws_.object(obj.id));
}

Json Lifecycle::save(MappingProposal p) { return to_json(ws_.save_proposal(std::move(p))); }

Json Lifecycle::list_objects() const {
  Json out = Json::array();
  for (const PromptObject* obj : ws_.objects()) {
    out.push_back(Json{{"id", obj->id},
                       {"title", obj->title},
                       {"version", obj->version},
                       {"properties", obj->properties.size()},
                       {"orphan", ws_.is_orphan(obj->id)}});
  }
  return out;
}

Json Lifecycle::show_object(std::string_view id) const { return to_json(ws_.object(id)); }

Json Lifecycle::create_object(const std::string& title, const std::vector<std::string>& template_refs,
                              const std::map<std::string, std::vector<std::string>>& selections,
                              const std::string& notes) {
  std::vector<const Template*> parents;
  std::vector<std::optional<std::vector<std::string>>> picks;
  for (const auto& ref : template_refs) {
    const Template* t = ws_.templates().find(ref);
    if (!t) throw Error(ErrorCode::UnknownTemplate, "no template '" + ref + "'", Json{{"template_id", ref}});
    parents.push_back(t);
    auto sel = selections.find(ref);
    picks.push_back(sel == selections.end() ? std::nullopt : std::optional(sel->second));
  }
  for (const auto& [ref, names] : selections) {
    if (std::find(template_refs.begin(), template_refs.end(), ref) == template_refs.end()) {
      throw Error(ErrorCode::InvalidArgument, "selection given for template '" + ref + "' which is not a parent");
    }
  }
  IdAllocator trial = ws_.ids();
  std::string id = trial.issue(IdKind::Object);
  std::vector<Property> inherited;
  if (!parents.empty()) inherited = merge_templates(parents, picks, trial);
  PromptObject obj = make_object(id, title, template_refs, std::move(inherited));
  obj.notes = notes;
  if (normalize_name(title).empty()) throw Error(ErrorCode::EmptyName, "object title is empty");
  ws_.ids() = trial;
  std::string changelog = "create_object " + obj.id;
  if (!template_refs.empty()) {
    changelog += " from";
    for (const auto& r : template_refs) changelog += " " + r;
  }
  return commit(std::move(obj), changelog);
}

Json Lifecycle::edit_object(std::string_view id, const ObjectPatch& patch, std::optional<int> expected) {
  const PromptObject& obj = current(id, expected);
  if (patch.title && normalize_name(*patch.title).empty()) throw Error(ErrorCode::EmptyName, "object title is empty");
  return commit(update_object(obj, patch), "update_object " + obj.id);
}

Json Lifecycle::delete_object(std::string_view id) {
  std::string key(id);
  ws_.delete_object(key);
  return Json{{"deleted", key}};
}

Json Lifecycle::add_property(std::string_view id, const PropertySpec& spec, std::optional<int> expected) {
  const PromptObject& obj = current(id, expected);
  IdAllocator trial = ws_.ids();
  PromptObject next = ooprompt::add_property(obj, spec, trial);
  const std::string& pid = next.properties.back().id;
  std::string changelog = "add_property " + pid;
  Json out = commit(std::move(next), changelog);
  ws_.ids() = trial;
  return out;
}

Json Lifecycle::update_property(std::string_view id, std::string_view prop, const PropertyPatch& patch,
                                std::optional<int> expected) {
  const PromptObject& obj = current(id, expected);
  std::string pid = resolve_property(obj, prop);
  return commit(ooprompt::update_property(obj, pid, patch), "update_property " + pid);
}

Json Lifecycle::remove_property(std::string_view id, std::string_view prop, std::optional<int> expected) {
  const PromptObject& obj = current(id, expected);
  std::string pid = resolve_property(obj, prop);
  return commit(ooprompt::remove_property(obj, pid), "remove_property " + pid);
}

Json Lifecycle::nest(std::string_view id, std::string_view prop, std::optional<int> expected) {
  const PromptObject& obj = current(id, expected);
  std::string pid = resolve_property(obj, prop);
  IdAllocator trial = ws_.ids();
  auto [parent, child] = nest_child(obj, pid, trial);
  std::string child_id = child.id;
  ws_.commit({{child, "create_object " + child_id + " nested from " + obj.id + "/" + pid},
              {parent, "nest_child " + pid + " -> " + child_id}});
  ws_.ids() = trial;
  return Json{{"parent", to_json(ws_.object(parent.id))}, {"child", to_json(ws_.object(child_id))}};
}

Json Lifecycle::promote(std::string_view id, std::string_view prop, std::optional<int> expected) {
  const PromptObject& obj = current(id, expected);
  std::string pid = resolve_property(obj, prop);
  const Property& p = *obj.find(pid);
  if (!p.is_child()) {
    throw Error(ErrorCode::NotNested, "property '" + p.name + "' is not nested", Json{{"prop_id", pid}});
  }
  std::string child_id = p.child_id();
  PromptObject next = promote_child(obj, pid, ws_.object(child_id));
  Json out = commit(std::move(next), "promote_child " + pid + " <- " + child_id);
  ws_.delete_object(child_id);
  return out;
}

Json Lifecycle::reorder(std::string_view id, const std::vector<std::string>& props, std::optional<int> expected) {
  const PromptObject& obj = current(id, expected);
  std::vector<std::string> order;
  for (const auto& ref : props) order.push_back(resolve_property(obj, ref));
  return commit(reorder_properties(obj, order), "reorder_properties");
}

Json Lifecycle::list_templates() const {
  Json out = Json::array();
  for (const auto& t : ws_.templates().all()) out.push_back(to_json(t));
  return out;
}

Json Lifecycle::search_templates(std::string_view query, SearchFacet by) {
  Json out = Json::array();
  for (const auto& m : ooprompt::search_templates(ws_.templates(), query, by, &assistant_)) {
    const Template* t = ws_.templates().find(m.template_id);
    out.push_back(Json{{"template_id", m.template_id}, {"score", m.score}, {"display_name", t->display_name}});
  }
  return out;
}

Json Lifecycle::apply_template(std::string_view id, const std::string& template_id,
                               const std::optional<std::vector<std::string>>& selection,
                               std::optional<int> expected) {
  const PromptObject& obj = current(id, expected);
  const Template* t = ws_.templates().find(template_id);
  if (!t) throw Error(ErrorCode::UnknownTemplate, "no template '" + template_id + "'", Json{{"template_id", template_id}});
  IdAllocator trial = ws_.ids();
  auto props = instantiate_selective(*t, selection, trial);
  PromptObject next = obj;
  for (auto& p : props) {
    if (!next.find_by_name(p.name)) next.properties.push_back(std::move(p));
  }
  if (std::find(next.template_refs.begin(), next.template_refs.end(), template_id) == next.template_refs.end()) {
    next.template_refs.push_back(template_id);
  }
  next.version = obj.version + 1;
  Json out = commit(std::move(next), "apply_template " + template_id);
  ws_.ids() = trial;
  return out;
}

Json Lifecycle::derive_template(std::string_view id, const std::string& template_id, const std::string& description,
                                const TemplateTags& tags) {
  Template t = ooprompt::derive_template(ws_.object(id), ws_.templates(), template_id, description, tags);
  ws_.add_template(t);
  return to_json(*ws_.templates().find(template_id));
}

Json Lifecycle::extract(const std::string& text, std::optional<std::string> target) {
  if (target) {
    const PromptObject& obj = ws_.object(*target);
    return save(extract_properties(assistant_, text, &obj));
  }
  MappingProposal p = extract_properties(assistant_, text, nullptr);
  IdAllocator trial = ws_.ids();
  PromptObject obj = make_object(trial.issue(IdKind::Object), title_from_text(text));
  ws_.commit(obj, "create_object " + obj.id + " from text");
  ws_.ids() = trial;
  p.object_id = obj.id;
  p.object_version = obj.version;
  return save(std::move(p));
}

Json Lifecycle::suggest_properties(std::string_view id) {
  return save(suggest_implicit_properties(assistant_, ws_.object(id), ws_.lookup()));
}

Json Lifecycle::suggest_relations(std::string_view id) {
  return save(detect_relations(assistant_, ws_.object(id), ws_.lookup()));
}

Json Lifecycle::suggest_candidates(std::string_view id, std::string_view prop) {
  const PromptObject& obj = ws_.object(id);
  return save(generate_candidates(assistant_, obj, resolve_property(obj, prop)));
}

Json Lifecycle::suggest_examples(std::string_view id, std::string_view prop) {
  const PromptObject& obj = ws_.object(id);
  return save(generate_examples(assistant_, obj, resolve_property(obj, prop), ws_.lookup()));
}

Json Lifecycle::refine(std::string_view id) { return save(refine_language(assistant_, ws_.object(id), ws_.lookup())); }

Json Lifecycle::feedback(std::string_view id, const std::string& text) {
  return save(apply_holistic_feedback(assistant_, ws_.object(id), text, ws_.lookup()));
}

Json Lifecycle::list_proposals(std::optional<std::string> object_id) const {
  Json out = Json::array();
  for (const MappingProposal* p : ws_.proposals()) {
    if (object_id && p->object_id != *object_id) continue;
    out.push_back(Json{{"id", p->id},
                       {"object_id", p->object_id},
                       {"object_version", p->object_version},
                       {"operation", p->operation},
                       {"items", p->items.size()},
                       {"pending", p->pending()}});
  }
  return out;
}

Json Lifecycle::show_proposal(std::string_view id) const { return to_json(ws_.proposal(id)); }

Json Lifecycle::apply_proposal(std::string_view id, const std::vector<std::size_t>& items,
                               std::optional<int> expected) {
  const MappingProposal& proposal = ws_.proposal(id);
  const PromptObject& obj = current(proposal.object_id, expected);
  IdAllocator trial = ws_.ids();
  auto result = ooprompt::apply_proposal(obj, proposal, items, trial);
  if (result.object.version == obj.version) {
    throw Error(ErrorCode::InvalidArgument, "proposal " + proposal.id + " has no pending items to apply");
  }
  ws_.commit(result.object, "apply_proposal " + proposal.id + " (" + items_label(items) + ")");
  ws_.ids() = trial;
  Json saved = save(std::move(result.proposal));
  return Json{{"object", to_json(ws_.object(obj.id))}, {"proposal", saved}};
}

Json Lifecycle::dismiss_proposal(std::string_view id, const std::vector<std::size_t>& items) {
  return save(dismiss_items(ws_.proposal(id), items));
}

Json Lifecycle::analyze(std::string_view id, RenderFormat format) {
  const PromptObject& obj = ws_.object(id);
  auto artifact = ooprompt::render(obj, format, ws_.lookup());
  auto report = build_static_report(assistant_, obj, ws_.templates(), artifact, ws_.blocklist(), ws_.lookup());
  return to_json(report);
}

Json Lifecycle::render(std::string_view id, RenderFormat format, std::optional<std::size_t> variants,
                       RenderOptions options) const {
  const PromptObject& obj = ws_.object(id);
  if (!variants) return to_json(ooprompt::render(obj, format, ws_.lookup(), options));
  if (*variants == 0) throw Error(ErrorCode::InvalidArgument, "variant cap must be at least 1");
  Json out = Json::array();
  for (const auto& a : enumerate_variants(obj, *variants, format, ws_.lookup(), options)) out.push_back(to_json(a));
  return out;
}

Json Lifecycle::chain(std::string_view id, RenderFormat format, RenderOptions options) const {
  Json out = Json::array();
  for (const auto& step : decompose_sequential_chain(ws_.object(id))) {
    out.push_back(Json{{"object", to_json(step)}, {"artifact", to_json(ooprompt::render(step, format, ws_.lookup(), options))}});
  }
  return out;
}

Json Lifecycle::history(std::string_view id) const {
  Json versions = Json::array();
  for (const auto& r : ws_.history(id).records()) {
    versions.push_back(Json{{"version", r.version}, {"timestamp", r.timestamp}, {"changelog", r.changelog}});
  }
  return Json{{"object_id", std::string(id)}, {"live", ws_.find_object(id) != nullptr}, {"versions", versions}};
}

Json Lifecycle::property_history(std::string_view id, std::string_view name) const {
  Json entries = Json::array();
  for (const auto& e : ooprompt::property_history(ws_.history(id), name)) entries.push_back(to_json(e));
  return Json{{"object_id", std::string(id)}, {"name", std::string(name)}, {"entries", entries}};
}

Json Lifecycle::restore(std::string_view id, int version, std::optional<int> expected) {
  if (ws_.find_object(id)) current(id, expected);
  PromptObject obj = restore_content(ws_.history(id), version);
  for (const auto& p : obj.properties) {
    if (p.is_child() && !ws_.find_object(p.child_id()) && ws_.ever_existed(p.child_id())) ws_.revive(p.child_id());
  }
  return commit(std::move(obj), "restore v" + std::to_string(version));
}

Json Lifecycle::diff(std::string_view id, int version_a, int version_b) const {
  Json d = to_json(diff_versions(ws_.history(id), version_a, version_b));
  Json out{{"object_id", std::string(id)}, {"from", version_a}, {"to", version_b}};
  for (auto it = d.begin(); it != d.end(); ++it) out[it.key()] = it.value();
  return out;
}

Lifecycle::EvalPlan Lifecycle::plan_eval(const std::vector<std::string>& object_ids, std::size_t variants,
                                         RenderFormat format, std::vector<Criterion> criteria,
                                         std::vector<std::string> models) {
  if (object_ids.empty()) throw Error(ErrorCode::InvalidArgument, "name at least one object to evaluate");
  if (variants == 0) throw Error(ErrorCode::InvalidArgument, "variant cap must be at least 1");
  EvalPlan plan;
  for (const auto& id : object_ids) {
    auto a = enumerate_variants(ws_.object(id), variants, format, ws_.lookup());
    plan.artifacts.insert(plan.artifacts.end(), a.begin(), a.end());
  }
  if (plan.artifacts.size() < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "a comparison needs at least two artifacts; add candidates or name more objects");
  }
  plan.criteria = criteria.empty() ? default_criteria() : std::move(criteria);
  plan.models = models.empty() ? std::vector<std::string>{default_eval_model()} : std::move(models);
  ws_.lock_for_writing();
  plan.run_id = ws_.ids().issue(IdKind::Run);
  return plan;
}

Json Lifecycle::finish_eval(ComparisonReport report) { return to_json(ws_.save_run(std::move(report))); }

Json Lifecycle::eval_run(const std::vector<std::string>& object_ids, std::size_t variants, RenderFormat format,
                         std::vector<Criterion> criteria, std::vector<std::string> models) {
  EvalPlan plan = plan_eval(object_ids, variants, format, std::move(criteria), std::move(models));
  auto report = run_comparison(assistant_, plan.artifacts, plan.criteria, plan.models, plan.run_id, now_timestamp());
  return finish_eval(std::move(report));
}

Json Lifecycle::eval_show(std::string_view run_id) const { return to_json(ws_.run(run_id)); }

Json Lifecycle::eval_suggest(std::string_view run_id, std::optional<std::string> object_id) {
  const ComparisonReport& report = ws_.run(run_id);
  std::string id = object_id ? *object_id : report.results.front().artifact.object_id;
  return save(suggest_from_report(assistant_, report, ws_.object(id), ws_.lookup()));
}

}  // namespace ooprompt
