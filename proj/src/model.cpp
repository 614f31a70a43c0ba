#include "ooprompt/model.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_set>

#include "ooprompt/error.hpp"

namespace ooprompt {

namespace {

const std::string kEmpty;

constexpr std::string_view kAlternativesMarker = "\n\nAlternatives:\n";

// Nesting moves a text value (and its candidates) into the child's notes; promotion
// reads them back. Candidates cannot live on a child-valued property.
std::string encode_nested_notes(const std::string& text, const std::vector<std::string>& candidates) {
  if (candidates.empty()) return text;
  std::string out = text;
  out += kAlternativesMarker;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i) out += '\n';
    out += "- " + candidates[i];
  }
  return out;
}

std::pair<std::string, std::vector<std::string>> decode_nested_notes(const std::string& notes) {
  auto pos = notes.rfind(kAlternativesMarker);
  if (pos == std::string::npos) return {notes, {}};
  std::vector<std::string> candidates;
  std::size_t at = pos + kAlternativesMarker.size();
  while (at <= notes.size()) {
    auto nl = notes.find('\n', at);
    std::string line = notes.substr(at, nl == std::string::npos ? std::string::npos : nl - at);
    if (line.rfind("- ", 0) != 0) return {notes, {}};
    candidates.push_back(line.substr(2));
    if (nl == std::string::npos) break;
    at = nl + 1;
  }
  return {notes.substr(0, pos), candidates};
}

std::vector<Property>::const_iterator find_prop(const PromptObject& obj, std::string_view prop_id) {
  return std::find_if(obj.properties.begin(), obj.properties.end(),
                      [&](const Property& p) { return p.id == prop_id; });
}

Error unknown_property(const PromptObject& obj, std::string_view prop_id) {
  return Error(ErrorCode::UnknownProperty,
               "object " + obj.id + " has no property '" + std::string(prop_id) + "'",
               Json{{"object_id", obj.id}, {"prop_id", prop_id}});
}

Json violations_json(const std::vector<Violation>& vs) {
  Json arr = Json::array();
  for (const auto& v : vs) {
    arr.push_back({{"kind", to_string(v.kind)}, {"entity", v.entity}, {"detail", v.detail}});
  }
  return arr;
}

// Fails with InvariantViolation when `after` has a violation that `before` did not.
void require_no_new_violations(const PromptObject& before, const PromptObject& after) {
  auto old_vs = validate_object(before);
  auto new_vs = validate_object(after);
  std::vector<Violation> introduced;
  for (const auto& v : new_vs) {
    if (std::find(old_vs.begin(), old_vs.end(), v) == old_vs.end()) introduced.push_back(v);
  }
  if (!introduced.empty()) {
    throw Error(ErrorCode::InvariantViolation,
                std::string(to_string(introduced.front().kind)) + ": " + introduced.front().detail,
                Json{{"violations", violations_json(introduced)}});
  }
}

}  // namespace

const std::string& Property::text() const {
  if (const auto* t = std::get_if<TextValue>(&value)) return t->text;
  return kEmpty;
}

const std::string& Property::child_id() const {
  if (const auto* c = std::get_if<ChildRef>(&value)) return c->object_id;
  return kEmpty;
}

const Property* PromptObject::find(std::string_view prop_id) const {
  for (const auto& p : properties) {
    if (p.id == prop_id) return &p;
  }
  return nullptr;
}

const Property* PromptObject::find_by_name(std::string_view name) const {
  auto key = normalize_name(name);
  for (const auto& p : properties) {
    if (normalize_name(p.name) == key) return &p;
  }
  return nullptr;
}

bool same_content(const PromptObject& a, const PromptObject& b) {
  PromptObject bb = b;
  bb.version = a.version;
  return a == bb;
}

std::string normalize_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string_view to_string(Polarity p) {
  return p == Polarity::Include ? "include" : "exclude";
}

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::SlightlyWanted: return "slightly_wanted";
    case Tier::Normal: return "normal";
    case Tier::Wanted: return "wanted";
    case Tier::HighlyWanted: return "highly_wanted";
  }
  return "normal";
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Explicit: return "explicit";
    case Provenance::Implicit: return "implicit";
    case Provenance::Template: return "template";
    case Provenance::User: return "user";
    case Provenance::Suggested: return "suggested";
  }
  return "user";
}

Polarity polarity_from_string(std::string_view s) {
  if (s == "include") return Polarity::Include;
  if (s == "exclude") return Polarity::Exclude;
  throw Error(ErrorCode::InvalidArgument, "unknown polarity '" + std::string(s) + "'");
}

Tier tier_from_string(std::string_view s) {
  if (s == "slightly_wanted") return Tier::SlightlyWanted;
  if (s == "normal") return Tier::Normal;
  if (s == "wanted") return Tier::Wanted;
  if (s == "highly_wanted") return Tier::HighlyWanted;
  throw Error(ErrorCode::InvalidArgument,
              "unknown tier '" + std::string(s) +
                  "' (expected slightly_wanted, normal, wanted or highly_wanted)");
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "explicit") return Provenance::Explicit;
  if (s == "implicit") return Provenance::Implicit;
  if (s == "template") return Provenance::Template;
  if (s == "user") return Provenance::User;
  if (s == "suggested") return Provenance::Suggested;
  throw Error(ErrorCode::InvalidArgument, "unknown provenance '" + std::string(s) + "'");
}

std::string format_id(IdKind kind, int n) {
  const char* prefix = "po";
  switch (kind) {
    case IdKind::Object: prefix = "po"; break;
    case IdKind::Property: prefix = "pr"; break;
    case IdKind::Proposal: prefix = "pp"; break;
    case IdKind::Run: prefix = "run"; break;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04d", prefix, n);
  return buf;
}

std::string IdAllocator::issue(IdKind kind) {
  int& last = last_[static_cast<std::size_t>(kind)];
  return format_id(kind, ++last);
}

void IdAllocator::observe(std::string_view id) {
  auto dash = id.find('-');
  if (dash == std::string_view::npos) return;
  auto prefix = id.substr(0, dash);
  IdKind kind;
  if (prefix == "po") kind = IdKind::Object;
  else if (prefix == "pr") kind = IdKind::Property;
  else if (prefix == "pp") kind = IdKind::Proposal;
  else if (prefix == "run") kind = IdKind::Run;
  else return;
  int n = 0;
  for (char c : id.substr(dash + 1)) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return;
    n = n * 10 + (c - '0');
  }
  int& last = last_[static_cast<std::size_t>(kind)];
  last = std::max(last, n);
}

bool PropertyPatch::empty() const {
  return !name && !value && !polarity && !tier && !relation && !candidates && !examples &&
         !references;
}

PromptObject make_object(std::string id, std::string title, std::vector<std::string> template_refs,
                         std::vector<Property> inherited) {
  PromptObject obj;
  obj.id = std::move(id);
  obj.title = std::move(title);
  obj.template_refs = std::move(template_refs);
  obj.properties = std::move(inherited);
  obj.version = 1;
  return obj;
}

Property make_property(const PropertySpec& spec, std::string id) {
  Property p;
  p.id = std::move(id);
  p.name = spec.name;
  p.value = spec.value;
  p.polarity = spec.polarity.value_or(Polarity::Include);
  p.tier = spec.tier.value_or(Tier::Normal);
  p.relation = spec.relation.value_or(Relation{Parallel{}});
  p.candidates = spec.candidates;
  p.examples = spec.examples;
  p.references = spec.references;
  p.provenance = spec.provenance;
  return p;
}

PromptObject add_property(const PromptObject& obj, const PropertySpec& spec, IdAllocator& ids) {
  if (normalize_name(spec.name).empty()) {
    throw Error(ErrorCode::EmptyName, "property name must not be empty");
  }
  if (obj.find_by_name(spec.name)) {
    throw Error(ErrorCode::DuplicateName,
                "object " + obj.id + " already has a property named '" + spec.name + "'",
                Json{{"name", spec.name}});
  }
  PromptObject out = obj;
  // Trial with a placeholder id so a failed add never consumes an id.
  out.properties.push_back(make_property(spec, "pr-pending"));
  require_no_new_violations(obj, out);
  out.properties.back().id = ids.issue(IdKind::Property);
  out.version = obj.version + 1;
  return out;
}

PromptObject update_property(const PromptObject& obj, std::string_view prop_id,
                             const PropertyPatch& patch) {
  auto it = find_prop(obj, prop_id);
  if (it == obj.properties.end()) throw unknown_property(obj, prop_id);
  PromptObject out = obj;
  Property& p = out.properties[static_cast<std::size_t>(it - obj.properties.begin())];
  if (patch.name) p.name = *patch.name;
  if (patch.value) p.value = *patch.value;
  if (patch.polarity) p.polarity = *patch.polarity;
  if (patch.tier) p.tier = *patch.tier;
  if (patch.relation) p.relation = *patch.relation;
  if (patch.candidates) p.candidates = *patch.candidates;
  if (patch.examples) p.examples = *patch.examples;
  if (patch.references) p.references = *patch.references;
  require_no_new_violations(obj, out);
  out.version = obj.version + 1;
  return out;
}

PromptObject update_object(const PromptObject& obj, const ObjectPatch& patch) {
  PromptObject out = obj;
  if (patch.title) out.title = *patch.title;
  if (patch.notes) out.notes = *patch.notes;
  out.version = obj.version + 1;
  return out;
}

PromptObject remove_property(const PromptObject& obj, std::string_view prop_id) {
  auto it = find_prop(obj, prop_id);
  if (it == obj.properties.end()) throw unknown_property(obj, prop_id);
  PromptObject out = obj;
  out.properties.erase(out.properties.begin() + (it - obj.properties.begin()));
  out.version = obj.version + 1;
  return out;
}

NestResult nest_child(const PromptObject& obj, std::string_view prop_id, IdAllocator& ids) {
  auto it = find_prop(obj, prop_id);
  if (it == obj.properties.end()) throw unknown_property(obj, prop_id);
  if (it->is_child()) {
    throw Error(ErrorCode::AlreadyNested,
                "property '" + it->name + "' already holds child " + it->child_id(),
                Json{{"prop_id", it->id}, {"child_id", it->child_id()}});
  }
  if (it->polarity == Polarity::Exclude) {
    throw Error(ErrorCode::InvariantViolation,
                "ExcludeNotText: an excluded property cannot hold a sub-object",
                Json{{"prop_id", it->id}});
  }
  PromptObject parent = obj;
  Property& p = parent.properties[static_cast<std::size_t>(it - obj.properties.begin())];
  PromptObject child = make_object(ids.issue(IdKind::Object), p.name);
  child.notes = encode_nested_notes(p.text(), p.candidates);
  p.value = ChildRef{child.id};
  p.candidates.clear();
  parent.version = obj.version + 1;
  return {std::move(parent), std::move(child)};
}

PromptObject promote_child(const PromptObject& parent, std::string_view prop_id,
                           const PromptObject& child) {
  auto it = find_prop(parent, prop_id);
  if (it == parent.properties.end()) throw unknown_property(parent, prop_id);
  if (!it->is_child()) {
    throw Error(ErrorCode::NotNested, "property '" + it->name + "' is not nested",
                Json{{"prop_id", it->id}});
  }
  if (it->child_id() != child.id) {
    throw Error(ErrorCode::InvalidArgument, "property '" + it->name + "' refers to " +
                                                it->child_id() + ", not " + child.id);
  }
  for (const auto& q : child.properties) {
    if (q.is_child()) {
      throw Error(ErrorCode::ChildTooDeep,
                  "child " + child.id + " has nested property '" + q.name +
                      "'; promote that one first",
                  Json{{"child_id", child.id}, {"prop_id", q.id}});
    }
  }
  PromptObject out = parent;
  auto pos = static_cast<std::size_t>(it - parent.properties.begin());
  auto [text, candidates] = decode_nested_notes(child.notes);
  out.properties[pos].value = TextValue{text};
  out.properties[pos].candidates = candidates;
  std::vector<Property> inlined;
  for (Property q : child.properties) {
    q.name = child.title + " / " + q.name;
    if (auto* seq = std::get_if<Sequential>(&q.relation)) seq->group = child.title + " / " + seq->group;
    inlined.push_back(std::move(q));
  }
  out.properties.insert(out.properties.begin() + static_cast<std::ptrdiff_t>(pos) + 1,
                        inlined.begin(), inlined.end());
  require_no_new_violations(parent, out);
  out.version = parent.version + 1;
  return out;
}

PromptObject reorder_properties(const PromptObject& obj, const std::vector<std::string>& order) {
  if (order.size() != obj.properties.size()) {
    throw Error(ErrorCode::InvalidPermutation,
                "permutation has " + std::to_string(order.size()) + " ids, object has " +
                    std::to_string(obj.properties.size()) + " properties");
  }
  PromptObject out = obj;
  out.properties.clear();
  std::unordered_set<std::string> seen;
  for (const auto& id : order) {
    auto it = find_prop(obj, id);
    if (it == obj.properties.end() || !seen.insert(id).second) {
      throw Error(ErrorCode::InvalidPermutation,
                  "'" + id + "' is unknown or repeated in the permutation");
    }
    out.properties.push_back(*it);
  }
  out.version = obj.version + 1;
  return out;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::EmptyName: return "EmptyName";
    case ViolationKind::DuplicateName: return "DuplicateName";
    case ViolationKind::DuplicatePropertyId: return "DuplicatePropertyId";
    case ViolationKind::DuplicateOrder: return "DuplicateOrder";
    case ViolationKind::InvalidOrder: return "InvalidOrder";
    case ViolationKind::EmptyGroup: return "EmptyGroup";
    case ViolationKind::ChildWithCandidates: return "ChildWithCandidates";
    case ViolationKind::ExcludeNotText: return "ExcludeNotText";
    case ViolationKind::DanglingChild: return "DanglingChild";
    case ViolationKind::Cycle: return "Cycle";
    case ViolationKind::InvalidVersion: return "InvalidVersion";
    case ViolationKind::SchemaVersion: return "SchemaVersion";
  }
  return "Unknown";
}

namespace {

bool reaches(const std::string& target, const PromptObject& from, const ObjectLookup& lookup,
             std::set<std::string>& visited) {
  for (const auto& p : from.properties) {
    if (!p.is_child()) continue;
    const auto& cid = p.child_id();
    if (cid == target) return true;
    if (!visited.insert(cid).second) continue;
    const PromptObject* next = lookup(cid);
    if (next && reaches(target, *next, lookup, visited)) return true;
  }
  return false;
}

}  // namespace

std::vector<Violation> validate_object(const PromptObject& obj, const ObjectLookup& lookup) {
  std::vector<Violation> out;
  if (obj.version < 1) {
    out.push_back({ViolationKind::InvalidVersion, obj.id,
                   "version " + std::to_string(obj.version) + " is below 1"});
  }
  if (obj.schema_version != kSchemaVersion) {
    out.push_back({ViolationKind::SchemaVersion, obj.id,
                   "schema_version " + std::to_string(obj.schema_version) + " is not supported"});
  }
  std::set<std::string> names;
  std::set<std::string> ids;
  std::map<std::string, std::set<int>> group_orders;
  for (const auto& p : obj.properties) {
    auto key = normalize_name(p.name);
    if (key.empty()) {
      out.push_back({ViolationKind::EmptyName, p.id, "property name is empty"});
    } else if (!names.insert(key).second) {
      out.push_back({ViolationKind::DuplicateName, p.id, "name '" + p.name + "' is already used"});
    }
    if (!ids.insert(p.id).second) {
      out.push_back({ViolationKind::DuplicatePropertyId, p.id, "property id repeated"});
    }
    if (p.is_child() && !p.candidates.empty()) {
      out.push_back({ViolationKind::ChildWithCandidates, p.id,
                     "child-valued property '" + p.name + "' carries candidates"});
    }
    if (p.is_child() && p.polarity == Polarity::Exclude) {
      out.push_back({ViolationKind::ExcludeNotText, p.id,
                     "excluded property '" + p.name + "' holds a sub-object"});
    }
    if (const auto* seq = std::get_if<Sequential>(&p.relation)) {
      if (seq->group.empty()) {
        out.push_back({ViolationKind::EmptyGroup, p.id, "sequential group name is empty"});
      }
      if (seq->order < 1) {
        out.push_back({ViolationKind::InvalidOrder, p.id,
                       "order " + std::to_string(seq->order) + " is not positive"});
      } else if (!group_orders[seq->group].insert(seq->order).second) {
        out.push_back({ViolationKind::DuplicateOrder, p.id,
                       "order " + std::to_string(seq->order) + " repeated in group '" +
                           seq->group + "'"});
      }
    }
  }
  if (lookup) {
    for (const auto& p : obj.properties) {
      if (p.is_child() && !lookup(p.child_id())) {
        out.push_back({ViolationKind::DanglingChild, p.id,
                       "child " + p.child_id() + " does not exist"});
      }
    }
    std::set<std::string> visited;
    if (reaches(obj.id, obj, lookup, visited)) {
      out.push_back({ViolationKind::Cycle, obj.id, "object reaches itself through child references"});
    }
  }
  return out;
}

std::vector<const Property*> render_order(const PromptObject& obj) {
  std::vector<const Property*> out;
  out.reserve(obj.properties.size());
  for (const auto& p : obj.properties) out.push_back(&p);
  std::stable_sort(out.begin(), out.end(), [](const Property* a, const Property* b) {
    return static_cast<int>(a->tier) > static_cast<int>(b->tier);
  });
  return out;
}

}  // namespace ooprompt
