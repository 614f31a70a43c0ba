#include "ooprompt/templates.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "ooprompt/codec.hpp"
#include "ooprompt/error.hpp"
#include "ooprompt/gateway.hpp"

namespace ooprompt {

using namespace json_util;

namespace {

void check_unique_defaults(const Template& t) {
  std::set<std::string> names;
  for (const auto& d : t.defaults) {
    if (!names.insert(normalize_name(d.name)).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "template " + t.id + " lists default '" + d.name + "' twice");
    }
  }
}

Template make_seed(std::string id, std::string display, std::string description, std::string output_type,
                   std::vector<std::string> use_cases, std::vector<TemplateDefault> defaults) {
  Template t;
  t.id = std::move(id);
  t.display_name = std::move(display);
  t.description = std::move(description);
  t.tags = {std::move(output_type), std::move(use_cases)};
  t.defaults = std::move(defaults);
  t.seed = true;
  return t;
}

std::string facet_text(const Template& t, SearchFacet by) {
  if (by == SearchFacet::OutputType) return t.tags.output_type + " " + t.id + " " + t.display_name;
  std::string s = t.description + " " + t.display_name;
  for (const auto& u : t.tags.use_cases) s += " " + u;
  return s;
}

std::vector<TemplateMatch> keyword_search(const TemplateLibrary& library, std::string_view query,
                                          SearchFacet by) {
  auto q = keywords(query);
  std::set<std::string> qset(q.begin(), q.end());
  std::string exact(query);
  while (!exact.empty() && std::isspace(static_cast<unsigned char>(exact.back()))) exact.pop_back();
  exact.erase(0, exact.find_first_not_of(" \t"));

  struct Scored {
    TemplateMatch m;
    bool exact;
  };
  std::vector<Scored> scored;
  for (const auto& t : library.all()) {
    if (t.id == exact) {
      scored.push_back({{t.id, 1.0}, true});
      continue;
    }
    if (qset.empty()) continue;
    auto f = keywords(facet_text(t, by));
    std::set<std::string> fset(f.begin(), f.end());
    std::size_t hits = 0;
    for (const auto& w : qset) hits += fset.count(w);
    if (hits == 0) continue;
    scored.push_back({{t.id, static_cast<double>(hits) / static_cast<double>(qset.size())}, false});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.exact != b.exact) return a.exact;
    if (a.m.score != b.m.score) return a.m.score > b.m.score;
    return a.m.template_id < b.m.template_id;
  });
  std::vector<TemplateMatch> out;
  for (auto& s : scored) out.push_back(std::move(s.m));
  return out;
}

}  // namespace

std::vector<std::string> keywords(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TemplateLibrary TemplateLibrary::seed() {
  TemplateLibrary lib;
  lib.add(make_seed("text-generator", "Text generator", "General-purpose written text such as articles, emails and copy.",
                    "text", {"writing", "email", "article", "copywriting", "summary"},
                    {{"Output type", "Text", "What kind of text to produce", Tier::Normal},
                     {"Topic", "", "What the text is about", Tier::Normal},
                     {"Audience", "", "Who will read it", Tier::Normal},
                     {"Tone", "Neutral", "Voice and mood of the writing", Tier::Normal},
                     {"Length", "", "Approximate size of the text", Tier::Normal}}));
  lib.add(make_seed("image-generator", "Image generator", "Prompts for text-to-image models: posters, illustrations, photos.",
                    "image", {"poster", "illustration", "photo", "artwork", "advertising"},
                    {{"Output type", "Image", "What kind of image to produce", Tier::Normal},
                     {"Subject", "", "Main content of the image", Tier::Normal},
                     {"Style", "", "Visual style or medium", Tier::Normal},
                     {"Color palette", "", "Dominant colors", Tier::Normal},
                     {"Composition", "", "Framing and layout", Tier::Normal}}));
  lib.add(make_seed("code-generator", "Code generator", "Source code for a described piece of functionality.",
                    "code", {"programming", "coding", "script", "function", "debugging"},
                    {{"Output type", "Code", "What artifact to produce", Tier::Normal},
                     {"Programming language", "", "Target language and version", Tier::Wanted},
                     {"Functionality", "", "What the code must do", Tier::Normal},
                     {"Constraints", "", "Libraries, performance or style limits", Tier::Normal},
                     {"Code style", "", "Conventions to follow", Tier::SlightlyWanted}}));
  lib.add(make_seed("story-writer", "Story writer", "Fiction such as short stories, fables and bedtime stories.",
                    "story", {"creative writing", "fiction", "bedtime story", "storytelling"},
                    {{"Output type", "Short story", "Form of the story", Tier::Normal},
                     {"Topic", "", "What the story is about", Tier::Normal},
                     {"Audience", "", "Who the story is for", Tier::Normal},
                     {"Tone", "", "Mood of the story", Tier::Normal},
                     {"Narration style", "", "Point of view and voice", Tier::Normal},
                     {"Length", "", "Approximate length", Tier::Normal}}));
  lib.add(make_seed("trip-planner", "Trip planner", "Travel itineraries and trip plans for individuals or groups.",
                    "plan", {"travel", "trip planning", "itinerary", "vacation", "event"},
                    {{"Output type", "Trip plan", "Form of the plan", Tier::Normal},
                     {"Destination", "", "Where the trip goes", Tier::Normal},
                     {"Duration", "", "How many days", Tier::Normal},
                     {"Interests", "", "What the travellers want to do", Tier::Normal},
                     {"Schedule", "", "How days are organised", Tier::Normal},
                     {"Budget", "", "Spending limits", Tier::Normal}}));
  lib.add(make_seed("report-writer", "Report writer", "Reports presenting technical results to a given audience.",
                    "report", {"reporting", "technical report", "presentation", "summary", "results"},
                    {{"Output type", "Report", "Form of the report", Tier::Normal},
                     {"Topic", "", "Subject of the report", Tier::Normal},
                     {"Audience", "", "Who reads the report", Tier::Wanted},
                     {"Key findings", "", "Results that must be covered", Tier::Normal},
                     {"Length", "", "Approximate length", Tier::Normal},
                     {"Format", "", "Sections, bullets or prose", Tier::Normal}}));
  return lib;
}

const Template* TemplateLibrary::find(std::string_view id) const {
  auto it = std::lower_bound(templates_.begin(), templates_.end(), id,
                             [](const Template& t, std::string_view key) { return t.id < key; });
  if (it != templates_.end() && it->id == id) return &*it;
  return nullptr;
}

void TemplateLibrary::add(Template t) {
  if (t.id.empty()) throw Error(ErrorCode::InvalidArgument, "template id must not be empty");
  if (find(t.id)) {
    throw Error(ErrorCode::DuplicateTemplateId, "template '" + t.id + "' already exists",
                Json{{"template_id", t.id}});
  }
  check_unique_defaults(t);
  auto it = std::lower_bound(templates_.begin(), templates_.end(), t.id,
                             [](const Template& x, const std::string& key) { return x.id < key; });
  templates_.insert(it, std::move(t));
}

SearchFacet facet_from_string(std::string_view s) {
  if (s == "output_type") return SearchFacet::OutputType;
  if (s == "use_case") return SearchFacet::UseCase;
  if (s == "example") return SearchFacet::Example;
  throw Error(ErrorCode::InvalidArgument,
              "unknown search facet '" + std::string(s) + "' (expected output_type, use_case or example)");
}

std::vector<TemplateMatch> search_templates(const TemplateLibrary& library, std::string_view query,
                                            SearchFacet by, Assistant* assistant) {
  if (library.empty()) throw Error(ErrorCode::EmptyLibrary, "the template library is empty");
  if (by != SearchFacet::Example) return keyword_search(library, query, by);

  if (!assistant) throw Error(ErrorCode::ProviderUnavailable, "searching by example needs an assistant");
  if (query.empty()) throw Error(ErrorCode::EmptyInput, "example text is empty");
  AssistantRequest req;
  req.role = AssistantRole::Extractor;
  req.input = Json{{"text", std::string(query)}};
  auto resp = assistant->complete(req);
  for (const auto& p : resp.output.at("properties")) {
    if (normalize_name(p.at("name").get<std::string>()) == "output type") {
      auto hits = keyword_search(library, p.at("value").get<std::string>(), SearchFacet::OutputType);
      if (!hits.empty()) return hits;
    }
  }
  return keyword_search(library, query, SearchFacet::UseCase);
}

std::vector<Property> instantiate_selective(const Template& t,
                                            const std::optional<std::vector<std::string>>& selected,
                                            IdAllocator& ids) {
  std::set<std::string> wanted;
  if (selected) {
    for (const auto& name : *selected) {
      auto key = normalize_name(name);
      bool known = std::any_of(t.defaults.begin(), t.defaults.end(),
                               [&](const TemplateDefault& d) { return normalize_name(d.name) == key; });
      if (!known) {
        throw Error(ErrorCode::UnknownDefault,
                    "template " + t.id + " has no default named '" + name + "'",
                    Json{{"template_id", t.id}, {"name", name}});
      }
      wanted.insert(key);
    }
  }
  std::vector<Property> out;
  for (const auto& d : t.defaults) {
    if (selected && !wanted.count(normalize_name(d.name))) continue;
    PropertySpec spec;
    spec.name = d.name;
    spec.value = TextValue{d.value};
    spec.tier = d.tier;
    spec.provenance = Provenance::Template;
    out.push_back(make_property(spec, ids.issue(IdKind::Property)));
  }
  return out;
}

std::vector<Property> merge_templates(const std::vector<const Template*>& parents,
                                      const std::vector<std::optional<std::vector<std::string>>>& selections,
                                      IdAllocator& ids) {
  if (parents.empty()) throw Error(ErrorCode::InvalidArgument, "merge needs at least one parent template");
  if (!selections.empty() && selections.size() != parents.size()) {
    throw Error(ErrorCode::InvalidArgument, "one selection per parent template is required");
  }
  std::vector<Property> out;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const Template& t = *parents[i];
    // Validate the selection before consuming any ids for this parent.
    IdAllocator scratch;
    auto selected_props = instantiate_selective(t, selections.empty() ? std::nullopt : selections[i], scratch);
    for (auto& p : selected_props) {
      auto key = normalize_name(p.name);
      auto winner = std::find_if(out.begin(), out.end(),
                                 [&](const Property& q) { return normalize_name(q.name) == key; });
      if (winner != out.end()) {
        Reference lineage{"lineage", "template:" + t.id};
        if (std::find(winner->references.begin(), winner->references.end(), lineage) ==
            winner->references.end()) {
          winner->references.push_back(std::move(lineage));
        }
        continue;
      }
      p.id = ids.issue(IdKind::Property);
      out.push_back(std::move(p));
    }
  }
  return out;
}

Template derive_template(const PromptObject& obj, const TemplateLibrary& library, std::string id,
                         std::string description, TemplateTags tags) {
  if (id.empty()) throw Error(ErrorCode::InvalidArgument, "template id must not be empty");
  if (auto vs = validate_object(obj); !vs.empty()) {
    throw Error(ErrorCode::InvariantViolation,
                "object " + obj.id + " does not validate: " + vs.front().detail);
  }
  for (const auto& p : obj.properties) {
    if (p.is_child()) {
      throw Error(ErrorCode::NestedNotTemplatable,
                  "property '" + p.name + "' holds a sub-object; promote it before deriving a template",
                  Json{{"prop_id", p.id}});
    }
  }
  if (library.find(id)) {
    throw Error(ErrorCode::DuplicateTemplateId, "template '" + id + "' already exists",
                Json{{"template_id", id}});
  }
  Template t;
  t.id = std::move(id);
  t.display_name = obj.title;
  t.description = std::move(description);
  t.tags = std::move(tags);
  for (const auto& p : obj.properties) {
    if (p.polarity != Polarity::Include) continue;
    t.defaults.push_back({p.name, p.text(), "", p.tier});
  }
  return t;
}

Json to_json(const Template& t) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["id"] = t.id;
  j["display_name"] = t.display_name;
  j["description"] = t.description;
  Json uses = Json::array();
  for (const auto& u : t.tags.use_cases) uses.push_back(u);
  j["tags"] = Json{{"output_type", t.tags.output_type}, {"use_cases", uses}};
  Json defaults = Json::array();
  for (const auto& d : t.defaults) {
    defaults.push_back(
        {{"name", d.name}, {"value", d.value}, {"description", d.description}, {"tier", to_string(d.tier)}});
  }
  j["defaults"] = std::move(defaults);
  j["seed"] = t.seed;
  return j;
}

Template template_from_json(const Json& j) {
  int schema = require_int(j, "schema_version");
  if (schema != kSchemaVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                "template schema_version " + std::to_string(schema) + " is not supported");
  }
  Template t;
  t.id = require_string(j, "id");
  t.display_name = optional_string(j, "display_name");
  t.description = optional_string(j, "description");
  const Json& tags = require(j, "tags");
  t.tags.output_type = optional_string(tags, "output_type");
  t.tags.use_cases = string_list(tags, "use_cases");
  const Json& defaults = require(j, "defaults");
  if (!defaults.is_array()) throw Error(ErrorCode::InvalidArgument, "field 'defaults' must be an array");
  for (const auto& d : defaults) {
    t.defaults.push_back({require_string(d, "name"), optional_string(d, "value"), optional_string(d, "description"),
                          tier_from_string(optional_string(d, "tier", "normal"))});
  }
  t.seed = j.value("seed", false);
  check_unique_defaults(t);
  return t;
}

}  // namespace ooprompt
