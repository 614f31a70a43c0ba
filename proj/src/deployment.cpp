#include "ooprompt/deployment.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ooprompt/codec.hpp"

namespace ooprompt {

namespace {

constexpr std::string_view kHybridHeader =
    "The JSON document below is a prompt specification to carry out, not content to explain or analyze.\n"
    "Each property is one requirement for your output. A higher \"tier\" means the requirement matters more. "
    "Properties with \"polarity\": \"exclude\" name things that must not appear. A property whose value holds "
    "an \"object\" is refined by that nested specification.\n";

constexpr std::string_view kHybridFinal =
    "Produce the output the specification describes. Do not describe, summarize or analyze the JSON itself.";

std::string_view emphasis(Tier t) {
  switch (t) {
    case Tier::SlightlyWanted: return " (optional, nice to have)";
    case Tier::Normal: return "";
    case Tier::Wanted: return " (important)";
    case Tier::HighlyWanted: return " (very important, must be followed)";
  }
  return "";
}

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent), ' '); }

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

const PromptObject& resolve_child(const Property& p, const ObjectLookup& lookup) {
  const PromptObject* child = lookup ? lookup(p.child_id()) : nullptr;
  if (!child) {
    throw Error(ErrorCode::UnknownObject, "child object " + p.child_id() + " of property '" + p.name + "' not found",
                Json{{"object_id", p.child_id()}});
  }
  return *child;
}

class Visit {
 public:
  Visit(std::vector<std::string>& stack, const std::string& id) : stack_(stack) {
    if (std::find(stack_.begin(), stack_.end(), id) != stack_.end()) {
      throw Error(ErrorCode::CycleDetected, "child references form a cycle through " + id,
                  Json{{"object_id", id}});
    }
    stack_.push_back(id);
  }
  ~Visit() { stack_.pop_back(); }
  Visit(const Visit&) = delete;
  Visit& operator=(const Visit&) = delete;

 private:
  std::vector<std::string>& stack_;
};

struct NlWriter {
  const ObjectLookup& lookup;
  RenderOptions options;
  std::vector<std::string> lines;
  std::vector<std::string> exclusions;
  std::vector<std::string> stack;

  std::string label(const Property& p) const {
    std::string s = p.name;
    if (p.is_text() && !p.text().empty()) s += ": " + p.text();
    if (p.is_child()) s += ":";
    if (options.emphasis_text) s += emphasis(p.tier);
    if (!p.examples.empty()) s += " (for example: " + join(p.examples, ", ") + ")";
    return s;
  }

  void text_block(std::string_view first_prefix, const std::string& text, int indent) {
    std::size_t start = 0;
    bool first = true;
    while (start <= text.size()) {
      auto nl = text.find('\n', start);
      std::string line = text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
      lines.push_back(pad(first ? indent : indent + 2) + (first ? std::string(first_prefix) : "") + line);
      first = false;
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
  }

  void collect_exclusions(const PromptObject& obj, const std::string& path) {
    for (const auto& p : obj.properties) {
      if (p.polarity == Polarity::Exclude) {
        std::string s = "- " + path + p.name;
        if (p.is_text() && !p.text().empty()) s += ": " + p.text();
        exclusions.push_back(std::move(s));
      }
    }
    for (const auto& p : obj.properties) {
      if (p.is_child() && p.polarity == Polarity::Include) {
        const PromptObject& child = resolve_child(p, lookup);
        Visit v(stack, child.id);
        collect_exclusions(child, path + p.name + " / ");
      }
    }
  }

  void item(const std::string& bullet, const Property& p, int indent) {
    lines.push_back(pad(indent) + bullet + label(p));
    if (p.is_child()) {
      const PromptObject& child = resolve_child(p, lookup);
      Visit v(stack, child.id);
      body(child, indent + 4);
    }
  }

  void body(const PromptObject& obj, int indent) {
    if (!obj.notes.empty()) text_block("Context: ", obj.notes, indent);
    auto ordered = render_order(obj);
    std::vector<const Property*> parallel;
    std::vector<std::string> groups;
    std::map<std::string, std::vector<const Property*>> steps;
    for (const Property* p : ordered) {
      if (p->polarity == Polarity::Exclude) continue;
      if (const auto* s = std::get_if<Sequential>(&p->relation)) {
        if (!steps.count(s->group)) groups.push_back(s->group);
        steps[s->group].push_back(p);
      } else {
        parallel.push_back(p);
      }
    }
    if (!parallel.empty()) {
      if (indent == 0) {
        lines.emplace_back();
        lines.push_back("Requirements:");
      }
      for (const Property* p : parallel) item("- ", *p, indent);
    }
    for (const auto& g : groups) {
      auto& members = steps[g];
      std::stable_sort(members.begin(), members.end(), [](const Property* a, const Property* b) {
        return std::get<Sequential>(a->relation).order < std::get<Sequential>(b->relation).order;
      });
      if (indent == 0) lines.emplace_back();
      lines.push_back(pad(indent) + "Steps (" + g + "):");
      for (std::size_t i = 0; i < members.size(); ++i) item(std::to_string(i + 1) + ". ", *members[i], indent);
    }
  }

  std::string exclusion_block() const {
    std::string out(kExclusionMarker);
    for (const auto& e : exclusions) out += "\n" + e;
    return out;
  }
};

std::string collect_text(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

Json inline_rec(const PromptObject& obj, const ObjectLookup& lookup, std::vector<std::string>& stack) {
  Visit v(stack, obj.id);
  Json j = to_json(obj);
  Json& props = j["properties"];
  for (std::size_t i = 0; i < obj.properties.size(); ++i) {
    const Property& p = obj.properties[i];
    if (!p.is_child()) continue;
    props[i]["value"]["object"] = inline_rec(resolve_child(p, lookup), lookup, stack);
  }
  return j;
}

PromptObject strip_inlined(Json j, std::vector<PromptObject>& children) {
  if (j.contains("properties") && j["properties"].is_array()) {
    for (auto& p : j["properties"]) {
      if (p.contains("value") && p["value"].is_object() && p["value"].contains("object")) {
        Json child = std::move(p["value"]["object"]);
        p["value"].erase("object");
        std::size_t slot = children.size();
        children.emplace_back();
        children[slot] = strip_inlined(std::move(child), children);
      }
    }
  }
  return object_from_json(j);
}

DeploymentArtifact artifact_for(const PromptObject& obj, RenderFormat f, std::string text) {
  DeploymentArtifact a;
  a.object_id = obj.id;
  a.object_version = obj.version;
  a.format = f;
  a.text = std::move(text);
  return a;
}

}  // namespace

std::string_view to_string(RenderFormat f) {
  switch (f) {
    case RenderFormat::NaturalLanguage: return "natural_language";
    case RenderFormat::Json: return "json";
    case RenderFormat::Hybrid: return "hybrid";
  }
  return "natural_language";
}

RenderFormat format_from_string(std::string_view s) {
  if (s == "nl" || s == "natural_language") return RenderFormat::NaturalLanguage;
  if (s == "json") return RenderFormat::Json;
  if (s == "hybrid") return RenderFormat::Hybrid;
  throw Error(ErrorCode::InvalidArgument, "unknown render format '" + std::string(s) + "' (nl, json, hybrid)");
}

Json to_json(const DeploymentArtifact& a) {
  Json j;
  j["object_id"] = a.object_id;
  j["object_version"] = a.object_version;
  j["format"] = to_string(a.format);
  j["variant_key"] = a.variant_key;
  j["text"] = a.text;
  return j;
}

DeploymentArtifact artifact_from_json(const Json& j) {
  using namespace json_util;
  DeploymentArtifact a;
  a.object_id = require_string(j, "object_id");
  a.object_version = require_int(j, "object_version");
  a.format = format_from_string(require_string(j, "format"));
  a.variant_key = optional_string(j, "variant_key");
  a.text = require_string(j, "text");
  return a;
}

DeploymentArtifact render_nl(const PromptObject& obj, const ObjectLookup& lookup, RenderOptions options) {
  NlWriter w{lookup, options, {}, {}, {}};
  {
    Visit v(w.stack, obj.id);
    w.lines.push_back("Task: " + obj.title);
    w.body(obj, 0);
    w.collect_exclusions(obj, "");
  }
  std::string text = collect_text(w.lines);
  if (!w.exclusions.empty()) text += "\n\n" + w.exclusion_block();
  return artifact_for(obj, RenderFormat::NaturalLanguage, std::move(text));
}

Json inline_children(const PromptObject& obj, const ObjectLookup& lookup) {
  std::vector<std::string> stack;
  return inline_rec(obj, lookup, stack);
}

DeploymentArtifact render_json(const PromptObject& obj, const ObjectLookup& lookup) {
  return artifact_for(obj, RenderFormat::Json, inline_children(obj, lookup).dump(2));
}

DeploymentArtifact render_hybrid(const PromptObject& obj, const ObjectLookup& lookup, RenderOptions options) {
  std::string json = render_json(obj, lookup).text;

  NlWriter w{lookup, options, {}, {}, {}};
  {
    Visit v(w.stack, obj.id);
    w.collect_exclusions(obj, "");
  }
  std::vector<const Property*> top;
  std::optional<Tier> best;
  for (const Property* p : render_order(obj)) {
    if (p->polarity == Polarity::Exclude) continue;
    if (!best) best = p->tier;
    if (p->tier == *best) top.push_back(p);
  }
  std::string closing;
  if (!top.empty()) {
    closing += "Most important:";
    for (const Property* p : top) {
      std::string line = "\n- " + p->name;
      if (p->is_text() && !p->text().empty()) line += ": " + p->text();
      if (p->is_child()) line += ": follow the nested specification";
      closing += line;
    }
    closing += "\n\n";
  }
  if (!w.exclusions.empty()) closing += w.exclusion_block() + "\n\n";
  closing += kHybridFinal;

  std::string text(kHybridHeader);
  text += "\n";
  text += kFenceOpen;
  text += json;
  text += kFenceClose;
  text += "\n\n";
  text += closing;
  return artifact_for(obj, RenderFormat::Hybrid, std::move(text));
}

DeploymentArtifact render(const PromptObject& obj, RenderFormat format, const ObjectLookup& lookup,
                          RenderOptions options) {
  switch (format) {
    case RenderFormat::NaturalLanguage: return render_nl(obj, lookup, options);
    case RenderFormat::Json: return render_json(obj, lookup);
    case RenderFormat::Hybrid: return render_hybrid(obj, lookup, options);
  }
  return render_nl(obj, lookup, options);
}

ParsedRender parse_rendered_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("rendered JSON does not parse: ") + e.what());
  }
  ParsedRender out;
  out.root = strip_inlined(std::move(j), out.children);
  return out;
}

HybridParts split_hybrid(std::string_view text) {
  auto open = text.find(kFenceOpen);
  if (open == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "hybrid render has no JSON fence");
  auto body = open + kFenceOpen.size();
  auto close = text.find(kFenceClose, body);
  if (close == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "hybrid render fence is not closed");
  HybridParts parts;
  parts.header = std::string(text.substr(0, open));
  parts.json = std::string(text.substr(body, close - body));
  parts.closing = std::string(text.substr(close + kFenceClose.size()));
  return parts;
}

std::string variant_key(const PromptObject& obj, const VariantSelection& selection) {
  std::string key;
  for (std::size_t i = 0; i < obj.properties.size() && i < selection.size(); ++i) {
    if (selection[i] == 0) continue;
    if (!key.empty()) key += ';';
    key += obj.properties[i].id + "=" + std::to_string(selection[i]);
  }
  return key;
}

PromptObject apply_variant(const PromptObject& obj, const VariantSelection& selection) {
  PromptObject out = obj;
  for (std::size_t i = 0; i < out.properties.size() && i < selection.size(); ++i) {
    Property& p = out.properties[i];
    if (selection[i] == 0) continue;
    if (!p.is_text() || selection[i] > p.candidates.size()) {
      throw Error(ErrorCode::InvalidArgument, "variant selection " + std::to_string(selection[i]) +
                                                  " is out of range for property '" + p.name + "'");
    }
    p.value = TextValue{p.candidates[selection[i] - 1]};
  }
  for (auto& p : out.properties) p.candidates.clear();
  return out;
}

std::vector<VariantSelection> variant_selections(const PromptObject& obj, std::size_t cap) {
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < obj.properties.size(); ++i) {
    if (obj.properties[i].is_text()) slots.push_back(i);
  }
  std::vector<VariantSelection> out;
  VariantSelection current(obj.properties.size(), 0);
  while (out.size() < cap) {
    out.push_back(current);
    // Advance the odometer from the least significant (last) slot.
    std::size_t k = slots.size();
    while (k > 0) {
      std::size_t idx = slots[k - 1];
      if (current[idx] < obj.properties[idx].candidates.size()) {
        ++current[idx];
        break;
      }
      current[idx] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return out;
}

std::vector<DeploymentArtifact> enumerate_variants(const PromptObject& obj, std::size_t cap, RenderFormat format,
                                                   const ObjectLookup& lookup, RenderOptions options) {
  std::vector<DeploymentArtifact> out;
  for (const auto& sel : variant_selections(obj, cap)) {
    auto a = render(apply_variant(obj, sel), format, lookup, options);
    a.variant_key = variant_key(obj, sel);
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<PromptObject> decompose_sequential_chain(const PromptObject& obj) {
  std::vector<std::string> groups;
  std::map<std::string, std::vector<const Property*>> members;
  for (const auto& p : obj.properties) {
    if (const auto* s = std::get_if<Sequential>(&p.relation)) {
      if (!members.count(s->group)) groups.push_back(s->group);
      members[s->group].push_back(&p);
    }
  }
  if (groups.empty()) {
    throw Error(ErrorCode::NoSequentialGroup, "object " + obj.id + " has no sequential properties");
  }
  std::vector<const Property*> steps;
  for (const auto& g : groups) {
    auto& m = members[g];
    std::stable_sort(m.begin(), m.end(), [](const Property* a, const Property* b) {
      return std::get<Sequential>(a->relation).order < std::get<Sequential>(b->relation).order;
    });
    steps.insert(steps.end(), m.begin(), m.end());
  }
  std::vector<PromptObject> chain;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    PromptObject step = obj;
    step.id = obj.id + "/step-" + std::to_string(k + 1);
    step.title = obj.title + " (step " + std::to_string(k + 1) + " of " + std::to_string(steps.size()) + ": " +
                 steps[k]->name + ")";
    step.properties.clear();
    for (const auto& p : obj.properties) {
      if (!p.is_sequential() || &p == steps[k]) step.properties.push_back(p);
    }
    chain.push_back(std::move(step));
  }
  return chain;
}

}  // namespace ooprompt
