#include "ooprompt/codec.hpp"

#include "ooprompt/error.hpp"

namespace ooprompt {

namespace json_util {

const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::InvalidArgument, std::string("missing field '") + key + "'");
  }
  return *it;
}

std::string require_string(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_string()) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

int require_int(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + key + "' must be an integer");
  }
  return v.get<int>();
}

std::vector<std::string> string_list(const Json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.is_object() || !j.contains(key)) return out;
  const Json& arr = j.at(key);
  if (!arr.is_array()) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + key + "' must be an array");
  }
  for (const auto& s : arr) {
    if (!s.is_string()) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("field '") + key + "' must contain only strings");
    }
    out.push_back(s.get<std::string>());
  }
  return out;
}

std::string optional_string(const Json& j, const char* key, std::string fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_string()) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + key + "' must be a string");
  }
  return j.at(key).get<std::string>();
}

}  // namespace json_util

using namespace json_util;

namespace {

std::vector<Reference> references_from_json(const Json& j, const char* key) {
  std::vector<Reference> out;
  if (!j.contains(key)) return out;
  const Json& arr = j.at(key);
  if (!arr.is_array()) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + key + "' must be an array");
  }
  for (const auto& r : arr) out.push_back({require_string(r, "label"), require_string(r, "uri")});
  return out;
}

Json string_array(const std::vector<std::string>& v) {
  Json arr = Json::array();
  for (const auto& s : v) arr.push_back(s);
  return arr;
}

Json reference_array(const std::vector<Reference>& v) {
  Json arr = Json::array();
  for (const auto& r : v) arr.push_back(to_json(r));
  return arr;
}

}  // namespace

Json to_json(const PropertyValue& value) {
  if (const auto* t = std::get_if<TextValue>(&value)) return Json{{"kind", "text"}, {"text", t->text}};
  return Json{{"kind", "child"}, {"ref", std::get<ChildRef>(value).object_id}};
}

Json to_json(const Relation& relation) {
  if (const auto* s = std::get_if<Sequential>(&relation)) {
    return Json{{"kind", "sequential"}, {"group", s->group}, {"order", s->order}};
  }
  return Json{{"kind", "parallel"}};
}

Json to_json(const Reference& ref) { return Json{{"label", ref.label}, {"uri", ref.uri}}; }

Json to_json(const Property& p) {
  Json j;
  j["id"] = p.id;
  j["name"] = p.name;
  j["polarity"] = to_string(p.polarity);
  j["tier"] = to_string(p.tier);
  j["relation"] = to_json(p.relation);
  j["value"] = to_json(p.value);
  j["candidates"] = string_array(p.candidates);
  j["examples"] = string_array(p.examples);
  j["references"] = reference_array(p.references);
  j["provenance"] = to_string(p.provenance);
  return j;
}

Json to_json(const PromptObject& obj) {
  Json j;
  j["schema_version"] = obj.schema_version;
  j["id"] = obj.id;
  j["title"] = obj.title;
  j["template_refs"] = string_array(obj.template_refs);
  j["version"] = obj.version;
  j["notes"] = obj.notes;
  Json props = Json::array();
  for (const auto& p : obj.properties) props.push_back(to_json(p));
  j["properties"] = std::move(props);
  return j;
}

Json to_json(const PropertySpec& spec) {
  Json j;
  j["name"] = spec.name;
  j["value"] = to_json(spec.value);
  if (spec.polarity) j["polarity"] = to_string(*spec.polarity);
  if (spec.tier) j["tier"] = to_string(*spec.tier);
  if (spec.relation) j["relation"] = to_json(*spec.relation);
  j["candidates"] = string_array(spec.candidates);
  j["examples"] = string_array(spec.examples);
  j["references"] = reference_array(spec.references);
  j["provenance"] = to_string(spec.provenance);
  return j;
}

Json to_json(const PropertyPatch& patch) {
  Json j = Json::object();
  if (patch.name) j["name"] = *patch.name;
  if (patch.value) j["value"] = to_json(*patch.value);
  if (patch.polarity) j["polarity"] = to_string(*patch.polarity);
  if (patch.tier) j["tier"] = to_string(*patch.tier);
  if (patch.relation) j["relation"] = to_json(*patch.relation);
  if (patch.candidates) j["candidates"] = string_array(*patch.candidates);
  if (patch.examples) j["examples"] = string_array(*patch.examples);
  if (patch.references) j["references"] = reference_array(*patch.references);
  return j;
}

PropertyValue value_from_json(const Json& j) {
  if (j.is_string()) return TextValue{j.get<std::string>()};
  auto kind = require_string(j, "kind");
  if (kind == "text") return TextValue{require_string(j, "text")};
  if (kind == "child") return ChildRef{require_string(j, "ref")};
  throw Error(ErrorCode::InvalidArgument, "unknown value kind '" + kind + "'");
}

Relation relation_from_json(const Json& j) {
  auto kind = require_string(j, "kind");
  if (kind == "parallel") return Parallel{};
  if (kind == "sequential") return Sequential{require_string(j, "group"), require_int(j, "order")};
  throw Error(ErrorCode::InvalidArgument, "unknown relation kind '" + kind + "'");
}

Property property_from_json(const Json& j) {
  Property p;
  p.id = require_string(j, "id");
  p.name = require_string(j, "name");
  p.polarity = polarity_from_string(require_string(j, "polarity"));
  p.tier = tier_from_string(require_string(j, "tier"));
  p.relation = relation_from_json(require(j, "relation"));
  p.value = value_from_json(require(j, "value"));
  p.candidates = string_list(j, "candidates");
  p.examples = string_list(j, "examples");
  p.references = references_from_json(j, "references");
  p.provenance = provenance_from_string(require_string(j, "provenance"));
  return p;
}

PromptObject object_from_json(const Json& j) {
  PromptObject obj;
  obj.schema_version = require_int(j, "schema_version");
  if (obj.schema_version != kSchemaVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                "schema_version " + std::to_string(obj.schema_version) + " is not supported (expected " +
                    std::to_string(kSchemaVersion) + ")");
  }
  obj.id = require_string(j, "id");
  obj.title = require_string(j, "title");
  obj.template_refs = string_list(j, "template_refs");
  obj.version = require_int(j, "version");
  obj.notes = optional_string(j, "notes");
  const Json& props = require(j, "properties");
  if (!props.is_array()) throw Error(ErrorCode::InvalidArgument, "field 'properties' must be an array");
  for (const auto& p : props) obj.properties.push_back(property_from_json(p));
  return obj;
}

PropertySpec spec_from_json(const Json& j) {
  PropertySpec spec;
  spec.name = require_string(j, "name");
  if (j.contains("value")) spec.value = value_from_json(j.at("value"));
  if (j.contains("polarity")) spec.polarity = polarity_from_string(require_string(j, "polarity"));
  if (j.contains("tier")) spec.tier = tier_from_string(require_string(j, "tier"));
  if (j.contains("relation")) spec.relation = relation_from_json(j.at("relation"));
  spec.candidates = string_list(j, "candidates");
  spec.examples = string_list(j, "examples");
  spec.references = references_from_json(j, "references");
  if (j.contains("provenance")) spec.provenance = provenance_from_string(require_string(j, "provenance"));
  return spec;
}

PropertyPatch patch_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "patch must be a JSON object");
  PropertyPatch patch;
  if (j.contains("name")) patch.name = require_string(j, "name");
  if (j.contains("value")) patch.value = value_from_json(j.at("value"));
  if (j.contains("polarity")) patch.polarity = polarity_from_string(require_string(j, "polarity"));
  if (j.contains("tier")) patch.tier = tier_from_string(require_string(j, "tier"));
  if (j.contains("relation")) patch.relation = relation_from_json(j.at("relation"));
  if (j.contains("candidates")) patch.candidates = string_list(j, "candidates");
  if (j.contains("examples")) patch.examples = string_list(j, "examples");
  if (j.contains("references")) patch.references = references_from_json(j, "references");
  return patch;
}

}  // namespace ooprompt
