#pragma once

#include <string>

#include "ooprompt/json.hpp"
#include "ooprompt/model.hpp"

// JSON dialect shared by object files, templates, proposals and the canonical
// render. Keys are emitted in a fixed order; readers are strict and throw
// Error(InvalidArgument) naming the offending field.
namespace ooprompt {

Json to_json(const PropertyValue& value);
Json to_json(const Relation& relation);
Json to_json(const Reference& ref);
Json to_json(const Property& p);
Json to_json(const PromptObject& obj);
Json to_json(const PropertySpec& spec);
Json to_json(const PropertyPatch& patch);

PropertyValue value_from_json(const Json& j);
Relation relation_from_json(const Json& j);
Property property_from_json(const Json& j);
PromptObject object_from_json(const Json& j);
PropertySpec spec_from_json(const Json& j);
PropertyPatch patch_from_json(const Json& j);

namespace json_util {

const Json& require(const Json& j, const char* key);
std::string require_string(const Json& j, const char* key);
int require_int(const Json& j, const char* key);
std::vector<std::string> string_list(const Json& j, const char* key);
std::string optional_string(const Json& j, const char* key, std::string fallback = {});

}  // namespace json_util

}  // namespace ooprompt
