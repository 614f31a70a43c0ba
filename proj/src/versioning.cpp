#include "ooprompt/versioning.hpp"

#include <algorithm>

#include "ooprompt/codec.hpp"
#include "ooprompt/error.hpp"

namespace ooprompt {

using namespace json_util;

Json to_json(const VersionRecord& r) {
  Json j;
  j["object_id"] = r.object_id;
  j["version"] = r.version;
  j["timestamp"] = r.timestamp;
  j["changelog"] = r.changelog;
  j["snapshot"] = to_json(r.snapshot);
  return j;
}

VersionRecord record_from_json(const Json& j) {
  VersionRecord r;
  r.object_id = require_string(j, "object_id");
  r.version = require_int(j, "version");
  r.timestamp = optional_string(j, "timestamp");
  r.changelog = optional_string(j, "changelog");
  r.snapshot = object_from_json(require(j, "snapshot"));
  if (r.snapshot.id != r.object_id || r.snapshot.version != r.version) {
    throw Error(ErrorCode::InvalidArgument, "history record header does not match its snapshot");
  }
  return r;
}

History::History(std::vector<VersionRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].version != static_cast<int>(i) + 1 ||
        (i > 0 && records_[i].object_id != records_[0].object_id)) {
      throw Error(ErrorCode::InvariantViolation, "history is not the contiguous sequence 1.." +
                                                     std::to_string(records_.size()));
    }
  }
}

const VersionRecord& History::append(const PromptObject& obj, std::string changelog, std::string timestamp) {
  if (obj.version != current_version() + 1) {
    throw Error(ErrorCode::InvariantViolation,
                "snapshot of " + obj.id + " v" + std::to_string(obj.version) + " does not follow v" +
                    std::to_string(current_version()));
  }
  if (!records_.empty() && records_.front().object_id != obj.id) {
    throw Error(ErrorCode::InvariantViolation, "history of " + records_.front().object_id + " cannot hold " + obj.id);
  }
  if (auto v = validate_object(obj); !v.empty()) {
    throw Error(ErrorCode::InvariantViolation, "refusing to snapshot an invalid object: " + v.front().detail);
  }
  records_.push_back(VersionRecord{obj.id, obj.version, obj, std::move(changelog), std::move(timestamp)});
  return records_.back();
}

const VersionRecord& History::at(int version) const {
  if (version < 1 || version > current_version()) {
    std::string id = records_.empty() ? "object" : records_.front().object_id;
    throw Error(ErrorCode::UnknownVersion,
                id + " has no version " + std::to_string(version) + " (current " + std::to_string(current_version()) + ")",
                Json{{"version", version}, {"current", current_version()}});
  }
  return records_[static_cast<std::size_t>(version - 1)];
}

PromptObject restore_content(const History& history, int version) {
  PromptObject obj = history.at(version).snapshot;
  obj.version = history.current_version() + 1;
  return obj;
}

namespace {

void compare(std::vector<FieldChange>& out, const char* field, const Json& a, const Json& b) {
  if (a != b) out.push_back(FieldChange{field, a, b});
}

Json change_json(const FieldChange& c) { return Json{{"field", c.field}, {"before", c.before}, {"after", c.after}}; }

}  // namespace

ObjectDiff diff_objects(const PromptObject& a, const PromptObject& b) {
  ObjectDiff d;
  compare(d.object_fields, "title", a.title, b.title);
  compare(d.object_fields, "notes", a.notes, b.notes);
  compare(d.object_fields, "template_refs", a.template_refs, b.template_refs);

  std::vector<std::string> common_a, common_b;
  for (const auto& pa : a.properties) {
    const Property* pb = b.find(pa.id);
    if (!pb) {
      d.removed.push_back(pa);
      continue;
    }
    common_a.push_back(pa.id);
    Json ja = to_json(pa), jb = to_json(*pb);
    PropertyChange pc{pa.id, pb->name, {}};
    for (auto it = ja.begin(); it != ja.end(); ++it) {
      if (it.key() == "id") continue;
      compare(pc.fields, it.key().c_str(), it.value(), jb.at(it.key()));
    }
    if (!pc.fields.empty()) d.changed.push_back(std::move(pc));
  }
  for (const auto& pb : b.properties) {
    if (!a.find(pb.id)) {
      d.added.push_back(pb);
    } else {
      common_b.push_back(pb.id);
    }
  }
  compare(d.object_fields, "property_order", common_a, common_b);
  return d;
}

ObjectDiff diff_versions(const History& history, int version_a, int version_b) {
  return diff_objects(history.at(version_a).snapshot, history.at(version_b).snapshot);
}

Json to_json(const ObjectDiff& d) {
  Json j;
  j["object_fields"] = Json::array();
  for (const auto& c : d.object_fields) j["object_fields"].push_back(change_json(c));
  j["added"] = Json::array();
  for (const auto& p : d.added) j["added"].push_back(to_json(p));
  j["removed"] = Json::array();
  for (const auto& p : d.removed) j["removed"].push_back(to_json(p));
  j["changed"] = Json::array();
  for (const auto& pc : d.changed) {
    Json jc{{"prop_id", pc.prop_id}, {"name", pc.name}, {"fields", Json::array()}};
    for (const auto& c : pc.fields) jc["fields"].push_back(change_json(c));
    j["changed"].push_back(std::move(jc));
  }
  return j;
}

std::vector<PropertyValueAt> property_history(const History& history, std::string_view name) {
  std::vector<PropertyValueAt> out;
  for (const auto& r : history.records()) {
    const Property* p = r.snapshot.find_by_name(name);
    if (!p) continue;
    if (!out.empty() && out.back().value == p->value) continue;
    out.push_back(PropertyValueAt{r.version, p->id, p->value});
  }
  if (out.empty()) {
    throw Error(ErrorCode::NeverExisted, "no version has a property named '" + std::string(name) + "'",
                Json{{"name", name}});
  }
  return out;
}

Json to_json(const PropertyValueAt& v) {
  Json j;
  j["version"] = v.version;
  j["prop_id"] = v.prop_id;
  j["value"] = to_json(v.value);
  return j;
}

}  // namespace ooprompt
