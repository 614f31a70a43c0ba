#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ooprompt/json.hpp"
#include "ooprompt/model.hpp"

namespace ooprompt {

struct VersionRecord {
  std::string object_id;
  int version = 0;
  PromptObject snapshot;
  std::string changelog;  // "<operation> <entities>"
  std::string timestamp;
};

Json to_json(const VersionRecord& r);
VersionRecord record_from_json(const Json& j);

/// One object's history, oldest first. Append-only; versions run 1..current.
class History {
 public:
  History() = default;
  explicit History(std::vector<VersionRecord> records);

  /// Throws InvariantViolation unless `obj` validates and continues the sequence.
  const VersionRecord& append(const PromptObject& obj, std::string changelog, std::string timestamp);

  /// Throws UnknownVersion.
  const VersionRecord& at(int version) const;
  const std::vector<VersionRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  int current_version() const { return records_.empty() ? 0 : records_.back().version; }

 private:
  std::vector<VersionRecord> records_;
};

/// Content of `version` re-stamped as the next version. The caller commits it.
PromptObject restore_content(const History& history, int version);

struct FieldChange {
  std::string field;
  Json before;
  Json after;
};

struct PropertyChange {
  std::string prop_id;
  std::string name;
  std::vector<FieldChange> fields;
};

struct ObjectDiff {
  std::vector<FieldChange> object_fields;  // title, notes, template_refs, property_order
  std::vector<Property> added;
  std::vector<Property> removed;
  std::vector<PropertyChange> changed;

  bool empty() const { return object_fields.empty() && added.empty() && removed.empty() && changed.empty(); }
};

/// Properties are matched by id; the version counter is not part of the diff.
ObjectDiff diff_objects(const PromptObject& a, const PromptObject& b);
ObjectDiff diff_versions(const History& history, int version_a, int version_b);
Json to_json(const ObjectDiff& d);

struct PropertyValueAt {
  int version = 0;
  std::string prop_id;
  PropertyValue value;
};

/// Values the named property held, oldest first, consecutive repeats collapsed.
/// Throws NeverExisted.
std::vector<PropertyValueAt> property_history(const History& history, std::string_view name);
Json to_json(const PropertyValueAt& v);

}  // namespace ooprompt
