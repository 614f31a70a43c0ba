#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ooprompt/error.hpp"
#include "ooprompt/json.hpp"

namespace ooprompt {

inline constexpr int kSchemaVersion = 1;

enum class Polarity { Include, Exclude };

// "Not wanted at all" is expressed as Polarity::Exclude, not as a fifth tier.
enum class Tier { SlightlyWanted, Normal, Wanted, HighlyWanted };

enum class Provenance { Explicit, Implicit, Template, User, Suggested };

struct TextValue {
  std::string text;
  bool operator==(const TextValue&) const = default;
};

struct ChildRef {
  std::string object_id;
  bool operator==(const ChildRef&) const = default;
};

using PropertyValue = std::variant<TextValue, ChildRef>;

struct Parallel {
  bool operator==(const Parallel&) const = default;
};

struct Sequential {
  std::string group;
  int order = 1;
  bool operator==(const Sequential&) const = default;
};

using Relation = std::variant<Parallel, Sequential>;

struct Reference {
  std::string label;
  std::string uri;
  bool operator==(const Reference&) const = default;
};

struct Property {
  std::string id;
  std::string name;
  PropertyValue value = TextValue{};
  Polarity polarity = Polarity::Include;
  Tier tier = Tier::Normal;
  Relation relation = Parallel{};
  std::vector<std::string> candidates;
  std::vector<std::string> examples;
  std::vector<Reference> references;
  Provenance provenance = Provenance::User;

  bool is_text() const { return std::holds_alternative<TextValue>(value); }
  bool is_child() const { return std::holds_alternative<ChildRef>(value); }
  bool is_sequential() const { return std::holds_alternative<Sequential>(relation); }
  /// Empty string for child-valued properties.
  const std::string& text() const;
  /// Empty string for text-valued properties.
  const std::string& child_id() const;

  bool operator==(const Property&) const = default;
};

struct PromptObject {
  std::string id;
  std::string title;
  std::vector<std::string> template_refs;
  std::vector<Property> properties;
  int version = 1;
  std::string notes;
  int schema_version = kSchemaVersion;

  const Property* find(std::string_view prop_id) const;
  const Property* find_by_name(std::string_view name) const;

  bool operator==(const PromptObject&) const = default;
};

/// Equality ignoring the version counter.
bool same_content(const PromptObject& a, const PromptObject& b);

/// Trim, collapse inner whitespace, lowercase (ASCII).
std::string normalize_name(std::string_view name);

std::string_view to_string(Polarity p);
std::string_view to_string(Tier t);
std::string_view to_string(Provenance p);
Polarity polarity_from_string(std::string_view s);
Tier tier_from_string(std::string_view s);
Provenance provenance_from_string(std::string_view s);

enum class IdKind { Object, Property, Proposal, Run };

/// Workspace-sequential identifiers ("po-0001", "pr-0001", "pp-0001", "run-0001").
/// Never reissues an id, even after the entity is deleted.
class IdAllocator {
 public:
  std::string issue(IdKind kind);
  /// Bump the counter past an id that was issued elsewhere (e.g. loaded from disk).
  void observe(std::string_view id);
  int last_issued(IdKind kind) const { return last_[static_cast<std::size_t>(kind)]; }
  void set_last_issued(IdKind kind, int value) { last_[static_cast<std::size_t>(kind)] = value; }

 private:
  std::array<int, 4> last_{};
};

std::string format_id(IdKind kind, int n);

struct PropertySpec {
  std::string name;
  PropertyValue value = TextValue{};
  std::optional<Polarity> polarity;
  std::optional<Tier> tier;
  std::optional<Relation> relation;
  std::vector<std::string> candidates;
  std::vector<std::string> examples;
  std::vector<Reference> references;
  Provenance provenance = Provenance::User;
};

struct PropertyPatch {
  std::optional<std::string> name;
  std::optional<PropertyValue> value;
  std::optional<Polarity> polarity;
  std::optional<Tier> tier;
  std::optional<Relation> relation;
  std::optional<std::vector<std::string>> candidates;
  std::optional<std::vector<std::string>> examples;
  std::optional<std::vector<Reference>> references;

  bool empty() const;
  bool operator==(const PropertyPatch&) const = default;
};

struct ObjectPatch {
  std::optional<std::string> title;
  std::optional<std::string> notes;
};

/// Resolves a child reference; returns nullptr when the id is unknown.
using ObjectLookup = std::function<const PromptObject*(std::string_view)>;

PromptObject make_object(std::string id, std::string title,
                         std::vector<std::string> template_refs = {},
                         std::vector<Property> inherited = {});

Property make_property(const PropertySpec& spec, std::string id);

PromptObject add_property(const PromptObject& obj, const PropertySpec& spec, IdAllocator& ids);
PromptObject update_property(const PromptObject& obj, std::string_view prop_id,
                             const PropertyPatch& patch);
PromptObject update_object(const PromptObject& obj, const ObjectPatch& patch);
PromptObject remove_property(const PromptObject& obj, std::string_view prop_id);

struct NestResult {
  PromptObject parent;
  PromptObject child;
};

NestResult nest_child(const PromptObject& obj, std::string_view prop_id, IdAllocator& ids);

/// Inverse of nest_child. The nested property is kept and takes back its text from
/// the child's notes; the child's properties are inlined after it as
/// "ChildTitle / Name". Deleting the child itself is the caller's job.
PromptObject promote_child(const PromptObject& parent, std::string_view prop_id,
                           const PromptObject& child);

PromptObject reorder_properties(const PromptObject& obj, const std::vector<std::string>& order);

enum class ViolationKind {
  EmptyName,
  DuplicateName,
  DuplicatePropertyId,
  DuplicateOrder,
  InvalidOrder,
  EmptyGroup,
  ChildWithCandidates,
  ExcludeNotText,
  DanglingChild,
  Cycle,
  InvalidVersion,
  SchemaVersion,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string entity;  // property id, or object id for object-level violations
  std::string detail;
  bool operator==(const Violation&) const = default;
};

/// Empty iff every object and property invariant holds. Reference resolution and
/// acyclicity are only checked when a lookup is supplied.
std::vector<Violation> validate_object(const PromptObject& obj, const ObjectLookup& lookup = {});

/// Properties ordered by (tier descending, user order); stable.
std::vector<const Property*> render_order(const PromptObject& obj);

}  // namespace ooprompt
