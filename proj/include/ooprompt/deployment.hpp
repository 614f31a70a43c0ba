#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ooprompt/error.hpp"
#include "ooprompt/json.hpp"
#include "ooprompt/model.hpp"

namespace ooprompt {

enum class RenderFormat { NaturalLanguage, Json, Hybrid };

std::string_view to_string(RenderFormat f);
RenderFormat format_from_string(std::string_view s);

struct RenderOptions {
  /// Append tier wording ("(important)", ...) to requirement lines.
  bool emphasis_text = false;
};

struct DeploymentArtifact {
  std::string object_id;
  int object_version = 0;
  RenderFormat format = RenderFormat::NaturalLanguage;
  std::string text;
  std::string variant_key;  // "" = primary values
};

Json to_json(const DeploymentArtifact& a);
DeploymentArtifact artifact_from_json(const Json& j);

inline constexpr std::string_view kExclusionMarker = "Do NOT include:";
inline constexpr std::string_view kFenceOpen = "```json\n";
inline constexpr std::string_view kFenceClose = "\n```";

DeploymentArtifact render_nl(const PromptObject& obj, const ObjectLookup& lookup = {}, RenderOptions options = {});
DeploymentArtifact render_json(const PromptObject& obj, const ObjectLookup& lookup = {});
DeploymentArtifact render_hybrid(const PromptObject& obj, const ObjectLookup& lookup = {},
                                 RenderOptions options = {});
DeploymentArtifact render(const PromptObject& obj, RenderFormat format, const ObjectLookup& lookup = {},
                          RenderOptions options = {});

/// The object document with child values inlined as value.object, recursively.
/// Throws CycleDetected, UnknownObject for an unresolvable child.
Json inline_children(const PromptObject& obj, const ObjectLookup& lookup);

struct ParsedRender {
  PromptObject root;
  std::vector<PromptObject> children;  // pre-order
};

/// Inverse of render_json: the root object plus every inlined child.
ParsedRender parse_rendered_json(std::string_view text);

struct HybridParts {
  std::string header;
  std::string json;
  std::string closing;
};

/// Splits a hybrid render at its fence; throws InvalidArgument if the layout is off.
HybridParts split_hybrid(std::string_view text);

/// Which alternative each Text-valued property uses: 0 is the primary value, i > 0
/// is candidates[i - 1]. Indexed like obj.properties (child-valued entries stay 0).
using VariantSelection = std::vector<std::size_t>;

std::string variant_key(const PromptObject& obj, const VariantSelection& selection);
/// The object with each selected candidate swapped in as the value; candidate
/// lists are cleared since the variant is fully resolved.
PromptObject apply_variant(const PromptObject& obj, const VariantSelection& selection);

/// Selections in canonical order: odometer over the Text-valued properties, the
/// first property most significant. Always starts with the all-primary selection.
std::vector<VariantSelection> variant_selections(const PromptObject& obj, std::size_t cap);

std::vector<DeploymentArtifact> enumerate_variants(const PromptObject& obj, std::size_t cap = 8,
                                                   RenderFormat format = RenderFormat::NaturalLanguage,
                                                   const ObjectLookup& lookup = {}, RenderOptions options = {});

/// One ephemeral object per sequential step, each holding that step's property plus
/// every parallel property. Groups run in order of first appearance. Throws
/// NoSequentialGroup.
std::vector<PromptObject> decompose_sequential_chain(const PromptObject& obj);

}  // namespace ooprompt
