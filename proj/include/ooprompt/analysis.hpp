#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ooprompt/deployment.hpp"
#include "ooprompt/gateway.hpp"
#include "ooprompt/mapping.hpp"
#include "ooprompt/model.hpp"
#include "ooprompt/templates.hpp"

namespace ooprompt {

struct StructuralConflict {
  std::string kind;  // include_exclude | sequential_gap | dangling_child
  std::vector<std::string> prop_ids;
  std::string message;
  bool operator==(const StructuralConflict&) const = default;
};

struct SemanticConflict {
  std::vector<std::string> prop_ids;
  std::string explanation;
  std::string suggested_fix;
};

struct SafetyFlag {
  std::string prop_id;  // empty for object-level flags
  std::string category;
  std::string explanation;
  std::string source;  // "rule" | "assistant"
};

struct TemplateScore {
  std::string template_id;
  double score = 0.0;
};

/// Rule-based and LLM-free. Include/exclude collisions compare normalized names and
/// normalized text values across polarities; dangling children are only checked
/// when a lookup is given.
std::vector<StructuralConflict> detect_structural_conflicts(const PromptObject& obj,
                                                            const ObjectLookup& lookup = {});

AssistantRequest semantic_conflict_request(const PromptObject& obj, const ObjectLookup& lookup = {});
std::vector<SemanticConflict> semantic_conflicts_from(const PromptObject& obj, const AssistantResponse& resp);
std::vector<SemanticConflict> detect_semantic_conflicts(Assistant& assistant, const PromptObject& obj,
                                                        const ObjectLookup& lookup = {});

/// ceil(code points / 4). A heuristic, not a tokenizer.
std::size_t estimate_tokens(std::string_view text);
std::size_t estimate_tokens(const DeploymentArtifact& artifact);

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Jaccard index of the object's normalized include-property names against each
/// template's default names; descending, ties by template id. Throws EmptyLibrary.
std::vector<TemplateScore> template_similarity(const PromptObject& obj, const TemplateLibrary& library);

/// Theme terms that are flagged when the audience is children.
std::vector<std::string> default_safety_blocklist();
std::vector<std::string> parse_blocklist(std::string_view text);

std::vector<SafetyFlag> safety_scan_rules(const PromptObject& obj, const std::vector<std::string>& blocklist);
AssistantRequest safety_request(const PromptObject& obj, const ObjectLookup& lookup = {});
std::vector<SafetyFlag> safety_flags_from(const PromptObject& obj, const AssistantResponse& resp);

struct SectionStatus {
  bool ran = true;
  std::string reason;  // why it was skipped
};

struct AnalysisReport {
  std::string object_id;
  int object_version = 0;
  std::vector<StructuralConflict> structural_conflicts;
  std::vector<SemanticConflict> semantic_conflicts;
  SectionStatus semantic_status;
  std::size_t token_estimate = 0;
  std::vector<TemplateScore> template_similarity;
  std::vector<SafetyFlag> safety_flags;
  SectionStatus safety_assistant_status;
  std::optional<MappingProposal> completeness_suggestions;
  SectionStatus completeness_status;
};

/// Rule-tier sections always run; assistant-backed sections fan out together and
/// are marked skipped on failure. Without a library the similarity list is empty.
AnalysisReport build_static_report(Assistant& assistant, const PromptObject& obj, const TemplateLibrary& library,
                                   const DeploymentArtifact& artifact, const std::vector<std::string>& blocklist,
                                   const ObjectLookup& lookup = {});

Json to_json(const AnalysisReport& r);

/// Every prop_id the report cites, for checking they exist in the object.
std::vector<std::string> cited_property_ids(const AnalysisReport& r);

}  // namespace ooprompt
