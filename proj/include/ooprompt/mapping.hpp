#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ooprompt/gateway.hpp"
#include "ooprompt/model.hpp"

namespace ooprompt {

inline constexpr std::size_t kMaxExamples = 12;
inline constexpr std::size_t kMaxCandidatesPerCall = 4;

enum class ProposalItemKind { Add, Update, Remove };
enum class ProposalStatus { Pending, Applied, Dismissed };

std::string_view to_string(ProposalItemKind k);
std::string_view to_string(ProposalStatus s);

/// Byte range [begin, end) of the raw text a property was read from.
struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const SourceSpan&) const = default;
};

struct ProposalItem {
  ProposalItemKind kind = ProposalItemKind::Add;
  PropertySpec addition;  // Add
  std::string prop_id;    // Update, Remove
  PropertyPatch patch;    // Update
  std::string rationale;
  std::optional<SourceSpan> span;
  ProposalStatus status = ProposalStatus::Pending;
};

/// A review queue of suggested edits. Nothing here touches an object until
/// apply_proposal is called explicitly.
struct MappingProposal {
  std::string id;
  std::string object_id;
  int object_version = 0;
  std::string operation;
  std::vector<ProposalItem> items;

  bool empty() const { return items.empty(); }
  std::size_t pending() const;
};

Json to_json(const MappingProposal& p);
MappingProposal proposal_from_json(const Json& j);

/// The view of an object sent to assistants: names, values, polarity, tier, relation.
Json object_payload(const PromptObject& obj, const ObjectLookup& lookup = {});

/// With a target object, properties it already has become value updates instead of
/// additions (filling inherited template defaults).
MappingProposal extract_properties(Assistant& assistant, std::string_view raw_text,
                                   const PromptObject* target = nullptr);

AssistantRequest implicit_suggestion_request(const PromptObject& obj, const ObjectLookup& lookup = {});
MappingProposal implicit_suggestions_from(const PromptObject& obj, const AssistantResponse& resp);
MappingProposal suggest_implicit_properties(Assistant& assistant, const PromptObject& obj,
                                            const ObjectLookup& lookup = {});

MappingProposal detect_relations(Assistant& assistant, const PromptObject& obj,
                                 const ObjectLookup& lookup = {});
MappingProposal generate_candidates(Assistant& assistant, const PromptObject& obj, std::string_view prop_id);
MappingProposal generate_examples(Assistant& assistant, const PromptObject& obj, std::string_view prop_id,
                                  const ObjectLookup& lookup = {});
MappingProposal apply_holistic_feedback(Assistant& assistant, const PromptObject& obj,
                                        std::string_view feedback, const ObjectLookup& lookup = {});
MappingProposal refine_language(Assistant& assistant, const PromptObject& obj, const ObjectLookup& lookup = {});

/// Turns a feedback_integrator response into a proposal against `obj`, dropping items
/// that name unknown properties or would change nothing.
MappingProposal proposal_from_feedback(const PromptObject& obj, const Json& output, std::string operation);

struct ApplyResult {
  PromptObject object;
  MappingProposal proposal;
};

/// Applies the selected pending items (all pending when `items` is empty) as one
/// committed mutation: version +1, atomic on failure.
ApplyResult apply_proposal(const PromptObject& obj, const MappingProposal& proposal,
                           const std::vector<std::size_t>& items, IdAllocator& ids);

MappingProposal dismiss_items(const MappingProposal& proposal, const std::vector<std::size_t>& items);

}  // namespace ooprompt
