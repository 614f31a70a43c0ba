#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ooprompt/deployment.hpp"
#include "ooprompt/evaluation.hpp"
#include "ooprompt/gateway.hpp"
#include "ooprompt/templates.hpp"
#include "ooprompt/workspace.hpp"

namespace ooprompt {

/// The operation set shared by the CLI and the HTTP service. Every method returns
/// the JSON payload both front ends emit, and every mutation takes an optional
/// expected object version (VersionConflict when stale).
class Lifecycle {
 public:
  Lifecycle(Workspace& ws, Assistant& assistant) : ws_(ws), assistant_(assistant) {}

  Workspace& workspace() { return ws_; }

  // objects
  Json list_objects() const;
  Json show_object(std::string_view id) const;
  Json create_object(const std::string& title, const std::vector<std::string>& template_refs,
                     const std::map<std::string, std::vector<std::string>>& selections = {},
                     const std::string& notes = {});
  Json edit_object(std::string_view id, const ObjectPatch& patch, std::optional<int> expected = {});
  Json delete_object(std::string_view id);

  // properties; `prop` is a property id or name
  Json add_property(std::string_view id, const PropertySpec& spec, std::optional<int> expected = {});
  Json update_property(std::string_view id, std::string_view prop, const PropertyPatch& patch,
                       std::optional<int> expected = {});
  Json remove_property(std::string_view id, std::string_view prop, std::optional<int> expected = {});
  Json nest(std::string_view id, std::string_view prop, std::optional<int> expected = {});
  Json promote(std::string_view id, std::string_view prop, std::optional<int> expected = {});
  Json reorder(std::string_view id, const std::vector<std::string>& props, std::optional<int> expected = {});

  // templates
  Json list_templates() const;
  Json search_templates(std::string_view query, SearchFacet by);
  Json apply_template(std::string_view id, const std::string& template_id,
                      const std::optional<std::vector<std::string>>& selection, std::optional<int> expected = {});
  Json derive_template(std::string_view id, const std::string& template_id, const std::string& description,
                       const TemplateTags& tags);

  // assistant-backed proposals
  Json extract(const std::string& text, std::optional<std::string> target = {});
  Json suggest_properties(std::string_view id);
  Json suggest_relations(std::string_view id);
  Json suggest_candidates(std::string_view id, std::string_view prop);
  Json suggest_examples(std::string_view id, std::string_view prop);
  Json refine(std::string_view id);
  Json feedback(std::string_view id, const std::string& text);

  Json list_proposals(std::optional<std::string> object_id = {}) const;
  Json show_proposal(std::string_view id) const;
  Json apply_proposal(std::string_view id, const std::vector<std::size_t>& items, std::optional<int> expected = {});
  Json dismiss_proposal(std::string_view id, const std::vector<std::size_t>& items);

  // analysis and deployment
  Json analyze(std::string_view id, RenderFormat format = RenderFormat::NaturalLanguage);
  Json render(std::string_view id, RenderFormat format, std::optional<std::size_t> variants = {},
              RenderOptions options = {}) const;
  Json chain(std::string_view id, RenderFormat format, RenderOptions options = {}) const;

  // versioning
  Json history(std::string_view id) const;
  Json property_history(std::string_view id, std::string_view name) const;
  Json restore(std::string_view id, int version, std::optional<int> expected = {});
  Json diff(std::string_view id, int version_a, int version_b) const;

  // evaluation
  struct EvalPlan {
    std::string run_id;
    std::vector<DeploymentArtifact> artifacts;
    std::vector<Criterion> criteria;
    std::vector<std::string> models;
  };
  /// Renders the variants of each object and reserves a run id.
  EvalPlan plan_eval(const std::vector<std::string>& object_ids, std::size_t variants, RenderFormat format,
                     std::vector<Criterion> criteria, std::vector<std::string> models);
  Json finish_eval(ComparisonReport report);
  Json eval_run(const std::vector<std::string>& object_ids, std::size_t variants, RenderFormat format,
                std::vector<Criterion> criteria, std::vector<std::string> models);
  Json eval_show(std::string_view run_id) const;
  Json eval_suggest(std::string_view run_id, std::optional<std::string> object_id = {});

  /// Property id for an id or (case-insensitive) name. Throws UnknownProperty.
  static std::string resolve_property(const PromptObject& obj, std::string_view ref);

 private:
  const PromptObject& current(std::string_view id, std::optional<int> expected) const;
  Json commit(PromptObject obj, std::string changelog);
  Json save(MappingProposal p);

  Workspace& ws_;
  Assistant& assistant_;
};

/// Default generation model for evaluation runs: OOPROMPT_MODEL or gpt-4o-mini.
std::string default_eval_model();

}  // namespace ooprompt
