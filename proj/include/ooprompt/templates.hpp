#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ooprompt/json.hpp"
#include "ooprompt/model.hpp"

namespace ooprompt {

class Assistant;

struct TemplateDefault {
  std::string name;
  std::string value;
  std::string description;
  Tier tier = Tier::Normal;
  bool operator==(const TemplateDefault&) const = default;
};

struct TemplateTags {
  std::string output_type;
  std::vector<std::string> use_cases;
  bool operator==(const TemplateTags&) const = default;
};

/// A reusable "base class": named default properties an object can inherit.
struct Template {
  std::string id;
  std::string display_name;
  std::string description;
  TemplateTags tags;
  std::vector<TemplateDefault> defaults;
  bool seed = false;  // shipped editorial data rather than user-derived
  bool operator==(const Template&) const = default;
};

/// Templates kept sorted by id.
class TemplateLibrary {
 public:
  TemplateLibrary() = default;

  /// The built-in seed set (text, image, code, story, trip, report).
  static TemplateLibrary seed();

  const Template* find(std::string_view id) const;
  const std::vector<Template>& all() const { return templates_; }
  bool empty() const { return templates_.empty(); }
  std::size_t size() const { return templates_.size(); }

  /// Throws DuplicateTemplateId.
  void add(Template t);

  bool operator==(const TemplateLibrary&) const = default;

 private:
  std::vector<Template> templates_;
};

enum class SearchFacet { OutputType, UseCase, Example };

SearchFacet facet_from_string(std::string_view s);

struct TemplateMatch {
  std::string template_id;
  double score = 0.0;
};

/// Ranks templates by the fraction of query keywords found in the chosen facet; zero
/// scores are dropped. An exact id match always ranks first. Example mode asks the
/// extractor assistant for the example's output type and searches on that.
std::vector<TemplateMatch> search_templates(const TemplateLibrary& library, std::string_view query,
                                            SearchFacet by, Assistant* assistant = nullptr);

/// Properties for the selected defaults (nullopt selects all), in template order.
std::vector<Property> instantiate_selective(const Template& t,
                                            const std::optional<std::vector<std::string>>& selected,
                                            IdAllocator& ids);

/// Union of the selected defaults of every parent. On a name collision the
/// first-listed parent wins and each losing parent is recorded on the winner as a
/// reference {label: "lineage", uri: "template:<id>"}.
std::vector<Property> merge_templates(const std::vector<const Template*>& parents,
                                      const std::vector<std::optional<std::vector<std::string>>>& selections,
                                      IdAllocator& ids);

Template derive_template(const PromptObject& obj, const TemplateLibrary& library, std::string id,
                         std::string description, TemplateTags tags);

Json to_json(const Template& t);
Template template_from_json(const Json& j);

/// Lowercased alphanumeric keywords.
std::vector<std::string> keywords(std::string_view text);

}  // namespace ooprompt
