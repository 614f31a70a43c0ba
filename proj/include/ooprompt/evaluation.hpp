#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ooprompt/deployment.hpp"
#include "ooprompt/gateway.hpp"
#include "ooprompt/mapping.hpp"

namespace ooprompt {

struct Criterion {
  std::string id;
  std::string description;
  double weight = 1.0;
};

/// Editable starting set: length fit, style fit, cohesiveness.
std::vector<Criterion> default_criteria();

Json to_json(const Criterion& c);
Criterion criterion_from_json(const Json& j);

struct Verdict {
  std::string criterion_id;
  std::string model;
  double score = 0.0;
  std::string justification;
  std::string suggestion;
};

struct Generation {
  std::string model;
  std::optional<std::string> text;
  std::optional<std::string> error;  // "<code>: <message>"
};

struct ArtifactResult {
  DeploymentArtifact artifact;
  std::vector<Generation> generations;
  std::vector<Verdict> verdicts;
  /// Per-criterion score averaged over the models that succeeded, in criteria order.
  std::vector<double> criterion_scores;
  std::optional<double> weighted_score;  // nullopt when no model produced a judged output
  std::vector<std::string> errors;

  bool ok() const { return weighted_score.has_value(); }
};

struct RankEntry {
  std::size_t artifact = 0;  // index into ComparisonReport::results
  std::optional<double> score;
};

struct Preference {
  std::size_t a = 0;
  std::size_t b = 0;
  std::optional<std::size_t> preferred;  // nullopt = tie
  double margin = 0.0;
};

struct ComparisonReport {
  std::string run_id;
  std::string timestamp;
  std::vector<Criterion> criteria;
  std::vector<std::string> models;
  std::vector<ArtifactResult> results;
  /// A permutation of the compared artifacts: scored ones by descending score (ties by
  /// artifact order), then failed ones in artifact order.
  std::vector<RankEntry> ranking;
  std::vector<Preference> preferences;  // every pair of scored artifacts
  std::vector<std::string> suggestions;
};

/// Generation fans out per (artifact, model), judging per (output, criterion).
/// Failures become per-artifact error entries. Throws InvalidArgument on bad input
/// (fewer than 2 artifacts, no criteria, no models, non-positive weight).
ComparisonReport run_comparison(Assistant& assistant, const std::vector<DeploymentArtifact>& artifacts,
                                const std::vector<Criterion>& criteria, const std::vector<std::string>& models,
                                std::string run_id, std::string timestamp = {});

Json to_json(const ComparisonReport& r);
ComparisonReport report_from_json(const Json& j);

/// Pending proposal against `obj` built from the report's suggestions; empty when there
/// are none.
MappingProposal suggest_from_report(Assistant& assistant, const ComparisonReport& report, const PromptObject& obj,
                                    const ObjectLookup& lookup = {});

}  // namespace ooprompt
