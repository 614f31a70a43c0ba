#include <gtest/gtest.h>

#include <algorithm>
#include <iterator>
#include <set>

#include "../support.hpp"
#include "ooprompt/analysis.hpp"

using namespace ooprompt;
using namespace testing_support;

namespace {

PromptObject excluded(PromptObject obj, std::size_t index) {
  PropertyPatch p;
  p.polarity = Polarity::Exclude;
  return update_property(obj, obj.properties[index].id, p);
}

PromptObject sequential(PromptObject obj, std::size_t index, const std::string& group, int order) {
  PropertyPatch p;
  p.relation = Sequential{group, order};
  return update_property(obj, obj.properties[index].id, p);
}

// Independent oracle: |A ∩ B| / |A ∪ B| via the standard set algorithms.
double jaccard_oracle(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  std::vector<std::string> inter, uni;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
  if (uni.empty()) return 1.0;
  return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

PromptObject trip(IdAllocator& ids) {
  return with_props("Trip to LA", {{"Output type", "Trip plan"},
                                   {"Destination", "Los Angeles"},
                                   {"Interests", "Local street food"},
                                   {"Duration", "Three days"}},
                    ids);
}

}  // namespace

TEST(StructuralConflicts, SameNameBothIncludedAndExcluded) {
  IdAllocator ids;
  // add_property refuses the duplicate name, so build it the way a hand-edited file would look.
  PromptObject obj = with_props("Story", {{"happy tone", "yes"}, {"Topic", "cats"}}, ids);
  PropertySpec x = text_spec("Happy  Tone", "no");
  x.polarity = Polarity::Exclude;
  obj.properties.push_back(make_property(x, ids.issue(IdKind::Property)));
  auto c = detect_structural_conflicts(obj);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].kind, "include_exclude");
  EXPECT_EQ(c[0].prop_ids, (std::vector<std::string>{obj.properties[0].id, obj.properties[2].id}));
}

TEST(StructuralConflicts, SameValueBothIncludedAndExcluded) {
  IdAllocator ids;
  PromptObject obj = with_props("Story", {{"Style", "horror elements"}, {"Avoid", "Horror elements"}}, ids);
  obj = excluded(obj, 1);
  auto c = detect_structural_conflicts(obj);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].kind, "include_exclude");
}

TEST(StructuralConflicts, GapInSequentialGroup) {
  IdAllocator ids;
  PromptObject obj = with_props("Story", {{"Beginning", "a"}, {"Ending", "b"}}, ids);
  obj = sequential(obj, 0, "plot", 1);
  obj = sequential(obj, 1, "plot", 3);
  auto c = detect_structural_conflicts(obj);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].kind, "sequential_gap");
  EXPECT_NE(c[0].message.find("2"), std::string::npos);
}

TEST(StructuralConflicts, DanglingChildOnlyWithLookup) {
  IdAllocator ids;
  PromptObject obj = with_props("Trip", {{"Schedule", "x"}}, ids);
  auto nested = nest_child(obj, obj.properties[0].id, ids);
  EXPECT_TRUE(detect_structural_conflicts(nested.parent).empty());
  ObjectLookup none = [](std::string_view) -> const PromptObject* { return nullptr; };
  auto c = detect_structural_conflicts(nested.parent, none);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].kind, "dangling_child");
  ObjectLookup found = [&](std::string_view id) -> const PromptObject* {
    return id == nested.child.id ? &nested.child : nullptr;
  };
  EXPECT_TRUE(detect_structural_conflicts(nested.parent, found).empty());
}

TEST(StructuralConflicts, CleanTripHasNone) {
  IdAllocator ids;
  EXPECT_TRUE(detect_structural_conflicts(trip(ids)).empty());
}

TEST(SemanticConflicts, HappyToneAgainstBadEnding) {
  MockAssistant mock;
  IdAllocator ids;
  PromptObject obj = with_props("Story", {{"Tone", "humorous, happy"}, {"Ending", "bad ending"}}, ids);
  auto c = detect_semantic_conflicts(mock, obj);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].prop_ids, (std::vector<std::string>{obj.properties[0].id, obj.properties[1].id}));
  EXPECT_FALSE(c[0].explanation.empty());
  EXPECT_FALSE(c[0].suggested_fix.empty());
}

TEST(SemanticConflicts, HorrorForChildren) {
  MockAssistant mock;
  IdAllocator ids;
  PromptObject obj = with_props("Story", {{"Style", "horror"}, {"Audience", "children"}}, ids);
  EXPECT_EQ(detect_semantic_conflicts(mock, obj).size(), 1u);
}

TEST(SemanticConflicts, SinglePropertyHasNone) {
  MockAssistant mock;
  IdAllocator ids;
  PromptObject obj = with_props("Story", {{"Tone", "humorous, happy, but a bad ending"}}, ids);
  EXPECT_TRUE(detect_semantic_conflicts(mock, obj).empty());
}

TEST(EstimateTokens, CeilingOfCharactersOverFour) {
  EXPECT_EQ(estimate_tokens(std::string_view("")), 0u);
  EXPECT_EQ(estimate_tokens(std::string(400, 'x')), 100u);
  EXPECT_EQ(estimate_tokens(std::string(401, 'x')), 101u);
  EXPECT_EQ(estimate_tokens(std::string_view("abc")), 1u);
  // Multi-byte characters count once.
  EXPECT_EQ(estimate_tokens(std::string_view("\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9")), 1u);
  DeploymentArtifact empty;
  EXPECT_EQ(estimate_tokens(empty), 0u);
}

TEST(Jaccard, MatchesSetOracle) {
  EXPECT_DOUBLE_EQ(jaccard({"a", "b", "c", "d"}, {"a", "b", "x", "y"}), 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(jaccard({"a"}, {"b"}), 0.0);
  EXPECT_DOUBLE_EQ(jaccard({"a", "b"}, {"b", "a"}), 1.0);
}

TEST(Jaccard, SymmetricAndOneIffEqual) {
  ObjectGenerator gen(77);
  for (int round = 0; round < 300; ++round) {
    std::vector<std::string> a, b;
    for (int i = gen.uniform(0, 6); i > 0; --i) a.push_back(gen.word());
    for (int i = gen.uniform(0, 6); i > 0; --i) b.push_back(gen.word());
    double ab = jaccard(a, b);
    EXPECT_DOUBLE_EQ(ab, jaccard(b, a));
    EXPECT_NEAR(ab, jaccard_oracle(a, b), 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    EXPECT_EQ(ab == 1.0, sa == sb);
  }
}

TEST(TemplateSimilarity, UntouchedInstanceScoresOne) {
  TemplateLibrary lib = TemplateLibrary::seed();
  IdAllocator ids;
  PromptObject obj = make_object(ids.issue(IdKind::Object), "t");
  obj.properties = instantiate_selective(*lib.find("trip-planner"), std::nullopt, ids);
  auto scores = template_similarity(obj, lib);
  ASSERT_FALSE(scores.empty());
  EXPECT_EQ(scores.front().template_id, "trip-planner");
  EXPECT_DOUBLE_EQ(scores.front().score, 1.0);
}

TEST(TemplateSimilarity, PartialOverlapUsesJaccard) {
  TemplateLibrary lib;
  Template t;
  t.id = "four";
  for (const char* n : {"A", "B", "C", "D"}) t.defaults.push_back({n, "", "", Tier::Normal});
  lib.add(t);
  IdAllocator ids;
  PromptObject obj = with_props("x", {{"a", ""}, {"b", ""}, {"y", ""}, {"z", ""}}, ids);
  auto scores = template_similarity(obj, lib);
  ASSERT_EQ(scores.size(), 1u);
  EXPECT_NEAR(scores[0].score, jaccard_oracle({"a", "b", "y", "z"}, {"a", "b", "c", "d"}), 1e-12);
  EXPECT_NEAR(scores[0].score, 1.0 / 3.0, 1e-12);
}

TEST(TemplateSimilarity, DisjointScoresZeroAndOrderIsStable) {
  IdAllocator ids;
  PromptObject obj = with_props("x", {{"qqq", ""}}, ids);
  auto scores = template_similarity(obj, TemplateLibrary::seed());
  for (const auto& s : scores) EXPECT_DOUBLE_EQ(s.score, 0.0);
  EXPECT_TRUE(std::is_sorted(scores.begin(), scores.end(),
                             [](const auto& a, const auto& b) { return a.template_id < b.template_id; }));
  EXPECT_THROW(template_similarity(obj, TemplateLibrary{}), Error);
}

TEST(SafetyRules, HorrorWithChildAudienceIsFlagged) {
  IdAllocator ids;
  PromptObject obj = with_props("Story", {{"Style", "horror"}, {"Audience", "children"}}, ids);
  auto flags = safety_scan_rules(obj, default_safety_blocklist());
  ASSERT_EQ(flags.size(), 1u);
  EXPECT_EQ(flags[0].prop_id, obj.properties[0].id);
  EXPECT_EQ(flags[0].source, "rule");
}

TEST(SafetyRules, NoAudienceNoFlags) {
  IdAllocator ids;
  PromptObject obj = with_props("Trip", {{"Destination", "Los Angeles"}, {"Style", "horror museum"}}, ids);
  EXPECT_TRUE(safety_scan_rules(obj, default_safety_blocklist()).empty());
}

TEST(SafetyRules, BlocklistFileIgnoresBlanksAndComments) {
  auto terms = parse_blocklist("# themes\nHorror\n\n  sorrow  \n");
  EXPECT_EQ(terms, (std::vector<std::string>{"horror", "sorrow"}));
}

TEST(StaticReport, MockTripReport) {
  MockAssistant mock;
  IdAllocator ids;
  PromptObject obj = trip(ids);
  auto artifact = render_nl(obj);
  auto r = build_static_report(mock, obj, TemplateLibrary::seed(), artifact, default_safety_blocklist());
  EXPECT_TRUE(r.structural_conflicts.empty());
  ASSERT_FALSE(r.template_similarity.empty());
  EXPECT_EQ(r.template_similarity.front().template_id, "trip-planner");
  EXPECT_EQ(r.token_estimate, estimate_tokens(artifact.text));
  EXPECT_TRUE(r.semantic_status.ran);
  ASSERT_TRUE(r.completeness_suggestions.has_value());
  bool pace = false;
  for (const auto& item : r.completeness_suggestions->items) pace = pace || item.addition.name == "Daily pace";
  EXPECT_TRUE(pace);
  for (const auto& s : r.template_similarity) {
    EXPECT_GE(s.score, 0.0);
    EXPECT_LE(s.score, 1.0);
  }
}

TEST(StaticReport, OfflineKeepsRuleTierAndMarksTheRestSkipped) {
  OfflineAssistant off;
  IdAllocator ids;
  PromptObject obj = with_props("Story", {{"Style", "horror"}, {"Audience", "children"}}, ids);
  auto r = build_static_report(off, obj, TemplateLibrary::seed(), render_nl(obj), default_safety_blocklist());
  EXPECT_FALSE(r.semantic_status.ran);
  EXPECT_FALSE(r.semantic_status.reason.empty());
  EXPECT_FALSE(r.safety_assistant_status.ran);
  EXPECT_FALSE(r.completeness_status.ran);
  EXPECT_EQ(r.safety_flags.size(), 1u);
  EXPECT_FALSE(r.template_similarity.empty());
  EXPECT_GT(r.token_estimate, 0u);
  Json j = to_json(r);
  EXPECT_EQ(j["semantic_conflicts"]["status"], "skipped");
  EXPECT_EQ(j["safety"]["assistant"]["status"], "skipped");
  EXPECT_EQ(j["completeness_suggestions"]["status"], "skipped");
  EXPECT_TRUE(j["completeness_suggestions"]["proposal"].is_null());
}

TEST(StaticReport, CitedIdsAlwaysResolve) {
  MockAssistant mock;
  ObjectGenerator gen(99);
  for (int round = 0; round < 60; ++round) {
    IdAllocator ids;
    PromptObject obj = gen.object(ids, 0, 6);
    if (gen.coin()) obj = add_property(obj, text_spec("Audience " + std::to_string(round), "children"), ids);
    if (gen.coin()) obj = add_property(obj, text_spec("Mood " + std::to_string(round), "horror and sorrow"), ids);
    auto r = build_static_report(mock, obj, TemplateLibrary::seed(), render_nl(obj), default_safety_blocklist());
    for (const auto& id : cited_property_ids(r)) EXPECT_NE(obj.find(id), nullptr) << id;
  }
}

TEST(RuleTier, IsAPureFunctionOfTheObject) {
  ObjectGenerator gen(5);
  for (int round = 0; round < 50; ++round) {
    IdAllocator ids;
    PromptObject obj = gen.object(ids, 0, 8);
    auto a = detect_structural_conflicts(obj);
    auto b = detect_structural_conflicts(PromptObject(obj));
    EXPECT_EQ(a, b);
    EXPECT_EQ(estimate_tokens(render_nl(obj)), estimate_tokens(render_nl(obj)));
  }
}
