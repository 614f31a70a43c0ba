#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>

#include "../support.hpp"
#include "ooprompt/codec.hpp"
#include "ooprompt/deployment.hpp"

using namespace ooprompt;
using namespace testing_support;

namespace {

PromptObject with_patch(const PromptObject& obj, std::size_t i, const PropertyPatch& patch) {
  return update_property(obj, obj.properties[i].id, patch);
}

PromptObject excluded(const PromptObject& obj, std::size_t i) {
  PropertyPatch p;
  p.polarity = Polarity::Exclude;
  return with_patch(obj, i, p);
}

PromptObject step(const PromptObject& obj, std::size_t i, int order) {
  PropertyPatch p;
  p.relation = Sequential{"plot", order};
  return with_patch(obj, i, p);
}

struct Store {
  std::map<std::string, PromptObject, std::less<>> objects;
  ObjectLookup lookup() const {
    return [this](std::string_view id) -> const PromptObject* {
      auto it = objects.find(id);
      return it == objects.end() ? nullptr : &it->second;
    };
  }
};

// Trip with a nested Schedule, as built in the walkthrough.
Store nested_trip(std::string& root_id) {
  IdAllocator ids;
  PromptObject trip = with_props("Trip to LA", {{"Destination", "Los Angeles"},
                                                {"Interests", "Local street food"},
                                                {"Schedule", "Three days"}},
                                 ids);
  auto nested = nest_child(trip, trip.properties[2].id, ids);
  PromptObject child = nested.child;
  child = add_property(child, text_spec("Day 1", "Beaches"), ids);
  child = add_property(child, text_spec("Day 2", "Museums"), ids);
  Store s;
  root_id = nested.parent.id;
  s.objects[nested.parent.id] = nested.parent;
  s.objects[child.id] = child;
  return s;
}

// Brute force: every selection as nested loops over text-valued properties, first
// property outermost.
std::vector<VariantSelection> all_selections(const PromptObject& obj) {
  std::vector<VariantSelection> out;
  VariantSelection cur(obj.properties.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == obj.properties.size()) {
      out.push_back(cur);
      return;
    }
    const Property& p = obj.properties[i];
    std::size_t options = p.is_text() ? 1 + p.candidates.size() : 1;
    for (std::size_t k = 0; k < options; ++k) {
      cur[i] = k;
      rec(i + 1);
    }
    cur[i] = 0;
  };
  rec(0);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto nl = text.find('\n', start);
    out.push_back(text.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  return out;
}

// True if some requirement line in `lines` (up to `end`) names property `p`.
bool mentions(const std::vector<std::string>& lines, std::size_t end, const Property& p) {
  for (std::size_t i = 0; i < end && i < lines.size(); ++i) {
    std::string l = lines[i];
    l.erase(0, l.find_first_not_of(' '));
    auto dash = l.find(' ');
    if (dash == std::string::npos) continue;
    std::string body = l.substr(dash + 1);
    if (body == p.name || body.rfind(p.name + ":", 0) == 0 || body.rfind(p.name + " (", 0) == 0) return true;
  }
  return false;
}

}  // namespace

TEST(RenderNl, EmptyObjectIsPreambleOnly) {
  PromptObject obj = make_object("po-0001", "Write a haiku");
  EXPECT_EQ(render_nl(obj).text, "Task: Write a haiku");
}

TEST(RenderNl, TripHasDestinationAndIndentedSchedule) {
  std::string root;
  Store s = nested_trip(root);
  std::string text = render_nl(s.objects[root], s.lookup()).text;
  EXPECT_NE(text.find("Los Angeles"), std::string::npos);
  auto sched = text.find("\n- Schedule:\n");
  ASSERT_NE(sched, std::string::npos) << text;
  EXPECT_GT(text.find("\n    - Day 1: Beaches\n    - Day 2: Museums"), sched) << text;
}

TEST(RenderNl, TierOrderExamplesAndEmphasis) {
  IdAllocator ids;
  PromptObject obj = with_props("Trip", {{"Budget", "low"}, {"Interests", "Local street food"}}, ids);
  PropertyPatch p;
  p.tier = Tier::HighlyWanted;
  p.examples = std::vector<std::string>{"taco trucks", "BBQ"};
  obj = with_patch(obj, 1, p);
  std::string plain = render_nl(obj).text;
  EXPECT_EQ(plain,
            "Task: Trip\n\nRequirements:\n- Interests: Local street food (for example: taco trucks, BBQ)\n"
            "- Budget: low");
  std::string loud = render_nl(obj, {}, RenderOptions{true}).text;
  EXPECT_NE(loud.find("- Interests: Local street food (very important, must be followed) (for example"),
            std::string::npos);
}

TEST(RenderNl, SequentialGroupsBecomeNumberedSteps) {
  IdAllocator ids;
  PromptObject obj = with_props("Story", {{"Ending", "home"}, {"Beginning", "a farm"}, {"Tone", "warm"}}, ids);
  obj = step(obj, 1, 1);
  obj = step(obj, 0, 2);
  EXPECT_EQ(render_nl(obj).text,
            "Task: Story\n\nRequirements:\n- Tone: warm\n\nSteps (plot):\n1. Beginning: a farm\n2. Ending: home");
}

TEST(RenderNl, ExcludedOnlyAfterMarker) {
  IdAllocator ids;
  PromptObject obj = with_props("Story", {{"Style", "whimsical"}, {"Avoid", "horror elements"}}, ids);
  obj = excluded(obj, 1);
  std::string text = render_nl(obj).text;
  auto marker = text.find(kExclusionMarker);
  ASSERT_NE(marker, std::string::npos);
  EXPECT_EQ(text.find("horror elements"), text.find("horror elements", marker));
  EXPECT_GT(text.find("horror elements"), marker);
}

TEST(RenderNl, CycleIsDetected) {
  IdAllocator ids;
  PromptObject a = with_props("a", {{"x", "1"}}, ids);
  auto na = nest_child(a, a.properties[0].id, ids);
  PromptObject child = na.child;
  child.properties.push_back(na.parent.properties[0]);  // points back at itself
  child.properties.back().value = ChildRef{child.id};
  Store s;
  s.objects[na.parent.id] = na.parent;
  s.objects[child.id] = child;
  try {
    render_nl(na.parent, s.lookup());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CycleDetected);
  }
}

TEST(RenderJson, DeterministicAndMinimalForEmpty) {
  PromptObject obj = make_object("po-0001", "Empty");
  auto a = render_json(obj).text;
  EXPECT_EQ(a, render_json(obj).text);
  Json j = Json::parse(a);
  EXPECT_TRUE(j["properties"].is_array());
  EXPECT_TRUE(j["properties"].empty());
}

TEST(RenderJson, ParseReconstructsObjectAndChildren) {
  std::string root;
  Store s = nested_trip(root);
  auto text = render_json(s.objects[root], s.lookup()).text;
  auto parsed = parse_rendered_json(text);
  EXPECT_EQ(parsed.root, s.objects[root]);
  ASSERT_EQ(parsed.children.size(), 1u);
  EXPECT_EQ(parsed.children[0], s.objects[parsed.children[0].id]);
}

TEST(RenderJson, RenderParseRenderIsAFixedPoint) {
  ObjectGenerator gen(12);
  for (int round = 0; round < 100; ++round) {
    IdAllocator ids;
    PromptObject obj = gen.object(ids, 0, 7);
    std::string once = render_json(obj).text;
    std::string twice = render_json(parse_rendered_json(once).root).text;
    EXPECT_EQ(once, twice);
  }
}

TEST(RenderHybrid, ThreePartsAndFenceEqualsJson) {
  ObjectGenerator gen(13);
  for (int round = 0; round < 50; ++round) {
    IdAllocator ids;
    PromptObject obj = gen.object(ids, 0, 6);
    std::string text = render_hybrid(obj).text;
    auto parts = split_hybrid(text);
    EXPECT_FALSE(parts.header.empty());
    EXPECT_FALSE(parts.json.empty());
    EXPECT_FALSE(parts.closing.empty());
    EXPECT_EQ(parts.json, render_json(obj).text);
    EXPECT_LT(text.find(parts.header), text.find(kFenceOpen));
  }
}

TEST(RenderHybrid, ClosingLeadsWithTheTopTier) {
  IdAllocator ids;
  PromptObject obj = with_props("Trip", {{"Budget", "low"}, {"Destination", "Los Angeles"}}, ids);
  PropertyPatch p;
  p.tier = Tier::HighlyWanted;
  obj = with_patch(obj, 1, p);
  auto parts = split_hybrid(render_hybrid(obj).text);
  EXPECT_EQ(parts.closing.rfind("\n\nMost important:\n- Destination: Los Angeles\n\n", 0), 0u) << parts.closing;
  EXPECT_EQ(parts.closing.find("Budget"), std::string::npos);
}

TEST(RenderHybrid, MalformedLayoutIsRejected) {
  EXPECT_THROW(split_hybrid("no fence here"), Error);
  EXPECT_THROW(split_hybrid(std::string("head\n") + std::string(kFenceOpen) + "{}"), Error);
}

// Property: excluded properties show up in NL only after the marker, and in hybrid
// only in the JSON body (marked exclude) and the closing exclusion block.
TEST(RenderProperty, ExclusionsStayInTheirSection) {
  ObjectGenerator gen(14);
  int checked = 0;
  for (int round = 0; round < 200; ++round) {
    IdAllocator ids;
    PromptObject obj = gen.object(ids, 1, 8);
    auto nl = lines_of(render_nl(obj).text);
    auto marker = std::find(nl.begin(), nl.end(), std::string(kExclusionMarker));
    std::size_t end = static_cast<std::size_t>(marker - nl.begin());

    auto parts = split_hybrid(render_hybrid(obj).text);
    auto closing = lines_of(parts.closing);
    auto cmarker = std::find(closing.begin(), closing.end(), std::string(kExclusionMarker));
    std::size_t cend = static_cast<std::size_t>(cmarker - closing.begin());

    for (const auto& p : obj.properties) {
      if (p.polarity != Polarity::Exclude) continue;
      ++checked;
      EXPECT_FALSE(mentions(nl, end, p)) << p.name;
      EXPECT_TRUE(mentions(nl, nl.size(), p)) << p.name;
      EXPECT_FALSE(mentions(lines_of(parts.header), SIZE_MAX, p)) << p.name;
      EXPECT_FALSE(mentions(closing, cend, p)) << p.name;
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(RenderProperty, SameContentSameBytes) {
  ObjectGenerator g1(15), g2(15);
  for (int round = 0; round < 50; ++round) {
    IdAllocator i1, i2;
    PromptObject a = g1.object(i1, 0, 6), b = g2.object(i2, 0, 6);
    for (auto f : {RenderFormat::NaturalLanguage, RenderFormat::Json, RenderFormat::Hybrid}) {
      EXPECT_EQ(render(a, f).text, render(b, f).text);
    }
  }
}

TEST(Variants, NoCandidatesGivesThePrimaryOnly) {
  IdAllocator ids;
  PromptObject obj = with_props("x", {{"a", "1"}, {"b", "2"}}, ids);
  auto v = enumerate_variants(obj);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].variant_key, "");
  EXPECT_EQ(v[0].text, render_nl(obj).text);
}

TEST(Variants, TwoAndThreeCandidatesCapAtEight) {
  IdAllocator ids;
  PromptObject obj = with_props("x", {{"a", "a0"}, {"b", "b0"}}, ids);
  PropertyPatch p;
  p.candidates = std::vector<std::string>{"a1", "a2"};
  obj = with_patch(obj, 0, p);
  p.candidates = std::vector<std::string>{"b1", "b2", "b3"};
  obj = with_patch(obj, 1, p);
  auto all = all_selections(obj);
  ASSERT_EQ(all.size(), 12u);
  auto sel = variant_selections(obj, 8);
  ASSERT_EQ(sel.size(), 8u);
  EXPECT_TRUE(std::equal(sel.begin(), sel.end(), all.begin()));
  auto arts = enumerate_variants(obj, 8);
  EXPECT_EQ(arts[1].variant_key, obj.properties[1].id + "=1");
  EXPECT_NE(arts[1].text.find("b: b1"), std::string::npos);
  EXPECT_EQ(enumerate_variants(obj, 1).size(), 1u);
}

TEST(VariantProperty, CountAndOrderMatchBruteForce) {
  ObjectGenerator gen(16);
  for (int round = 0; round < 100; ++round) {
    IdAllocator ids;
    PromptObject obj = gen.object(ids, 0, 5);
    std::size_t cap = static_cast<std::size_t>(gen.uniform(1, 40));
    auto all = all_selections(obj);
    std::size_t product = 1;
    for (const auto& p : obj.properties) product *= p.is_text() ? 1 + p.candidates.size() : 1;
    ASSERT_EQ(all.size(), product);
    auto sel = variant_selections(obj, cap);
    ASSERT_EQ(sel.size(), std::min(cap, product));
    EXPECT_TRUE(std::equal(sel.begin(), sel.end(), all.begin()));
  }
}

TEST(Chain, StoryStepsEachCarryTheTone) {
  IdAllocator ids;
  PromptObject obj =
      with_props("Story", {{"Beginning", "a farm"}, {"Events", "a storm"}, {"Ending", "home"}, {"Tone", "warm"}}, ids);
  obj = step(obj, 0, 1);
  obj = step(obj, 1, 2);
  obj = step(obj, 2, 3);
  auto chain = decompose_sequential_chain(obj);
  ASSERT_EQ(chain.size(), 3u);
  const char* expected[] = {"Beginning", "Events", "Ending"};
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NE(chain[k].find_by_name("Tone"), nullptr);
    EXPECT_NE(chain[k].find_by_name(expected[k]), nullptr);
    EXPECT_EQ(chain[k].properties.size(), 2u);
  }
}

TEST(Chain, FullyParallelIsRejected) {
  IdAllocator ids;
  PromptObject obj = with_props("x", {{"a", "1"}}, ids);
  try {
    decompose_sequential_chain(obj);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoSequentialGroup);
  }
}

TEST(ChainProperty, StepPropertiesPartitionTheSequentialOnes) {
  ObjectGenerator gen(17);
  int checked = 0;
  for (int round = 0; round < 200; ++round) {
    IdAllocator ids;
    PromptObject obj = gen.object(ids, 2, 7);
    std::multiset<std::string> seq, parallel;
    for (const auto& p : obj.properties) (p.is_sequential() ? seq : parallel).insert(p.id);
    if (seq.empty()) continue;
    ++checked;
    std::multiset<std::string> from_chain;
    for (const auto& s : decompose_sequential_chain(obj)) {
      std::multiset<std::string> ctx;
      for (const auto& p : s.properties) (p.is_sequential() ? from_chain : ctx).insert(p.id);
      EXPECT_EQ(ctx, parallel);
    }
    EXPECT_EQ(from_chain, seq);
  }
  EXPECT_GT(checked, 20);
}

TEST(ArtifactCodec, RoundTrips) {
  IdAllocator ids;
  PromptObject obj = with_props("x", {{"a", "1"}}, ids);
  auto a = render_hybrid(obj);
  auto b = artifact_from_json(Json::parse(to_json(a).dump()));
  EXPECT_EQ(to_json(a), to_json(b));
}
