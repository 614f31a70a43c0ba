#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "../support.hpp"
#include "ooprompt/codec.hpp"
#include "ooprompt/lifecycle.hpp"
#include "ooprompt/versioning.hpp"

using namespace ooprompt;
using namespace testing_support;

namespace {

struct Fixture {
  Workspace ws = Workspace::in_memory();
  MockAssistant mock;
  Lifecycle life{ws, mock};

  std::string create(const std::string& title = "Trip") {
    return life.create_object(title, {})["id"].get<std::string>();
  }
  PropertyPatch value_patch(const std::string& v) {
    PropertyPatch p;
    p.value = TextValue{v};
    return p;
  }
};

std::set<std::string> ids_of(const std::vector<Property>& ps) {
  std::set<std::string> out;
  for (const auto& p : ps) out.insert(p.id);
  return out;
}

}  // namespace

TEST(Snapshot, CreateGivesOneRecord) {
  Fixture f;
  auto id = f.create();
  EXPECT_EQ(f.ws.history(id).records().size(), 1u);
  EXPECT_EQ(f.ws.history(id).current_version(), 1);
}

TEST(Snapshot, FiveMutationsGiveContiguousOneToSix) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("Destination", "LA"));
  f.life.add_property(id, text_spec("Budget", "low"));
  f.life.update_property(id, "Budget", f.value_patch("medium"));
  f.life.remove_property(id, "Destination");
  ObjectPatch op;
  op.title = "Trip 2";
  f.life.edit_object(id, op);
  const auto& recs = f.ws.history(id).records();
  ASSERT_EQ(recs.size(), 6u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].version, static_cast<int>(i + 1));
    EXPECT_EQ(recs[i].snapshot.version, recs[i].version);
    if (i > 0) EXPECT_FALSE(recs[i].changelog.empty());
  }
  EXPECT_EQ(recs[1].changelog.rfind("add_property", 0), 0u);
}

TEST(Snapshot, StoredSnapshotsAreCopies) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("Destination", "LA"));
  PromptObject v2 = f.ws.history(id).at(2).snapshot;
  f.life.update_property(id, "Destination", f.value_patch("Paris"));
  EXPECT_EQ(f.ws.history(id).at(2).snapshot, v2);
  EXPECT_EQ(f.ws.object(id).properties[0].text(), "Paris");
}

TEST(HistoryAppend, RejectsGapsAndInvalidObjects) {
  History h;
  PromptObject obj = make_object("po-0001", "x");
  h.append(obj, "create", "t0");
  obj.version = 3;
  EXPECT_THROW(h.append(obj, "skip", "t1"), Error);
  obj.version = 2;
  obj.properties.push_back(make_property(text_spec("", "v"), "pr-0001"));
  EXPECT_THROW(h.append(obj, "bad", "t1"), Error);
  EXPECT_EQ(h.current_version(), 1);
}

TEST(Restore, EditThenRestoreV1) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("Destination", "LA"));
  Json out = f.life.restore(id, 1);
  const PromptObject& now = f.ws.object(id);
  EXPECT_EQ(now.version, 3);
  EXPECT_TRUE(same_content(now, f.ws.history(id).at(1).snapshot));
  EXPECT_EQ(object_from_json(out), now);
}

TEST(Restore, CurrentVersionKeepsContentAndBumpsVersion) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("Destination", "LA"));
  PromptObject before = f.ws.object(id);
  f.life.restore(id, 2);
  EXPECT_TRUE(same_content(f.ws.object(id), before));
  EXPECT_EQ(f.ws.object(id).version, before.version + 1);
}

TEST(Restore, UnknownVersionIsRejected) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("a", "1"));
  f.life.add_property(id, text_spec("b", "2"));
  try {
    f.life.restore(id, 99);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownVersion);
  }
  EXPECT_EQ(f.ws.history(id).current_version(), 3);
}

TEST(Restore, RestoringTwiceIsContentIdempotent) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("a", "1"));
  f.life.add_property(id, text_spec("b", "2"));
  f.life.restore(id, 2);
  PromptObject once = f.ws.object(id);
  f.life.restore(id, 2);
  EXPECT_TRUE(same_content(f.ws.object(id), once));
  EXPECT_EQ(f.ws.object(id).version, once.version + 1);
}

TEST(Diff, SameVersionIsEmpty) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("a", "1"));
  EXPECT_TRUE(diff_versions(f.ws.history(id), 2, 2).empty());
}

TEST(Diff, OneAddIsOneAddition) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("a", "1"));
  auto d = diff_versions(f.ws.history(id), 1, 2);
  ASSERT_EQ(d.added.size(), 1u);
  EXPECT_EQ(d.added[0].name, "a");
  EXPECT_TRUE(d.removed.empty());
  EXPECT_TRUE(d.changed.empty());
}

TEST(Diff, FieldLevelChangesAreListed) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("a", "1"));
  PropertyPatch p;
  p.value = TextValue{"2"};
  p.tier = Tier::HighlyWanted;
  f.life.update_property(id, "a", p);
  auto d = diff_versions(f.ws.history(id), 2, 3);
  ASSERT_EQ(d.changed.size(), 1u);
  std::set<std::string> fields;
  for (const auto& c : d.changed[0].fields) fields.insert(c.field);
  EXPECT_EQ(fields, (std::set<std::string>{"value", "tier"}));
  EXPECT_THROW(diff_versions(f.ws.history(id), 1, 9), Error);
}

// Property: additions of diff(a, b) are exactly the removals of diff(b, a), over
// random edit scripts.
TEST(DiffProperty, AntiSymmetricOverRandomScripts) {
  ObjectGenerator gen(31337);
  for (int round = 0; round < 40; ++round) {
    Fixture f;
    auto id = f.create("Random " + std::to_string(round));
    for (int step = 0; step < 12; ++step) {
      const PromptObject& cur = f.ws.object(id);
      int op = cur.properties.empty() ? 0 : gen.uniform(0, 3);
      if (op == 0) {
        f.life.add_property(id, gen.spec(cur));
      } else if (op == 1) {
        std::string pid = cur.properties[static_cast<std::size_t>(gen.uniform(0, static_cast<int>(cur.properties.size()) - 1))].id;
        f.life.remove_property(id, pid);
      } else {
        std::string pid = cur.properties[static_cast<std::size_t>(gen.uniform(0, static_cast<int>(cur.properties.size()) - 1))].id;
        PropertyPatch patch;
        patch.value = TextValue{gen.value()};
        patch.tier = gen.tier();
        try {
          f.life.update_property(id, pid, patch);
        } catch (const Error&) {
          // an invariant-violating patch is rejected and leaves no version behind
        }
      }
    }
    const History& h = f.ws.history(id);
    int n = h.current_version();
    for (int k = 0; k < 10; ++k) {
      int a = gen.uniform(1, n), b = gen.uniform(1, n);
      auto ab = diff_versions(h, a, b);
      auto ba = diff_versions(h, b, a);
      EXPECT_EQ(ids_of(ab.added), ids_of(ba.removed));
      EXPECT_EQ(ids_of(ab.removed), ids_of(ba.added));
      ASSERT_EQ(ab.changed.size(), ba.changed.size());
      for (const auto& c : ab.changed) {
        auto twin = std::find_if(ba.changed.begin(), ba.changed.end(),
                                 [&](const PropertyChange& o) { return o.prop_id == c.prop_id; });
        ASSERT_NE(twin, ba.changed.end());
        for (const auto& fc : c.fields) {
          auto back = std::find_if(twin->fields.begin(), twin->fields.end(),
                                   [&](const FieldChange& o) { return o.field == fc.field; });
          ASSERT_NE(back, twin->fields.end()) << fc.field;
          EXPECT_EQ(fc.before, back->after);
          EXPECT_EQ(fc.after, back->before);
        }
      }
      EXPECT_EQ(ab.empty(), ba.empty());
    }
  }
}

// Property: no operation ever rewrites or drops an existing record.
TEST(HistoryProperty, AppendOnlyUnderAllOperations) {
  ObjectGenerator gen(8);
  Fixture f;
  auto id = f.create();
  std::vector<Json> seen;
  for (int step = 0; step < 60; ++step) {
    const PromptObject& cur = f.ws.object(id);
    int op = gen.uniform(0, 2);
    if (op == 0 || cur.properties.empty()) {
      f.life.add_property(id, gen.spec(cur));
    } else if (op == 1) {
      f.life.restore(id, gen.uniform(1, f.ws.history(id).current_version()));
    } else {
      std::string pid = cur.properties.front().id;
      f.life.remove_property(id, pid);
    }
    const auto& recs = f.ws.history(id).records();
    ASSERT_GE(recs.size(), seen.size());
    for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(to_json(recs[i]), seen[i]);
    seen.clear();
    for (const auto& r : recs) seen.push_back(to_json(r));
  }
}

TEST(PropertyHistory, TwoEditsGiveThreeEntries) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("Tone", "calm"));
  f.life.update_property(id, "Tone", f.value_patch("warm"));
  f.life.update_property(id, "Tone", f.value_patch("bright"));
  auto h = property_history(f.ws.history(id), "tone");
  ASSERT_EQ(h.size(), 3u);
  EXPECT_EQ(std::get<TextValue>(h[0].value).text, "calm");
  EXPECT_EQ(std::get<TextValue>(h[2].value).text, "bright");
  EXPECT_EQ(h[0].version, 2);
  EXPECT_EQ(h[2].version, 4);
}

TEST(PropertyHistory, NeverEditedGivesOneEntry) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("Tone", "calm"));
  f.life.add_property(id, text_spec("Topic", "x"));
  EXPECT_EQ(property_history(f.ws.history(id), "Tone").size(), 1u);
}

TEST(PropertyHistory, IdenticalValuesCollapse) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("Tone", "calm"));
  PropertyPatch tier;
  tier.tier = Tier::Wanted;
  f.life.update_property(id, "Tone", tier);
  f.life.update_property(id, "Tone", f.value_patch("calm"));
  EXPECT_EQ(property_history(f.ws.history(id), "Tone").size(), 1u);
}

TEST(PropertyHistory, UnknownNameNeverExisted) {
  Fixture f;
  auto id = f.create();
  try {
    property_history(f.ws.history(id), "ghost");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NeverExisted);
  }
}

TEST(VersionRecordCodec, RoundTrips) {
  Fixture f;
  auto id = f.create();
  f.life.add_property(id, text_spec("Tone", "calm"));
  for (const auto& r : f.ws.history(id).records()) {
    EXPECT_EQ(to_json(record_from_json(Json::parse(to_json(r).dump()))), to_json(r));
  }
}
