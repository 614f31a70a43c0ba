#include "../support.hpp"
#include "harness.hpp"
#include "ooprompt/lifecycle.hpp"

namespace acceptance {

namespace {

using namespace ooprompt;

struct ScriptState {
  Workspace ws = Workspace::in_memory();
  MockAssistant mock;
  Lifecycle life{ws, mock};
  std::map<std::string, std::vector<PromptObject>> seen;  // snapshots observed so far
};

const Property& pick_property(testing_support::ObjectGenerator& gen, const PromptObject& obj) {
  return obj.properties[static_cast<std::size_t>(gen.uniform(0, static_cast<int>(obj.properties.size()) - 1))];
}

// One random lifecycle operation. Rejected operations are fine as long as they leave
// nothing behind, which the caller checks.
void random_step(testing_support::ObjectGenerator& gen, ScriptState& s) {
  auto live = s.ws.objects();
  const PromptObject& obj = *live[static_cast<std::size_t>(gen.uniform(0, static_cast<int>(live.size()) - 1))];
  const std::string id = obj.id;
  int op = obj.properties.empty() ? 0 : gen.uniform(0, 8);
  switch (op) {
    case 0:
    case 1:
      s.life.add_property(id, gen.spec(obj), obj.version);
      return;
    case 2: {
      const std::string pid = pick_property(gen, obj).id;
      PropertyPatch p;
      if (gen.coin()) p.tier = gen.tier();
      if (gen.coin() && !obj.find(pid)->is_child()) p.value = TextValue{gen.value()};
      if (gen.coin(0.2)) p.polarity = gen.coin() ? Polarity::Include : Polarity::Exclude;
      if (gen.coin(0.2)) p.name = gen.fresh_name(obj);
      s.life.update_property(id, pid, p, obj.version);
      return;
    }
    case 3:
      s.life.remove_property(id, pick_property(gen, obj).id, obj.version);
      return;
    case 4: {
      std::vector<std::string> order;
      for (const auto& p : obj.properties) order.push_back(p.id);
      std::shuffle(order.begin(), order.end(), gen.rng());
      s.life.reorder(id, order, obj.version);
      return;
    }
    case 5:
      s.life.nest(id, pick_property(gen, obj).id, obj.version);
      return;
    case 6:
      s.life.promote(id, pick_property(gen, obj).id, obj.version);
      return;
    case 7: {
      ObjectPatch p;
      p.title = "Edited " + gen.word();
      if (gen.coin()) p.notes = gen.value();
      s.life.edit_object(id, p, obj.version);
      return;
    }
    default:
      s.life.restore(id, gen.uniform(1, obj.version), obj.version);
      return;
  }
}

// Empty when every invariant holds; otherwise the first broken one.
std::string check_invariants(ScriptState& s) {
  const ObjectLookup lookup = s.ws.lookup();
  for (const PromptObject* obj : s.ws.objects()) {
    auto violations = validate_object(*obj, lookup);
    if (!violations.empty()) return obj->id + " invalid: " + violations.front().detail;
  }
  for (auto& [id, seen] : s.seen) {
    const auto& records = s.ws.history(id).records();
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].version != static_cast<int>(i) + 1) return id + " history not contiguous";
      if (records[i].snapshot.version != records[i].version) return id + " snapshot version mismatch";
    }
    if (records.size() < seen.size()) return id + " history shrank";
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!(records[i].snapshot == seen[i])) return id + " snapshot v" + std::to_string(i + 1) + " changed";
    }
    if (const PromptObject* live = s.ws.find_object(id); live && !(records.back().snapshot == *live)) {
      return id + " live object differs from its latest snapshot";
    }
    for (std::size_t i = seen.size(); i < records.size(); ++i) seen.push_back(records[i].snapshot);
  }
  return {};
}

void track_new_objects(ScriptState& s) {
  for (const PromptObject* obj : s.ws.objects()) s.seen.try_emplace(obj->id);
}

}  // namespace

ACCEPTANCE_CRITERION(2, model_invariants, "1000 random edit scripts keep every model invariant in < 60 s") {
  constexpr int kScripts = 1000;
  constexpr int kStepsPerScript = 16;
  constexpr double kMaxSeconds = 60.0;
  testing_support::ObjectGenerator gen(20240501);
  auto start = std::chrono::steady_clock::now();
  long steps = 0, rejected = 0, restores = 0;

  for (int script = 0; script < kScripts; ++script) {
    ScriptState s;
    std::string root = s.life.create_object("Script " + std::to_string(script), {})["id"].get<std::string>();
    for (int n = gen.uniform(0, 4); n > 0; --n) s.life.add_property(root, gen.spec(s.ws.object(root)));
    track_new_objects(s);
    for (int step = 0; step < kStepsPerScript; ++step) {
      std::map<std::string, int> before;
      for (const PromptObject* obj : s.ws.objects()) before[obj->id] = obj->version;
      try {
        random_step(gen, s);
      } catch (const Error&) {
        ++rejected;
        for (const PromptObject* obj : s.ws.objects()) {
          if (!before.count(obj->id) || before[obj->id] != obj->version) {
            return {false, "rejected operation changed " + obj->id + " in script " + std::to_string(script)};
          }
        }
      }
      ++steps;
      track_new_objects(s);
      if (auto broken = check_invariants(s); !broken.empty()) {
        return {false, "script " + std::to_string(script) + " step " + std::to_string(step) + ": " + broken};
      }
    }
    // restore(v) deep-equals snapshot v, for a random v of every live object.
    for (const PromptObject* obj : s.ws.objects()) {
      const std::string id = obj->id;
      int v = gen.uniform(1, obj->version);
      PromptObject snapshot = s.ws.history(id).at(v).snapshot;
      try {
        s.life.restore(id, v);
      } catch (const Error& e) {
        // A restored child reference must still resolve; that is the only legal refusal.
        if (e.code() != ErrorCode::InvariantViolation) throw;
        continue;
      }
      ++restores;
      if (!same_content(s.ws.object(id), snapshot)) {
        return {false, "restore(" + std::to_string(v) + ") of " + id + " differs from its snapshot"};
      }
    }
    track_new_objects(s);
    if (auto broken = check_invariants(s); !broken.empty()) return {false, "after restores: " + broken};
  }
  double elapsed = seconds_since(start);
  std::string detail = std::to_string(kScripts) + " scripts, " + std::to_string(steps) + " steps (" +
                       std::to_string(rejected) + " rejected), " + std::to_string(restores) + " restores checked, " +
                       std::to_string(elapsed).substr(0, 5) + " s";
  return {elapsed < kMaxSeconds, detail};
}

}  // namespace acceptance
