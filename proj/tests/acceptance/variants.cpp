#include "../support.hpp"
#include "harness.hpp"
#include "ooprompt/deployment.hpp"

namespace acceptance {

namespace {

using namespace ooprompt;

// Every selection vector in lexicographic order (first property most significant).
void brute_force(const PromptObject& obj, std::size_t i, VariantSelection& current, std::vector<VariantSelection>& out) {
  if (i == obj.properties.size()) {
    out.push_back(current);
    return;
  }
  const Property& p = obj.properties[i];
  std::size_t choices = p.is_text() ? 1 + p.candidates.size() : 1;
  for (std::size_t k = 0; k < choices; ++k) {
    current[i] = k;
    brute_force(obj, i + 1, current, out);
  }
  current[i] = 0;
}

std::string expected_key(const PromptObject& obj, const VariantSelection& sel) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < sel.size(); ++i) {
    if (sel[i] > 0) parts.push_back(obj.properties[i].id + "=" + std::to_string(sel[i]));
  }
  std::string key;
  for (std::size_t i = 0; i < parts.size(); ++i) key += (i ? ";" : "") + parts[i];
  return key;
}

}  // namespace

ACCEPTANCE_CRITERION(5, variant_enumeration, "Variant count and order match a brute-force oracle on 100 objects") {
  constexpr int kObjects = 100;
  testing_support::ObjectGenerator gen(99);
  std::size_t largest = 0, capped = 0;
  for (int round = 0; round < kObjects; ++round) {
    IdAllocator ids;
    PromptObject obj = gen.object(ids, 0, 6);
    // Bias toward candidates so most objects have several variants.
    for (auto& p : obj.properties) {
      if (p.candidates.empty() && gen.coin(0.5)) {
        for (int k = gen.uniform(1, 3); k > 0; --k) p.candidates.push_back(gen.value() + " alt " + std::to_string(k));
      }
    }
    std::vector<VariantSelection> all;
    VariantSelection scratch(obj.properties.size(), 0);
    brute_force(obj, 0, scratch, all);
    largest = std::max(largest, all.size());

    std::size_t cap = static_cast<std::size_t>(gen.coin(0.3) ? gen.uniform(0, 4) : gen.uniform(1, 400));
    std::size_t expected = std::min(cap, all.size());
    if (expected < all.size()) ++capped;

    auto selections = variant_selections(obj, cap);
    if (selections.size() != expected) {
      return {false, "object " + std::to_string(round) + ": " + std::to_string(selections.size()) + " variants, want " +
                         std::to_string(expected)};
    }
    if (!std::equal(selections.begin(), selections.end(), all.begin())) {
      return {false, "object " + std::to_string(round) + ": order differs from the oracle"};
    }
    auto artifacts = enumerate_variants(obj, cap);
    auto again = enumerate_variants(obj, cap);
    if (artifacts.size() != expected) return {false, "object " + std::to_string(round) + ": artifact count differs"};
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
      if (artifacts[i].variant_key != expected_key(obj, all[i])) {
        return {false, "object " + std::to_string(round) + ": variant key " + artifacts[i].variant_key};
      }
      if (artifacts[i].text != again[i].text || artifacts[i].variant_key != again[i].variant_key) {
        return {false, "object " + std::to_string(round) + ": enumeration is not stable"};
      }
      for (std::size_t p = 0; p < obj.properties.size(); ++p) {
        const Property& prop = obj.properties[p];
        if (all[i][p] > 0 && artifacts[i].text.find(prop.candidates[all[i][p] - 1]) == std::string::npos) {
          return {false, "object " + std::to_string(round) + ": selected candidate missing from the render"};
        }
      }
    }
  }
  return {true, std::to_string(kObjects) + " objects, up to " + std::to_string(largest) + " combinations, " +
                    std::to_string(capped) + " capped"};
}

}  // namespace acceptance
