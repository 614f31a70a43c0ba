#include <cmath>
#include <sstream>

#include "harness.hpp"
#include "ooprompt/analysis.hpp"
#include "ooprompt/deployment.hpp"

namespace acceptance {

namespace {

using namespace ooprompt;

std::size_t whitespace_tokens(const std::string& text) {
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

struct JaccardCase {
  std::vector<std::string> a, b;
  double expected;  // worked out by hand: |A ∩ B| / |A ∪ B| over distinct elements
};

const std::vector<JaccardCase> kJaccard = {
    {{}, {}, 1.0},
    {{"tone"}, {}, 0.0},
    {{"tone"}, {"tone"}, 1.0},
    {{"tone"}, {"style"}, 0.0},
    {{"tone", "style"}, {"tone"}, 1.0 / 2.0},
    {{"tone", "style", "length"}, {"style", "length", "budget"}, 2.0 / 4.0},
    {{"a", "b", "c", "d"}, {"c", "d", "e", "f"}, 2.0 / 6.0},
    {{"a", "b", "c"}, {"a", "b", "c", "d", "e", "f", "g"}, 3.0 / 7.0},
    {{"a", "a", "b"}, {"a", "b", "b"}, 1.0},
    {{"destination", "duration", "interests", "schedule", "budget"}, {"destination", "budget"}, 2.0 / 5.0},
    {{"x", "y", "z"}, {"z", "y", "x"}, 1.0},
    {{"one", "two", "three", "four", "five"}, {"five", "six"}, 1.0 / 6.0},
    {{"p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8", "p9"}, {"p9"}, 1.0 / 9.0},
    {{"alpha", "beta"}, {"gamma", "delta", "alpha"}, 1.0 / 4.0},
    {{"a", "b", "c", "d", "e", "f"}, {"d", "e", "f", "g", "h", "i"}, 3.0 / 9.0},
    {{"m", "n", "o"}, {"o", "p", "q", "r", "s", "t", "u"}, 1.0 / 9.0},
    {{"k1", "k2", "k3", "k4", "k5", "k6", "k7"}, {"k2", "k4", "k6", "k8", "k10"}, 3.0 / 9.0},
    {{"tone", "Tone"}, {"tone"}, 1.0 / 2.0},
    {{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k"}, {"a", "c", "e", "g", "i", "k", "m"}, 6.0 / 12.0},
    {{"audience", "length", "format"}, {"output type", "topic", "audience", "tone", "narration style", "length"}, 2.0 / 7.0},
};

}  // namespace

ACCEPTANCE_CRITERION(7, token_and_jaccard,
                     "Token estimate within 25% of a whitespace count; Jaccard equals hand-computed values to 1e-9") {
  constexpr double kTokenTolerance = 0.25;
  constexpr double kJaccardTolerance = 1e-9;

  std::size_t artifacts = 0, within = 0;
  double worst = 1.0;
  std::string worst_at;
  std::map<std::string, std::pair<double, int>> ratio_by_format;
  for (const auto& c : corpus()) {
    Workspace ws = Workspace::open(c.root);
    for (const PromptObject* obj : ws.objects()) {
      for (RenderFormat f : {RenderFormat::NaturalLanguage, RenderFormat::Json, RenderFormat::Hybrid}) {
        DeploymentArtifact a = render(*obj, f, ws.lookup());
        double oracle = static_cast<double>(whitespace_tokens(a.text));
        double estimate = static_cast<double>(estimate_tokens(a));
        double ratio = estimate / oracle;
        ++artifacts;
        if (std::abs(estimate - oracle) <= kTokenTolerance * oracle) ++within;
        auto& [sum, n] = ratio_by_format[std::string(to_string(f))];
        sum += ratio;
        ++n;
        if (std::abs(ratio - 1.0) > std::abs(worst - 1.0)) {
          worst = ratio;
          worst_at = c.name + "/" + obj->id + " " + std::string(to_string(f));
        }
      }
    }
  }
  bool tokens_ok = within == artifacts;

  std::size_t jaccard_ok = 0;
  for (const auto& jc : kJaccard) {
    if (std::abs(jaccard(jc.a, jc.b) - jc.expected) <= kJaccardTolerance &&
        std::abs(jaccard(jc.b, jc.a) - jc.expected) <= kJaccardTolerance) {
      ++jaccard_ok;
    }
  }
  bool jaccard_pass = jaccard_ok == kJaccard.size();

  std::ostringstream detail;
  detail.precision(2);
  detail << std::fixed << "tokens: " << within << "/" << artifacts << " artifacts within 25%, mean estimate/oracle";
  for (const auto& [format, acc] : ratio_by_format) detail << " " << format << "=" << acc.first / acc.second;
  detail << ", worst " << worst << " at " << worst_at << "; jaccard: " << jaccard_ok << "/" << kJaccard.size();
  // The chars/4 heuristic counts about 1.5x the words of English prose and far more
  // for indented JSON, so the token half cannot hold (docs/acceptance.md).
  return {tokens_ok && jaccard_pass, detail.str(), !tokens_ok && jaccard_pass};
}

}  // namespace acceptance
