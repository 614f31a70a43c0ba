#include "ooprompt/gateway.hpp"

namespace ooprompt {

// Fixtures for the reference walkthroughs. Spans are byte ranges into the raw text.
const std::vector<SeedFixture>& seed_fixtures() {
  static const std::vector<SeedFixture> seeds = [] {
    std::vector<SeedFixture> s;
    s.push_back({AssistantRole::Extractor,
                 Json{{"text", "Plan a trip to Los Angeles"}},
                 Json::parse(R"({"properties": [
                   {"name": "Output type", "value": "Trip plan", "span": [0, 11]},
                   {"name": "Destination", "value": "Los Angeles", "span": [15, 26]}]})")});
    s.push_back({AssistantRole::Extractor,
                 Json{{"text", "write a short story about animals"}},
                 Json::parse(R"({"properties": [
                   {"name": "Output type", "value": "short story", "span": [8, 19]},
                   {"name": "Topic", "value": "animal", "span": [26, 32]}]})")});
    s.push_back({AssistantRole::ExampleGenerator,
                 Json{{"property", {{"name", "Interests"}, {"value", "Local street food"}}},
                      {"existing", Json::array()}},
                 Json{{"examples", Json::array({"taco trucks", "BBQ"})}}});
    s.push_back({AssistantRole::CandidateGenerator,
                 Json{{"property", {{"name", "Destination"}, {"value", "Los Angeles"}}},
                      {"existing", Json::array()}},
                 Json{{"candidates",
                       Json::array({"LA, California", "the City of Los Angeles", "Greater Los Angeles area"})}}});
    return s;
  }();
  return seeds;
}

}  // namespace ooprompt
