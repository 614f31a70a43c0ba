#include "mock_heuristics.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

namespace ooprompt::mock {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::set<std::string> words(const std::string& s) {
  std::set<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.insert(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

bool any_of_words(const std::set<std::string>& ws, std::initializer_list<const char*> list) {
  for (const char* w : list) {
    if (ws.count(w)) return true;
  }
  return false;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n.,;!?");
  return s.substr(b, e - b + 1);
}

Json span(std::size_t b, std::size_t e) { return Json::array({b, e}); }

Json extract(const std::string& text) {
  Json props = Json::array();
  const std::string l = lower(text);
  if (auto at = l.find("trip to "); at != std::string::npos) {
    std::size_t b = at + 8;
    std::size_t e = l.find_first_of(".,;!?\n", b);
    if (e == std::string::npos) e = l.size();
    while (e > b && std::isspace(static_cast<unsigned char>(l[e - 1]))) --e;
    auto plan = l.find("plan a trip");
    if (plan != std::string::npos) {
      props.push_back({{"name", "Output type"}, {"value", "Trip plan"}, {"span", span(plan, plan + 11)}});
    } else {
      props.push_back({{"name", "Output type"}, {"value", "Trip plan"}, {"span", span(at, at + 4)}});
    }
    props.push_back({{"name", "Destination"}, {"value", text.substr(b, e - b)}, {"span", span(b, e)}});
    return Json{{"properties", props}};
  }
  std::smatch m;
  static const std::regex write_about(R"(write (an?|the) (.+?) about (.+?)[.!?]?$)", std::regex::icase);
  if (std::regex_search(text, m, write_about)) {
    auto ob = static_cast<std::size_t>(m.position(2));
    auto tb = static_cast<std::size_t>(m.position(3));
    props.push_back({{"name", "Output type"}, {"value", m.str(2)}, {"span", span(ob, ob + m.length(2))}});
    props.push_back({{"name", "Topic"}, {"value", m.str(3)}, {"span", span(tb, tb + m.length(3))}});
    return Json{{"properties", props}};
  }
  props.push_back({{"name", "Task"}, {"value", trim(text)}, {"span", span(0, text.size())}});
  return Json{{"properties", props}};
}

std::string object_text(const Json& object) {
  std::string s = object.value("title", "") + " " + object.value("notes", "");
  for (const auto& p : object.at("properties")) {
    s += " " + p.value("name", "") + " " + p.value("value", "");
  }
  return lower(s);
}

Json suggestion(const char* name, const char* rationale) {
  return Json{{"name", name}, {"value", ""}, {"rationale", rationale}};
}

Json suggest_implicit(const Json& object) {
  auto ws = words(object_text(object));
  Json out = Json::array();
  if (any_of_words(ws, {"trip", "travel", "destination", "itinerary", "vacation"})) {
    out.push_back(suggestion("Daily pace", "How packed each day should be changes the whole plan."));
    out.push_back(suggestion("Budget", "Spending limits decide lodging, food and activities."));
    out.push_back(suggestion("Travel dates", "Season and length of stay constrain what is possible."));
  } else if (any_of_words(ws, {"story", "tale", "narrative", "fiction", "novel"})) {
    out.push_back(suggestion("Audience", "Who will read or hear the story shapes vocabulary and themes."));
    out.push_back(suggestion("Occasion", "A bedtime story and a contest entry call for different stories."));
    out.push_back(suggestion("Length", "Target length bounds how much plot fits."));
  } else if (any_of_words(ws, {"code", "program", "function", "script", "api"})) {
    out.push_back(suggestion("Programming language", "Generated code depends on the target language."));
    out.push_back(suggestion("Error handling", "State how failures should be reported."));
    out.push_back(suggestion("Test cases", "Examples of expected input and output pin down behavior."));
  } else if (any_of_words(ws, {"report", "summary", "findings"})) {
    out.push_back(suggestion("Audience", "Technical depth depends on who reads the report."));
    out.push_back(suggestion("Key findings", "Name the results that must be covered."));
    out.push_back(suggestion("Format", "Sections, bullet points or prose."));
  } else {
    out.push_back(suggestion("Audience", "Who the output is for shapes tone and detail."));
    out.push_back(suggestion("Length", "A target length avoids overly long or short answers."));
    out.push_back(suggestion("Format", "Say how the output should be structured."));
  }
  return Json{{"suggestions", out}};
}

int step_rank(const std::string& name) {
  auto ws = words(name);
  if (any_of_words(ws, {"beginning", "opening", "introduction", "intro", "start", "setup"})) return 1;
  if (any_of_words(ws, {"events", "middle", "body", "development"})) return 2;
  if (any_of_words(ws, {"ending", "end", "conclusion", "resolution", "finale"})) return 3;
  static const std::regex numbered(R"((step|day|part|stage|phase)\s*(\d+))", std::regex::icase);
  std::smatch m;
  if (std::regex_search(name, m, numbered)) return std::stoi(m.str(2));
  return 0;
}

Json detect_relations(const Json& object) {
  std::vector<std::pair<int, std::string>> ranked;
  for (const auto& p : object.at("properties")) {
    std::string name = p.value("name", "");
    if (int r = step_rank(name); r > 0) ranked.emplace_back(r, name);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::set<int> distinct;
  for (const auto& [r, _] : ranked) distinct.insert(r);
  Json groups = Json::array();
  if (distinct.size() >= 2) {
    Json members = Json::array();
    for (const auto& [_, name] : ranked) members.push_back(name);
    groups.push_back({{"group", "steps"}, {"members", members}});
  }
  return Json{{"groups", groups}};
}

struct PropWords {
  std::string name;
  std::set<std::string> name_words;
  std::set<std::string> all_words;
};

std::vector<PropWords> included(const Json& object) {
  std::vector<PropWords> out;
  for (const auto& p : object.at("properties")) {
    if (p.value("polarity", "include") == "exclude") continue;
    std::string name = p.value("name", "");
    out.push_back({name, words(name), words(name + " " + p.value("value", ""))});
  }
  return out;
}

bool cheerful(const PropWords& p) {
  return any_of_words(p.all_words, {"happy", "humorous", "cheerful", "funny", "lighthearted", "joyful"});
}

bool grim(const PropWords& p) {
  if (any_of_words(p.all_words, {"tragic", "bleak", "sad", "depressing", "unhappy", "grim"})) return true;
  return p.name_words.count("ending") && p.all_words.count("bad");
}

bool dark(const PropWords& p) {
  return any_of_words(p.all_words,
                      {"horror", "gore", "gory", "sorrow", "violent", "violence", "scary", "terrifying", "dark"});
}

bool for_kids(const PropWords& p) {
  return any_of_words(p.all_words, {"child", "children", "kid", "kids", "toddler", "toddlers"});
}

Json check_conflicts(const Json& object) {
  auto props = included(object);
  Json conflicts = Json::array();
  for (std::size_t i = 0; i < props.size(); ++i) {
    for (std::size_t j = i + 1; j < props.size(); ++j) {
      const auto& a = props[i];
      const auto& b = props[j];
      if ((cheerful(a) && !grim(a) && grim(b) && !cheerful(b)) ||
          (grim(a) && !cheerful(a) && cheerful(b) && !grim(b))) {
        conflicts.push_back({{"properties", Json::array({a.name, b.name})},
                             {"explanation", "A light, happy tone clashes with a bad or sad ending."},
                             {"suggested_fix", "Either soften the ending or adjust the tone to match it."}});
      } else if ((dark(a) && !for_kids(a) && for_kids(b) && !dark(b)) ||
                 (for_kids(a) && !dark(a) && dark(b) && !for_kids(b))) {
        conflicts.push_back({{"properties", Json::array({a.name, b.name})},
                             {"explanation", "Dark or frightening themes are unsuitable for a young audience."},
                             {"suggested_fix", "Replace the dark theme with an age-appropriate one or change the audience."}});
      }
    }
  }
  return Json{{"conflicts", conflicts}};
}

Json safety(const Json& object) {
  Json flags = Json::array();
  for (const auto& p : included(object)) {
    if (any_of_words(p.all_words, {"explicit", "nsfw", "weapon", "weapons", "drugs", "toxic", "hateful"})) {
      flags.push_back({{"property", p.name},
                       {"category", "sensitive_content"},
                       {"explanation", "The property asks for potentially explicit, harmful or toxic content."}});
    }
  }
  return Json{{"flags", flags}};
}

Json integrate_feedback(const Json& input) {
  const std::string feedback = input.at("feedback").get<std::string>();
  const std::string f = lower(feedback);
  const Json& object = input.at("object");
  Json additions = Json::array(), updates = Json::array(), removals = Json::array();
  auto result = [&] {
    return Json{{"additions", additions}, {"updates", updates}, {"removals", removals}};
  };
  const std::string rationale = "Requested in feedback: \"" + feedback + "\"";
  if (f.find("no change") != std::string::npos) return result();

  auto find = [&](const char* name) -> const Json* {
    for (const auto& p : object.at("properties")) {
      if (lower(p.value("name", "")) == name) return &p;
    }
    return nullptr;
  };
  auto fw = words(f);
  if (any_of_words(fw, {"child", "children", "kid", "kids"})) {
    constexpr const char* kTone = "Gentle, cheerful and age-appropriate";
    if (const Json* tone = find("tone"); tone && tone->value("value", "") != kTone) {
      updates.push_back({{"name", tone->at("name")}, {"value", kTone}, {"rationale", rationale}});
    }
    if (const Json* aud = find("audience")) {
      if (aud->value("value", "") != "Children") {
        updates.push_back({{"name", aud->at("name")}, {"value", "Children"}, {"rationale", rationale}});
      }
    } else {
      additions.push_back({{"name", "Audience"}, {"value", "Children"}, {"rationale", rationale}});
    }
    return result();
  }
  if (any_of_words(fw, {"vague", "specific", "vagueness", "detail", "details", "concrete"})) {
    constexpr const char* kSuffix = " (be concrete and specific)";
    for (const auto& p : object.at("properties")) {
      std::string name = p.value("name", "");
      std::string value = p.value("value", "");
      if (name.empty() || f.find(lower(name)) == std::string::npos) continue;
      if (value.size() >= std::char_traits<char>::length(kSuffix) &&
          value.compare(value.size() - std::char_traits<char>::length(kSuffix), std::string::npos, kSuffix) == 0) {
        continue;
      }
      updates.push_back({{"name", name}, {"value", value + kSuffix}, {"rationale", rationale}});
    }
    return result();
  }
  if (any_of_words(fw, {"shorter", "concise", "brief"})) {
    if (const Json* len = find("length")) {
      if (len->value("value", "") != "Short") {
        updates.push_back({{"name", len->at("name")}, {"value", "Short"}, {"rationale", rationale}});
      }
    } else {
      additions.push_back({{"name", "Length"}, {"value", "Short"}, {"rationale", rationale}});
    }
    return result();
  }
  const Json* extra = find("additional guidance");
  if (!extra) {
    additions.push_back({{"name", "Additional guidance"}, {"value", feedback}, {"rationale", rationale}});
  } else if (extra->value("value", "") != feedback) {
    updates.push_back({{"name", extra->at("name")}, {"value", feedback}, {"rationale", rationale}});
  }
  return result();
}

std::string first_line(const std::string& s) {
  auto nl = s.find('\n');
  return s.substr(0, nl);
}

Json judge(const Json& input, const std::string& digest) {
  unsigned long bits = std::stoul(digest.substr(0, 8), nullptr, 16);
  double score = static_cast<double>(bits % 1001) / 1000.0;
  const Json& criterion = input.at("criterion");
  std::string desc = criterion.at("description").get<std::string>();
  Json out;
  out["score"] = score;
  out["justification"] = "Scored against '" + desc + "' by the mock judge (ref " + digest.substr(0, 8) + ").";
  out["suggestion"] = score < 0.5 ? "Output is weak on " + desc + "; make the related properties more specific." : "";
  return out;
}

}  // namespace

Json fallback_output(AssistantRole role, const Json& input, const std::string& digest) {
  switch (role) {
    case AssistantRole::Extractor:
      return extract(input.at("text").get<std::string>());
    case AssistantRole::ImplicitSuggester:
      return suggest_implicit(input.at("object"));
    case AssistantRole::RelationDetector:
      return detect_relations(input.at("object"));
    case AssistantRole::CandidateGenerator: {
      std::string v = input.at("property").at("value").get<std::string>();
      if (v.empty()) return Json{{"candidates", Json::array()}};
      return Json{{"candidates", Json::array({"Roughly: " + v, "More specifically, " + v,
                                              "Something along the lines of " + v})}};
    }
    case AssistantRole::ExampleGenerator: {
      std::string v = input.at("property").at("value").get<std::string>();
      if (v.empty()) return Json{{"examples", Json::array()}};
      return Json{{"examples", Json::array({"A well-known example of " + v, "A lesser-known example of " + v})}};
    }
    case AssistantRole::ConflictChecker:
      return check_conflicts(input.at("object"));
    case AssistantRole::Refiner:
      return Json{{"refinements", Json::array()}};
    case AssistantRole::SafetyChecker:
      return safety(input.at("object"));
    case AssistantRole::Generator:
      return Json{{"text", "[" + input.at("model").get<std::string>() + "] Draft response (" +
                               digest.substr(0, 8) + ") for: " + first_line(input.at("prompt").get<std::string>())}};
    case AssistantRole::Judge:
      return judge(input, digest);
    case AssistantRole::FeedbackIntegrator:
      return integrate_feedback(input);
  }
  return Json::object();
}

}  // namespace ooprompt::mock
