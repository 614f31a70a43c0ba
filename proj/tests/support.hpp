#pragma once

// Helpers shared by the unit and acceptance binaries. No gtest dependency.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ooprompt/cli.hpp"
#include "ooprompt/model.hpp"
#include "ooprompt/workspace.hpp"

namespace testing_support {

namespace fs = std::filesystem;
using namespace ooprompt;

inline fs::path test_data(const std::string& rel) { return fs::path(OOPROMPT_TEST_DATA) / rel; }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "ooprompt-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

// Sets (or unsets, with nullopt) an environment variable for the current scope.
class ScopedEnv {
 public:
  ScopedEnv(std::string name, std::optional<std::string> value) : name_(std::move(name)) {
    if (const char* old = std::getenv(name_.c_str())) old_ = old;
    if (value) {
      ::setenv(name_.c_str(), value->c_str(), 1);
    } else {
      ::unsetenv(name_.c_str());
    }
  }
  ~ScopedEnv() {
    if (old_) {
      ::setenv(name_.c_str(), old_->c_str(), 1);
    } else {
      ::unsetenv(name_.c_str());
    }
  }
  ScopedEnv(const ScopedEnv&) = delete;
  ScopedEnv& operator=(const ScopedEnv&) = delete;

 private:
  std::string name_;
  std::optional<std::string> old_;
};

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

// In-process CLI call.
inline CliResult cli(const std::vector<std::string>& args, const std::string& stdin_text = {}) {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  CliResult r;
  r.code = cli_dispatch(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

// Runs the real executable in a child process; stdout and stderr go through files.
inline CliResult run_binary(const std::vector<std::string>& args, const fs::path& scratch) {
  std::string cmd = shell_quote(OOPROMPT_CLI_PATH);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  fs::path out = scratch / ".stdout", err = scratch / ".stderr";
  cmd += " > " + shell_quote(out.string()) + " 2> " + shell_quote(err.string()) + " < /dev/null";
  int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

inline PropertySpec text_spec(std::string name, std::string value) {
  PropertySpec s;
  s.name = std::move(name);
  s.value = TextValue{std::move(value)};
  return s;
}

inline PromptObject with_props(const std::string& title,
                               const std::vector<std::pair<std::string, std::string>>& props, IdAllocator& ids) {
  PromptObject obj = make_object(ids.issue(IdKind::Object), title);
  for (const auto& [n, v] : props) obj = add_property(obj, text_spec(n, v), ids);
  return obj;
}

// Random well-formed objects (text values only) for property tests.
class ObjectGenerator {
 public:
  explicit ObjectGenerator(std::uint32_t seed) : rng_(seed) {}

  std::mt19937& rng() { return rng_; }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  std::string word() {
    static const std::vector<std::string> words = {
        "tone",  "style", "audience", "length",  "budget", "pace",   "topic", "setting", "ending", "voice",
        "mood",  "theme", "format",   "details", "humor",  "colour", "scope", "rhythm",  "focus",  "detail level"};
    return words[static_cast<std::size_t>(uniform(0, static_cast<int>(words.size()) - 1))];
  }

  std::string value() {
    static const std::vector<std::string> values = {
        "calm",  "playful and bright", "formal", "short", "three paragraphs", "Los Angeles", "teenagers",
        "dark",  "a twist at the end",  "warm",   "BBQ",   "quiet streets",    "slow",        "fast paced"};
    return values[static_cast<std::size_t>(uniform(0, static_cast<int>(values.size()) - 1))];
  }

  Tier tier() { return static_cast<Tier>(uniform(0, 3)); }

  // A fresh name that does not collide with any existing one.
  std::string fresh_name(const PromptObject& obj) {
    for (;;) {
      std::string n = word();
      if (coin(0.6)) n += " " + std::to_string(uniform(1, 999));
      if (!obj.find_by_name(n)) return n;
    }
  }

  PropertySpec spec(const PromptObject& obj) {
    PropertySpec s = text_spec(fresh_name(obj), value());
    if (coin(0.15)) s.polarity = Polarity::Exclude;
    s.tier = tier();
    int nc = coin(0.4) ? uniform(1, 3) : 0;
    for (int i = 0; i < nc; ++i) s.candidates.push_back(value() + " #" + std::to_string(i));
    int ne = coin(0.3) ? uniform(1, 2) : 0;
    for (int i = 0; i < ne; ++i) s.examples.push_back("example " + std::to_string(uniform(1, 50)));
    return s;
  }

  PromptObject object(IdAllocator& ids, int min_props = 0, int max_props = 6) {
    PromptObject obj = make_object(ids.issue(IdKind::Object), "Object " + std::to_string(uniform(1, 9999)));
    int n = uniform(min_props, max_props);
    for (int i = 0; i < n; ++i) obj = add_property(obj, spec(obj), ids);
    // Optionally turn a run of properties into one sequential group.
    if (obj.properties.size() >= 2 && coin(0.3)) {
      int k = uniform(2, static_cast<int>(obj.properties.size()));
      for (int i = 0; i < k; ++i) {
        PropertyPatch p;
        p.relation = Sequential{"steps", i + 1};
        p.polarity = Polarity::Include;
        obj = update_property(obj, obj.properties[static_cast<std::size_t>(i)].id, p);
      }
    }
    return obj;
  }

 private:
  std::mt19937 rng_;
};

}  // namespace testing_support
