#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ooprompt/evaluation.hpp"
#include "ooprompt/mapping.hpp"
#include "ooprompt/model.hpp"
#include "ooprompt/templates.hpp"
#include "ooprompt/versioning.hpp"

namespace ooprompt {

namespace fs = std::filesystem;

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);

/// ISO-8601 UTC, or OOPROMPT_FIXED_TIME when set.
std::string now_timestamp();

/// Exclusive advisory lock on <root>/.lock, held for the object's lifetime.
class WorkspaceLock {
 public:
  explicit WorkspaceLock(const fs::path& root);
  ~WorkspaceLock();
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  int fd_ = -1;
};

struct WorkspaceConfig {
  std::set<std::string> orphans;
  std::string cors_origin;
  std::string api_token;
};

/// On-disk layout:
///   workspace.json            config, id counters, orphan flags
///   objects/<id>.json         one file per live object
///   history/<id>.jsonl        one version record per line
///   templates/<id>.json
///   proposals/<id>.json
///   runs/<id>.json            comparison reports, raw outputs under runs/<id>/
///   fixtures/assistants/      mock assistant data
///   safety_blocklist.txt
class Workspace {
 public:
  /// Creates the layout (seed templates, blocklist, fixtures) if needed, then opens.
  static Workspace init(const fs::path& root);
  /// Throws CorruptFile naming the file, or SchemaVersionMismatch.
  static Workspace open(const fs::path& root);
  /// No files; seed templates and the default blocklist.
  static Workspace in_memory();

  Workspace(Workspace&&) noexcept;
  Workspace& operator=(Workspace&&) noexcept;
  ~Workspace();

  bool persistent() const { return !root_.empty(); }
  const fs::path& root() const { return root_; }
  fs::path fixtures_dir() const;

  /// Takes the single-writer lock; mutations throw WorkspaceLocked when another
  /// process holds it.
  void lock_for_writing();

  const PromptObject* find_object(std::string_view id) const;
  /// Throws UnknownObject.
  const PromptObject& object(std::string_view id) const;
  std::vector<const PromptObject*> objects() const;
  ObjectLookup lookup() const;
  bool is_orphan(std::string_view id) const { return config_.orphans.count(std::string(id)) > 0; }
  const WorkspaceConfig& config() const { return config_; }

  /// Throws UnknownObject when the object never existed.
  const History& history(std::string_view id) const;
  bool ever_existed(std::string_view id) const { return histories_.count(std::string(id)) > 0; }

  const TemplateLibrary& templates() const { return templates_; }
  void add_template(Template t);

  const std::vector<std::string>& blocklist() const { return blocklist_; }

  IdAllocator& ids() { return ids_; }

  struct Change {
    PromptObject object;
    std::string changelog;
  };

  /// Commits new versions (or brand-new objects at version 1) together: all are
  /// validated against the post-commit state, then snapshotted and written.
  void commit(const std::vector<Change>& changes);
  void commit(const PromptObject& obj, std::string changelog);

  /// Removes the live object, keeping its history. Throws InvariantViolation if a
  /// live object still refers to it.
  void delete_object(std::string_view id);

  /// Brings a deleted object back with the content of its last version.
  const PromptObject& revive(std::string_view id);

  const MappingProposal& save_proposal(MappingProposal p);
  /// Throws UnknownProposal.
  const MappingProposal& proposal(std::string_view id) const;
  std::vector<const MappingProposal*> proposals() const;

  const ComparisonReport& save_run(ComparisonReport r);
  /// Throws UnknownRun.
  const ComparisonReport& run(std::string_view id) const;
  bool has_run(std::string_view id) const { return runs_.count(std::string(id)) > 0; }

 private:
  Workspace() = default;
  void load();
  void save_config() const;
  void persist_object(const PromptObject& obj) const;
  void persist_history(const std::string& id) const;
  void require_writable() const;
  void update_orphans(const std::set<std::string>& released, const std::set<std::string>& referenced);
  std::set<std::string> live_references() const;

  fs::path root_;
  std::unique_ptr<WorkspaceLock> lock_;
  WorkspaceConfig config_;
  IdAllocator ids_;
  std::map<std::string, PromptObject, std::less<>> objects_;
  std::map<std::string, History, std::less<>> histories_;
  std::map<std::string, MappingProposal, std::less<>> proposals_;
  std::map<std::string, ComparisonReport, std::less<>> runs_;
  TemplateLibrary templates_;
  std::vector<std::string> blocklist_;
};

}  // namespace ooprompt
