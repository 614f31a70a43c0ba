#include "ooprompt/workspace.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "ooprompt/analysis.hpp"
#include "ooprompt/codec.hpp"
#include "ooprompt/gateway.hpp"

namespace ooprompt {

namespace {

constexpr const char* kConfigFile = "workspace.json";
constexpr const char* kBlocklistFile = "safety_blocklist.txt";

[[noreturn]] void corrupt(const fs::path& path, const std::string& detail) {
  throw Error(ErrorCode::CorruptFile, path.string() + ": " + detail, Json{{"path", path.string()}, {"detail", detail}});
}

Json parse_file(const fs::path& path) {
  std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    corrupt(path, e.what());
  }
}

// Runs `fn`, turning schema errors into CorruptFile for `path`.
template <typename Fn>
auto load_entity(const fs::path& path, Fn fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaVersionMismatch) {
      throw Error(ErrorCode::SchemaVersionMismatch, path.string() + ": " + e.what(), Json{{"path", path.string()}});
    }
    if (e.code() == ErrorCode::CorruptFile) throw;
    corrupt(path, e.what());
  } catch (const Json::exception& e) {
    corrupt(path, e.what());
  }
}

std::vector<fs::path> files_with_extension(const fs::path& dir, std::string_view ext) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<std::string> child_refs(const PromptObject& obj) {
  std::set<std::string> out;
  for (const auto& p : obj.properties) {
    if (p.is_child()) out.insert(p.child_id());
  }
  return out;
}

void observe_object(IdAllocator& ids, const PromptObject& obj) {
  ids.observe(obj.id);
  for (const auto& p : obj.properties) ids.observe(p.id);
}

std::string safe_file_part(std::string s) {
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  }
  return s;
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::IoError, "cannot replace " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string(), Json{{"path", path.string()}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string now_timestamp() {
  if (const char* fixed = std::getenv("OOPROMPT_FIXED_TIME"); fixed && *fixed) return fixed;
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

WorkspaceLock::WorkspaceLock(const fs::path& root) {
  fs::path path = root / ".lock";
  fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::IoError, "cannot open lock file " + path.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    int err = errno;
    ::close(fd_);
    fd_ = -1;
    if (err == EWOULDBLOCK) {
      throw Error(ErrorCode::WorkspaceLocked, "workspace " + root.string() + " is locked by another writer");
    }
    throw Error(ErrorCode::IoError, "cannot lock " + path.string());
  }
}

WorkspaceLock::~WorkspaceLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

Workspace::Workspace(Workspace&&) noexcept = default;
Workspace& Workspace::operator=(Workspace&&) noexcept = default;
Workspace::~Workspace() = default;

Workspace Workspace::in_memory() {
  Workspace ws;
  ws.templates_ = TemplateLibrary::seed();
  ws.blocklist_ = default_safety_blocklist();
  return ws;
}

Workspace Workspace::init(const fs::path& root) {
  if (!fs::exists(root / kConfigFile)) {
    for (const char* dir : {"objects", "history", "templates", "proposals", "runs"}) {
      fs::create_directories(root / dir);
    }
    WorkspaceLock lock(root);
    const TemplateLibrary seed = TemplateLibrary::seed();
    for (const auto& t : seed.all()) {
      write_file_atomic(root / "templates" / (t.id + ".json"), to_json(t).dump(2) + "\n");
    }
    std::string blocklist = "# One theme term per line; flagged when the audience is children.\n";
    for (const auto& term : default_safety_blocklist()) blocklist += term + "\n";
    write_file_atomic(root / kBlocklistFile, blocklist);
    install_seed_fixtures(root / "fixtures" / "assistants");
    Workspace fresh;
    fresh.root_ = root;
    fresh.save_config();
  }
  return open(root);
}

Workspace Workspace::open(const fs::path& root) {
  if (!fs::is_regular_file(root / kConfigFile)) {
    throw Error(ErrorCode::IoError, "no workspace at " + root.string() + " (run init first)",
                Json{{"path", root.string()}});
  }
  Workspace ws;
  ws.root_ = root;
  ws.load();
  return ws;
}

fs::path Workspace::fixtures_dir() const { return persistent() ? root_ / "fixtures" / "assistants" : fs::path{}; }

void Workspace::lock_for_writing() {
  if (persistent() && !lock_) lock_ = std::make_unique<WorkspaceLock>(root_);
}

void Workspace::require_writable() const {
  if (persistent() && !lock_) {
    throw Error(ErrorCode::WorkspaceLocked, "workspace was opened read-only");
  }
}

void Workspace::load() {
  const fs::path config_path = root_ / kConfigFile;
  Json cfg = parse_file(config_path);
  load_entity(config_path, [&] {
    int schema = json_util::require_int(cfg, "schema_version");
    if (schema != kSchemaVersion) {
      throw Error(ErrorCode::SchemaVersionMismatch, "schema_version " + std::to_string(schema) + " is not supported");
    }
    const Json& counters = json_util::require(cfg, "counters");
    ids_.set_last_issued(IdKind::Object, json_util::require_int(counters, "object"));
    ids_.set_last_issued(IdKind::Property, json_util::require_int(counters, "property"));
    ids_.set_last_issued(IdKind::Proposal, json_util::require_int(counters, "proposal"));
    ids_.set_last_issued(IdKind::Run, json_util::require_int(counters, "run"));
    for (const auto& o : json_util::string_list(cfg, "orphans")) config_.orphans.insert(o);
    config_.cors_origin = json_util::optional_string(cfg, "cors_origin");
    config_.api_token = json_util::optional_string(cfg, "api_token");
    return 0;
  });

  for (const auto& path : files_with_extension(root_ / "history", ".jsonl")) {
    History h = load_entity(path, [&] {
      std::vector<VersionRecord> records;
      std::istringstream in(read_file(path));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_json(Json::parse(line)));
      }
      if (records.empty()) throw Error(ErrorCode::InvalidArgument, "history file is empty");
      if (records.front().object_id != path.stem().string()) {
        throw Error(ErrorCode::InvalidArgument, "history belongs to " + records.front().object_id);
      }
      return History(std::move(records));
    });
    for (const auto& r : h.records()) observe_object(ids_, r.snapshot);
    histories_.emplace(path.stem().string(), std::move(h));
  }

  for (const auto& path : files_with_extension(root_ / "objects", ".json")) {
    Json j = parse_file(path);
    PromptObject obj = load_entity(path, [&] { return object_from_json(j); });
    if (obj.id != path.stem().string()) corrupt(path, "file holds object " + obj.id);
    auto h = histories_.find(obj.id);
    if (h == histories_.end()) corrupt(path, "object has no history file");
    const VersionRecord& last = h->second.records().back();
    if (obj.version > last.version) corrupt(path, "object is ahead of its history");
    if (obj.version < last.version) {
      obj = last.snapshot;  // interrupted commit: history holds the newer version
    } else if (!(obj == last.snapshot)) {
      corrupt(path, "object differs from its recorded version " + std::to_string(obj.version));
    }
    observe_object(ids_, obj);
    objects_.emplace(obj.id, std::move(obj));
  }
  auto look = lookup();
  for (const auto& [id, obj] : objects_) {
    if (auto v = validate_object(obj, look); !v.empty()) {
      corrupt(root_ / "objects" / (id + ".json"), std::string(to_string(v.front().kind)) + ": " + v.front().detail);
    }
  }

  for (const auto& path : files_with_extension(root_ / "templates", ".json")) {
    Json j = parse_file(path);
    load_entity(path, [&] {
      templates_.add(template_from_json(j));
      return 0;
    });
  }

  for (const auto& path : files_with_extension(root_ / "proposals", ".json")) {
    Json j = parse_file(path);
    MappingProposal p = load_entity(path, [&] { return proposal_from_json(j); });
    ids_.observe(p.id);
    proposals_.emplace(p.id, std::move(p));
  }

  for (const auto& path : files_with_extension(root_ / "runs", ".json")) {
    Json j = parse_file(path);
    ComparisonReport r = load_entity(path, [&] { return report_from_json(j); });
    ids_.observe(r.run_id);
    runs_.emplace(r.run_id, std::move(r));
  }

  if (fs::exists(root_ / kBlocklistFile)) {
    blocklist_ = parse_blocklist(read_file(root_ / kBlocklistFile));
  } else {
    blocklist_ = default_safety_blocklist();
  }
}

void Workspace::save_config() const {
  if (!persistent()) return;
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["counters"] = Json{{"object", ids_.last_issued(IdKind::Object)},
                       {"property", ids_.last_issued(IdKind::Property)},
                       {"proposal", ids_.last_issued(IdKind::Proposal)},
                       {"run", ids_.last_issued(IdKind::Run)}};
  j["orphans"] = Json(std::vector<std::string>(config_.orphans.begin(), config_.orphans.end()));
  j["cors_origin"] = config_.cors_origin;
  j["api_token"] = config_.api_token;
  write_file_atomic(root_ / kConfigFile, j.dump(2) + "\n");
}

void Workspace::persist_object(const PromptObject& obj) const {
  if (!persistent()) return;
  write_file_atomic(root_ / "objects" / (obj.id + ".json"), to_json(obj).dump(2) + "\n");
}

void Workspace::persist_history(const std::string& id) const {
  if (!persistent()) return;
  std::string out;
  for (const auto& r : histories_.at(id).records()) out += to_json(r).dump() + "\n";
  write_file_atomic(root_ / "history" / (id + ".jsonl"), out);
}

const PromptObject* Workspace::find_object(std::string_view id) const {
  auto it = objects_.find(id);
  return it == objects_.end() ? nullptr : &it->second;
}

const PromptObject& Workspace::object(std::string_view id) const {
  if (const PromptObject* obj = find_object(id)) return *obj;
  throw Error(ErrorCode::UnknownObject, "no object " + std::string(id), Json{{"object_id", id}});
}

std::vector<const PromptObject*> Workspace::objects() const {
  std::vector<const PromptObject*> out;
  for (const auto& [id, obj] : objects_) out.push_back(&obj);
  return out;
}

ObjectLookup Workspace::lookup() const {
  return [this](std::string_view id) { return find_object(id); };
}

const History& Workspace::history(std::string_view id) const {
  auto it = histories_.find(id);
  if (it == histories_.end()) {
    throw Error(ErrorCode::UnknownObject, "no object " + std::string(id), Json{{"object_id", id}});
  }
  return it->second;
}

void Workspace::add_template(Template t) {
  lock_for_writing();
  templates_.add(t);
  if (persistent()) write_file_atomic(root_ / "templates" / (t.id + ".json"), to_json(t).dump(2) + "\n");
}

std::set<std::string> Workspace::live_references() const {
  std::set<std::string> out;
  for (const auto& [id, obj] : objects_) {
    auto refs = child_refs(obj);
    out.insert(refs.begin(), refs.end());
  }
  return out;
}

void Workspace::update_orphans(const std::set<std::string>& released, const std::set<std::string>& referenced) {
  auto live = live_references();
  for (const auto& id : released) {
    if (!live.count(id) && objects_.count(id)) config_.orphans.insert(id);
  }
  for (const auto& id : referenced) config_.orphans.erase(id);
  for (auto it = config_.orphans.begin(); it != config_.orphans.end();) {
    it = objects_.count(*it) ? std::next(it) : config_.orphans.erase(it);
  }
}

void Workspace::commit(const PromptObject& obj, std::string changelog) {
  commit(std::vector<Change>{{obj, std::move(changelog)}});
}

void Workspace::commit(const std::vector<Change>& changes) {
  lock_for_writing();
  require_writable();

  std::map<std::string, const PromptObject*, std::less<>> staged;
  for (const auto& [id, obj] : objects_) staged[id] = &obj;
  std::set<std::string> released, referenced;
  for (const auto& c : changes) {
    const PromptObject& obj = c.object;
    auto h = histories_.find(obj.id);
    int expected = h == histories_.end() ? 1 : h->second.current_version() + 1;
    if (obj.version != expected) {
      throw Error(ErrorCode::VersionConflict,
                  obj.id + " v" + std::to_string(obj.version) + " does not follow v" + std::to_string(expected - 1),
                  Json{{"object_id", obj.id}, {"expected_version", expected}});
    }
    if (const PromptObject* old = find_object(obj.id)) {
      auto refs = child_refs(*old);
      released.insert(refs.begin(), refs.end());
    }
    auto refs = child_refs(obj);
    referenced.insert(refs.begin(), refs.end());
    staged[obj.id] = &obj;
  }
  ObjectLookup staged_lookup = [&staged](std::string_view id) -> const PromptObject* {
    auto it = staged.find(id);
    return it == staged.end() ? nullptr : it->second;
  };
  for (const auto& c : changes) {
    if (auto v = validate_object(c.object, staged_lookup); !v.empty()) {
      throw Error(ErrorCode::InvariantViolation, std::string(to_string(v.front().kind)) + ": " + v.front().detail,
                  Json{{"object_id", c.object.id}, {"entity", v.front().entity}});
    }
  }

  const std::string ts = now_timestamp();
  std::map<std::string, History> updated;
  for (const auto& c : changes) {
    auto it = updated.find(c.object.id);
    if (it == updated.end()) {
      auto h = histories_.find(c.object.id);
      it = updated.emplace(c.object.id, h == histories_.end() ? History{} : h->second).first;
    }
    it->second.append(c.object, c.changelog, ts);
  }
  for (auto& [id, h] : updated) {
    histories_[id] = std::move(h);
    persist_history(id);
  }
  for (const auto& c : changes) {
    objects_[c.object.id] = c.object;
    observe_object(ids_, c.object);
    persist_object(c.object);
  }
  update_orphans(released, referenced);
  save_config();
}

void Workspace::delete_object(std::string_view id) {
  lock_for_writing();
  require_writable();
  const PromptObject& obj = object(id);
  for (const auto& [other_id, other] : objects_) {
    if (other_id != id && child_refs(other).count(std::string(id))) {
      throw Error(ErrorCode::InvariantViolation, std::string(id) + " is still referenced by " + other_id,
                  Json{{"object_id", id}, {"referenced_by", other_id}});
    }
  }
  auto released = child_refs(obj);
  std::string key(id);
  objects_.erase(key);
  if (persistent()) fs::remove(root_ / "objects" / (key + ".json"));
  update_orphans(released, {});
  save_config();
}

const PromptObject& Workspace::revive(std::string_view id) {
  if (const PromptObject* live = find_object(id)) return *live;
  PromptObject obj = restore_content(history(id), history(id).current_version());
  for (const auto& child : child_refs(obj)) {
    if (!find_object(child) && ever_existed(child)) revive(child);
  }
  commit(obj, "revive " + obj.id);
  return object(id);
}

const MappingProposal& Workspace::save_proposal(MappingProposal p) {
  lock_for_writing();
  require_writable();
  if (p.id.empty()) p.id = ids_.issue(IdKind::Proposal);
  if (persistent()) write_file_atomic(root_ / "proposals" / (p.id + ".json"), to_json(p).dump(2) + "\n");
  save_config();
  auto& slot = proposals_[p.id];
  slot = std::move(p);
  return slot;
}

const MappingProposal& Workspace::proposal(std::string_view id) const {
  auto it = proposals_.find(id);
  if (it == proposals_.end()) {
    throw Error(ErrorCode::UnknownProposal, "no proposal " + std::string(id), Json{{"proposal_id", id}});
  }
  return it->second;
}

std::vector<const MappingProposal*> Workspace::proposals() const {
  std::vector<const MappingProposal*> out;
  for (const auto& [id, p] : proposals_) out.push_back(&p);
  return out;
}

const ComparisonReport& Workspace::save_run(ComparisonReport r) {
  lock_for_writing();
  require_writable();
  if (r.run_id.empty()) r.run_id = ids_.issue(IdKind::Run);
  if (runs_.count(r.run_id)) {
    throw Error(ErrorCode::InvalidArgument, "run " + r.run_id + " already exists; reports are immutable");
  }
  ids_.observe(r.run_id);
  if (persistent()) {
    fs::path dir = root_ / "runs" / r.run_id;
    for (std::size_t i = 0; i < r.results.size(); ++i) {
      for (const auto& g : r.results[i].generations) {
        if (!g.text) continue;
        write_file_atomic(dir / (std::to_string(i) + "-" + safe_file_part(g.model) + ".txt"), *g.text);
      }
    }
    write_file_atomic(root_ / "runs" / (r.run_id + ".json"), to_json(r).dump(2) + "\n");
  }
  save_config();
  auto& slot = runs_[r.run_id];
  slot = std::move(r);
  return slot;
}

const ComparisonReport& Workspace::run(std::string_view id) const {
  auto it = runs_.find(id);
  if (it == runs_.end()) throw Error(ErrorCode::UnknownRun, "no evaluation run " + std::string(id), Json{{"run_id", id}});
  return it->second;
}

}  // namespace ooprompt
