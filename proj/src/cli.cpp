#include "ooprompt/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ooprompt/codec.hpp"
#include "ooprompt/lifecycle.hpp"
#include "ooprompt/service.hpp"

namespace ooprompt {

namespace {

// How a command's payload is shown without --json.
enum class View { Json, Object, ObjectList, Artifact, Chain, History, Proposal, Text };

struct Output {
  Json data;
  View view = View::Json;
};

struct Context {
  std::string root = ".";
  bool json = false;
  std::istream* in = nullptr;
  std::ostream* out = nullptr;

  std::optional<Workspace> ws;
  std::unique_ptr<Assistant> assistant;
  std::optional<Lifecycle> lc;

  Lifecycle& life() {
    if (!lc) {
      ws.emplace(Workspace::open(root));
      assistant = assistant_from_env(ws->fixtures_dir());
      lc.emplace(*ws, *assistant);
    }
    return *lc;
  }
};

std::optional<int> opt_version(int v) { return v > 0 ? std::optional<int>(v) : std::nullopt; }

Relation parse_relation(const std::string& s) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw Error(ErrorCode::InvalidArgument, "expected GROUP:ORDER for a sequential relation, got '" + s + "'");
  }
  Sequential seq;
  seq.group = s.substr(0, colon);
  try {
    seq.order = std::stoi(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "sequential order must be an integer in '" + s + "'");
  }
  return seq;
}

std::vector<Reference> parse_references(const std::vector<std::string>& refs) {
  std::vector<Reference> out;
  for (const auto& r : refs) {
    auto eq = r.find('=');
    if (eq == std::string::npos) {
      out.push_back(Reference{r, r});
    } else {
      out.push_back(Reference{r.substr(0, eq), r.substr(eq + 1)});
    }
  }
  return out;
}

std::vector<std::size_t> parse_items(const std::vector<int>& items) {
  std::vector<std::size_t> out;
  for (int i : items) {
    if (i < 0) throw Error(ErrorCode::InvalidArgument, "proposal item indices must not be negative");
    out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

std::string read_stream(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string value_label(const Json& value) {
  if (value.value("kind", "") == "child") return "<" + value.value("ref", "") + ">";
  return value.value("text", "");
}

void print_object(std::ostream& out, const Json& obj) {
  out << obj["id"].get<std::string>() << " v" << obj["version"].get<int>() << "  " << obj["title"].get<std::string>()
      << "\n";
  if (!obj["notes"].get<std::string>().empty()) out << "  notes: " << obj["notes"].get<std::string>() << "\n";
  for (const auto& p : obj["properties"]) {
    out << "  " << p["id"].get<std::string>() << "  " << p["name"].get<std::string>() << " = "
        << value_label(p["value"]) << "  [" << p["polarity"].get<std::string>() << ", "
        << p["tier"].get<std::string>();
    if (p["relation"]["kind"] == "sequential") {
      out << ", " << p["relation"]["group"].get<std::string>() << " #" << p["relation"]["order"].get<int>();
    }
    out << "]\n";
    if (!p["candidates"].empty()) {
      out << "      candidates:";
      for (const auto& c : p["candidates"]) out << " \"" << c.get<std::string>() << "\"";
      out << "\n";
    }
    if (!p["examples"].empty()) {
      out << "      examples:";
      for (const auto& e : p["examples"]) out << " \"" << e.get<std::string>() << "\"";
      out << "\n";
    }
  }
}

void print_proposal(std::ostream& out, const Json& p) {
  out << p["id"].get<std::string>() << "  " << p["operation"].get<std::string>() << " on "
      << p["object_id"].get<std::string>() << " v" << p["object_version"].get<int>() << "\n";
  for (const auto& item : p["items"]) {
    out << "  [" << item["index"].get<int>() << "] " << item["status"].get<std::string>() << "  "
        << item["kind"].get<std::string>() << " ";
    if (item.contains("property")) {
      out << item["property"]["name"].get<std::string>() << " = " << value_label(item["property"]["value"]);
    } else {
      out << item["prop_id"].get<std::string>();
      if (item.contains("patch")) out << " " << item["patch"].dump();
    }
    if (!item["rationale"].get<std::string>().empty()) out << "\n      " << item["rationale"].get<std::string>();
    out << "\n";
  }
}

void print_human(std::ostream& out, const Output& o) {
  const Json& d = o.data;
  switch (o.view) {
    case View::Object:
      if (d.contains("parent")) {
        print_object(out, d["parent"]);
        print_object(out, d["child"]);
      } else if (d.contains("object")) {
        print_object(out, d["object"]);
      } else {
        print_object(out, d);
      }
      return;
    case View::ObjectList:
      for (const auto& o2 : d) {
        out << o2["id"].get<std::string>() << " v" << o2["version"].get<int>() << "  " << o2["title"].get<std::string>()
            << "  (" << o2["properties"].get<int>() << " properties" << (o2["orphan"].get<bool>() ? ", orphan" : "")
            << ")\n";
      }
      return;
    case View::Artifact:
      if (d.is_array()) {
        for (const auto& a : d) {
          out << "--- " << (a["variant_key"].get<std::string>().empty() ? "default" : a["variant_key"].get<std::string>())
              << " ---\n"
              << a["text"].get<std::string>() << "\n";
        }
      } else {
        out << d["text"].get<std::string>() << "\n";
      }
      return;
    case View::Chain:
      for (const auto& step : d) {
        out << "--- " << step["object"]["id"].get<std::string>() << " ---\n" << step["artifact"]["text"].get<std::string>()
            << "\n";
      }
      return;
    case View::History:
      if (d.contains("versions")) {
        out << d["object_id"].get<std::string>() << (d["live"].get<bool>() ? "" : " (deleted)") << "\n";
        for (const auto& v : d["versions"]) {
          out << "  v" << v["version"].get<int>() << "  " << v["timestamp"].get<std::string>() << "  "
              << v["changelog"].get<std::string>() << "\n";
        }
      } else {
        for (const auto& v : d) out << "  v" << v["version"].get<int>() << "  " << v.dump() << "\n";
      }
      return;
    case View::Proposal:
      if (d.is_array()) {
        for (const auto& p : d) print_proposal(out, p);
      } else if (d.contains("proposal")) {
        print_object(out, d["object"]);
        print_proposal(out, d["proposal"]);
      } else {
        print_proposal(out, d);
      }
      return;
    case View::Text:
      out << d.get<std::string>() << "\n";
      return;
    case View::Json:
      out << d.dump(2) << "\n";
      return;
  }
}

int exit_code(ErrorCode code) {
  switch (classify(code)) {
    case ErrorClass::Provider:
    case ErrorClass::Io: return 2;
    default: return 1;
  }
}

int serve(Context& ctx, const std::string& listen, const std::optional<std::string>& cors,
          const std::optional<std::string>& token) {
  ctx.life();
  auto [host, port] = parse_listen_address(listen);
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);  // worker threads inherit the mask
  Service service(*ctx.ws, *ctx.assistant, ServiceOptions{cors, token});
  int bound = service.start(host, port);
  *ctx.out << "listening on http://" << host << ":" << bound << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  service.stop();
  service.drain();
  return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.in = &in;
  ctx.out = &out;
  if (const char* env = std::getenv("OOPROMPT_WORKSPACE"); env && *env) ctx.root = env;

  CLI::App app{"Structured, versioned prompt objects", "ooprompt"};
  app.require_subcommand(1);
  app.add_option("-w,--workspace", ctx.root, "Workspace directory (default: $OOPROMPT_WORKSPACE or .)");
  app.add_flag("--json", ctx.json, "Machine-readable output");

  std::function<Output()> action;
  std::function<int()> special;  // commands that manage their own output
  auto on = [&action](CLI::App* sub, std::function<Output()> fn) { sub->callback([&action, fn] { action = fn; }); };

  int expect = 0;
  auto expect_opt = [&expect](CLI::App* sub) {
    sub->add_option("--expect-version", expect, "Fail unless the object is at this version");
  };

  // init
  auto* init = app.add_subcommand("init", "Create a workspace with seed templates");
  init->callback([&] {
    action = [&] {
      Workspace ws = Workspace::init(ctx.root);
      return Output{Json{{"root", ws.root().string()}, {"templates", ws.templates().all().size()}}, View::Json};
    };
  });

  // objects
  std::string title, notes;
  std::vector<std::string> template_refs, selects;
  auto* new_cmd = app.add_subcommand("new", "Create an object, optionally inheriting templates");
  new_cmd->add_option("title", title)->required();
  new_cmd->add_option("-t,--template", template_refs, "Template to inherit (repeatable, first wins)");
  new_cmd->add_option("--select", selects, "TEMPLATE=name1,name2 to inherit only some defaults");
  new_cmd->add_option("--notes", notes);
  on(new_cmd, [&] {
    std::map<std::string, std::vector<std::string>> selections;
    for (const auto& s : selects) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--select expects TEMPLATE=names");
      std::vector<std::string> names;
      std::stringstream ss(s.substr(eq + 1));
      for (std::string n; std::getline(ss, n, ',');) {
        if (!n.empty()) names.push_back(n);
      }
      selections[s.substr(0, eq)] = names;
    }
    return Output{ctx.life().create_object(title, template_refs, selections, notes), View::Object};
  });

  auto* list = app.add_subcommand("list", "List live objects");
  on(list, [&] { return Output{ctx.life().list_objects(), View::ObjectList}; });

  std::string object_id;
  auto* show = app.add_subcommand("show", "Show an object");
  show->add_option("object", object_id)->required();
  on(show, [&] { return Output{ctx.life().show_object(object_id), View::Object}; });

  std::optional<std::string> new_title, new_notes;
  auto* edit = app.add_subcommand("edit", "Change an object's title or notes");
  edit->add_option("object", object_id)->required();
  edit->add_option("--title", new_title);
  edit->add_option("--notes", new_notes);
  expect_opt(edit);
  on(edit, [&] {
    ObjectPatch patch{new_title, new_notes};
    return Output{ctx.life().edit_object(object_id, patch, opt_version(expect)), View::Object};
  });

  auto* del = app.add_subcommand("delete", "Delete an unreferenced object (history is kept)");
  del->add_option("object", object_id)->required();
  on(del, [&] { return Output{ctx.life().delete_object(object_id), View::Json}; });

  // extract
  std::string source;
  std::optional<std::string> text_opt, into;
  auto* extract = app.add_subcommand("extract", "Map raw prompt text into a property proposal");
  extract->add_option("source", source, "File to read, or - for standard input");
  extract->add_option("--text", text_opt, "Raw text given inline");
  extract->add_option("--into", into, "Propose properties for an existing object");
  on(extract, [&] {
    std::string text;
    if (text_opt) {
      text = *text_opt;
    } else if (source == "-") {
      text = read_stream(*ctx.in);
    } else if (!source.empty()) {
      text = read_file(source);
    } else {
      throw Error(ErrorCode::InvalidArgument, "give a file, - for stdin, or --text");
    }
    return Output{ctx.life().extract(text, into), View::Proposal};
  });

  // templates
  auto* tmpl = app.add_subcommand("template", "Template library");
  tmpl->require_subcommand(1);
  on(tmpl->add_subcommand("list", "List templates"), [&] { return Output{ctx.life().list_templates(), View::Json}; });
  std::string query, facet = "output_type";
  auto* tsearch = tmpl->add_subcommand("search", "Rank templates for a query");
  tsearch->add_option("query", query)->required();
  tsearch->add_option("--by", facet, "output_type or use_case")->capture_default_str();
  on(tsearch, [&] { return Output{ctx.life().search_templates(query, facet_from_string(facet)), View::Json}; });
  std::string template_id;
  std::vector<std::string> only;
  auto* tapply = tmpl->add_subcommand("apply", "Inherit a template's defaults into an object");
  tapply->add_option("object", object_id)->required();
  tapply->add_option("template", template_id)->required();
  tapply->add_option("--only", only, "Inherit only these default names");
  expect_opt(tapply);
  on(tapply, [&] {
    std::optional<std::vector<std::string>> selection;
    if (!only.empty()) selection = only;
    return Output{ctx.life().apply_template(object_id, template_id, selection, opt_version(expect)), View::Object};
  });
  std::string description;
  TemplateTags tags;
  auto* tderive = tmpl->add_subcommand("derive", "Save an object's properties as a new template");
  tderive->add_option("object", object_id)->required();
  tderive->add_option("template", template_id, "New template id")->required();
  tderive->add_option("--description", description);
  tderive->add_option("--output-type", tags.output_type);
  tderive->add_option("--use-case", tags.use_cases);
  on(tderive, [&] {
    return Output{ctx.life().derive_template(object_id, template_id, description, tags), View::Json};
  });

  // properties
  auto* prop = app.add_subcommand("prop", "Edit properties");
  prop->require_subcommand(1);
  std::string prop_ref, prop_name;
  std::optional<std::string> value, child, tier, seq, polarity, rename;
  bool exclude = false, parallel = false, undo = false, clear_candidates = false, clear_examples = false;
  std::vector<std::string> candidates, examples, refs, order;

  auto* padd = prop->add_subcommand("add", "Add a property");
  padd->add_option("object", object_id)->required();
  padd->add_option("name", prop_name)->required();
  padd->add_option("value", value);
  padd->add_option("--child", child, "Reference another object instead of a text value");
  padd->add_flag("--exclude", exclude, "Something the output must not contain");
  padd->add_option("--tier", tier, "slightly_wanted, normal, wanted or highly_wanted");
  padd->add_option("--seq", seq, "GROUP:ORDER for an ordered step");
  padd->add_option("--candidate", candidates);
  padd->add_option("--example", examples);
  padd->add_option("--ref", refs, "LABEL=URI");
  expect_opt(padd);
  on(padd, [&] {
    PropertySpec spec;
    spec.name = prop_name;
    if (child) {
      spec.value = ChildRef{*child};
    } else {
      spec.value = TextValue{value.value_or("")};
    }
    if (exclude) spec.polarity = Polarity::Exclude;
    if (tier) spec.tier = tier_from_string(*tier);
    if (seq) spec.relation = parse_relation(*seq);
    spec.candidates = candidates;
    spec.examples = examples;
    spec.references = parse_references(refs);
    return Output{ctx.life().add_property(object_id, spec, opt_version(expect)), View::Object};
  });

  auto* pset = prop->add_subcommand("set", "Change a property");
  pset->add_option("object", object_id)->required();
  pset->add_option("prop", prop_ref, "Property id or name")->required();
  pset->add_option("value", value);
  pset->add_option("--child", child);
  pset->add_option("--name", rename);
  pset->add_option("--tier", tier);
  pset->add_option("--polarity", polarity, "include or exclude");
  pset->add_option("--seq", seq, "GROUP:ORDER");
  pset->add_flag("--parallel", parallel, "Drop any sequential relation");
  pset->add_option("--candidate", candidates, "Replace the candidate list");
  pset->add_flag("--no-candidates", clear_candidates);
  pset->add_option("--example", examples, "Replace the example list");
  pset->add_flag("--no-examples", clear_examples);
  expect_opt(pset);
  on(pset, [&] {
    PropertyPatch patch;
    patch.name = rename;
    if (child) {
      patch.value = ChildRef{*child};
    } else if (value) {
      patch.value = TextValue{*value};
    }
    if (tier) patch.tier = tier_from_string(*tier);
    if (polarity) patch.polarity = polarity_from_string(*polarity);
    if (seq) patch.relation = parse_relation(*seq);
    if (parallel) patch.relation = Parallel{};
    if (!candidates.empty() || clear_candidates) patch.candidates = candidates;
    if (!examples.empty() || clear_examples) patch.examples = examples;
    if (patch.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to change");
    return Output{ctx.life().update_property(object_id, prop_ref, patch, opt_version(expect)), View::Object};
  });

  auto* prm = prop->add_subcommand("rm", "Remove a property");
  prm->add_option("object", object_id)->required();
  prm->add_option("prop", prop_ref)->required();
  expect_opt(prm);
  on(prm, [&] { return Output{ctx.life().remove_property(object_id, prop_ref, opt_version(expect)), View::Object}; });

  auto* pexcl = prop->add_subcommand("exclude", "Mark a property as something to avoid");
  pexcl->add_option("object", object_id)->required();
  pexcl->add_option("prop", prop_ref)->required();
  pexcl->add_flag("--undo", undo, "Include it again");
  expect_opt(pexcl);
  on(pexcl, [&] {
    PropertyPatch patch;
    patch.polarity = undo ? Polarity::Include : Polarity::Exclude;
    return Output{ctx.life().update_property(object_id, prop_ref, patch, opt_version(expect)), View::Object};
  });

  std::string tier_value;
  auto* ptier = prop->add_subcommand("tier", "Set a property's emphasis");
  ptier->add_option("object", object_id)->required();
  ptier->add_option("prop", prop_ref)->required();
  ptier->add_option("tier", tier_value)->required();
  expect_opt(ptier);
  on(ptier, [&] {
    PropertyPatch patch;
    patch.tier = tier_from_string(tier_value);
    return Output{ctx.life().update_property(object_id, prop_ref, patch, opt_version(expect)), View::Object};
  });

  auto* pnest = prop->add_subcommand("nest", "Turn a property into a child object");
  pnest->add_option("object", object_id)->required();
  pnest->add_option("prop", prop_ref)->required();
  expect_opt(pnest);
  on(pnest, [&] { return Output{ctx.life().nest(object_id, prop_ref, opt_version(expect)), View::Object}; });

  auto* ppromote = prop->add_subcommand("promote", "Collapse a child object back into a text property");
  ppromote->add_option("object", object_id)->required();
  ppromote->add_option("prop", prop_ref)->required();
  expect_opt(ppromote);
  on(ppromote, [&] { return Output{ctx.life().promote(object_id, prop_ref, opt_version(expect)), View::Object}; });

  auto* preorder = prop->add_subcommand("reorder", "Reorder properties (ids or names, full permutation)");
  preorder->add_option("object", object_id)->required();
  preorder->add_option("props", order)->required();
  expect_opt(preorder);
  on(preorder, [&] { return Output{ctx.life().reorder(object_id, order, opt_version(expect)), View::Object}; });

  // assistant proposals
  auto* suggest = app.add_subcommand("suggest", "Ask the assistant for a proposal");
  suggest->require_subcommand(1);
  auto* sprops = suggest->add_subcommand("props", "Suggest implicit properties");
  sprops->add_option("object", object_id)->required();
  on(sprops, [&] { return Output{ctx.life().suggest_properties(object_id), View::Proposal}; });
  auto* srel = suggest->add_subcommand("relations", "Suggest parallel or sequential groupings");
  srel->add_option("object", object_id)->required();
  on(srel, [&] { return Output{ctx.life().suggest_relations(object_id), View::Proposal}; });
  auto* scand = suggest->add_subcommand("candidates", "Suggest alternative values");
  scand->add_option("object", object_id)->required();
  scand->add_option("prop", prop_ref)->required();
  on(scand, [&] { return Output{ctx.life().suggest_candidates(object_id, prop_ref), View::Proposal}; });
  auto* sex = suggest->add_subcommand("examples", "Suggest examples for a property");
  sex->add_option("object", object_id)->required();
  sex->add_option("prop", prop_ref)->required();
  on(sex, [&] { return Output{ctx.life().suggest_examples(object_id, prop_ref), View::Proposal}; });
  auto* srefine = suggest->add_subcommand("refine", "Suggest clearer wording");
  srefine->add_option("object", object_id)->required();
  on(srefine, [&] { return Output{ctx.life().refine(object_id), View::Proposal}; });

  std::string feedback_text;
  auto* fb = app.add_subcommand("feedback", "Turn free-form feedback into a proposal");
  fb->add_option("object", object_id)->required();
  fb->add_option("text", feedback_text)->required();
  on(fb, [&] { return Output{ctx.life().feedback(object_id, feedback_text), View::Proposal}; });

  std::string proposal_id;
  std::optional<std::string> object_filter;
  std::vector<int> items;
  auto* proposal = app.add_subcommand("proposal", "Review assistant proposals");
  proposal->require_subcommand(1);
  auto* plist = proposal->add_subcommand("list", "List proposals");
  plist->add_option("--object", object_filter);
  on(plist, [&] { return Output{ctx.life().list_proposals(object_filter), View::Proposal}; });
  auto* pshow = proposal->add_subcommand("show", "Show a proposal");
  pshow->add_option("proposal", proposal_id)->required();
  on(pshow, [&] { return Output{ctx.life().show_proposal(proposal_id), View::Proposal}; });
  auto* papply = proposal->add_subcommand("apply", "Apply pending items (all when none are named)");
  papply->add_option("proposal", proposal_id)->required();
  papply->add_option("--item", items, "Item index (repeatable)");
  expect_opt(papply);
  on(papply, [&] {
    return Output{ctx.life().apply_proposal(proposal_id, parse_items(items), opt_version(expect)), View::Proposal};
  });
  auto* pdismiss = proposal->add_subcommand("dismiss", "Dismiss pending items (all when none are named)");
  pdismiss->add_option("proposal", proposal_id)->required();
  pdismiss->add_option("--item", items);
  on(pdismiss, [&] { return Output{ctx.life().dismiss_proposal(proposal_id, parse_items(items)), View::Proposal}; });

  // analysis and deployment
  std::string format = "nl";
  auto* analyze = app.add_subcommand("analyze", "Conflicts, token estimate, template similarity, safety");
  analyze->add_option("object", object_id)->required();
  analyze->add_option("--format", format, "nl, json or hybrid")->capture_default_str();
  on(analyze, [&] { return Output{ctx.life().analyze(object_id, format_from_string(format)), View::Json}; });

  std::optional<int> variants;
  bool emphasis = false;
  auto* render = app.add_subcommand("render", "Render an object for deployment");
  render->add_option("object", object_id)->required();
  render->add_option("--format", format, "nl, json or hybrid")->capture_default_str();
  render->add_option("--variants", variants, "Enumerate up to N candidate variants");
  render->add_flag("--emphasis", emphasis, "Spell out emphasis tiers in the text");
  on(render, [&] {
    std::optional<std::size_t> cap;
    if (variants) {
      if (*variants < 0) throw Error(ErrorCode::InvalidArgument, "--variants must not be negative");
      cap = static_cast<std::size_t>(*variants);
    }
    RenderOptions options;
    options.emphasis_text = emphasis;
    return Output{ctx.life().render(object_id, format_from_string(format), cap, options), View::Artifact};
  });

  auto* chain = app.add_subcommand("chain", "Split a sequential object into one prompt per step");
  chain->add_option("object", object_id)->required();
  chain->add_option("--format", format)->capture_default_str();
  chain->add_flag("--emphasis", emphasis);
  on(chain, [&] {
    RenderOptions options;
    options.emphasis_text = emphasis;
    return Output{ctx.life().chain(object_id, format_from_string(format), options), View::Chain};
  });

  // versioning
  std::optional<std::string> property;
  auto* history = app.add_subcommand("history", "Version history of an object or one property");
  history->add_option("object", object_id)->required();
  history->add_option("--property", property, "Show the values a property took over time");
  on(history, [&] {
    if (property) return Output{ctx.life().property_history(object_id, *property), View::Json};
    return Output{ctx.life().history(object_id), View::History};
  });

  int version_a = 0, version_b = 0;
  auto* restore = app.add_subcommand("restore", "Make an old version current again");
  restore->add_option("object", object_id)->required();
  restore->add_option("version", version_a)->required();
  expect_opt(restore);
  on(restore, [&] { return Output{ctx.life().restore(object_id, version_a, opt_version(expect)), View::Object}; });

  auto* diff = app.add_subcommand("diff", "Compare two versions");
  diff->add_option("object", object_id)->required();
  diff->add_option("from", version_a)->required();
  diff->add_option("to", version_b)->required();
  on(diff, [&] { return Output{ctx.life().diff(object_id, version_a, version_b), View::Json}; });

  // evaluation
  auto* eval = app.add_subcommand("eval", "Compare rendered variants with an assistant judge");
  eval->require_subcommand(1);
  std::vector<std::string> eval_objects, models, criteria_specs, weight_specs;
  int eval_variants = 8;
  auto* erun = eval->add_subcommand("run", "Run a comparison over the variants of one or more objects");
  erun->add_option("objects", eval_objects)->required();
  erun->add_option("--variants", eval_variants, "Variant cap per object")->capture_default_str();
  erun->add_option("--format", format)->capture_default_str();
  erun->add_option("--model", models, "Generation model (repeatable)");
  erun->add_option("--criterion", criteria_specs, "ID=description (repeatable; default criteria otherwise)");
  erun->add_option("--weight", weight_specs, "ID=weight");
  on(erun, [&] {
    if (eval_variants < 1) throw Error(ErrorCode::InvalidArgument, "--variants must be at least 1");
    std::vector<Criterion> criteria;
    for (const auto& s : criteria_specs) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--criterion expects ID=description");
      criteria.push_back(Criterion{s.substr(0, eq), s.substr(eq + 1), 1.0});
    }
    if (criteria.empty() && !weight_specs.empty()) criteria = default_criteria();
    for (const auto& s : weight_specs) {
      auto eq = s.find('=');
      std::string id = s.substr(0, eq);
      auto it = std::find_if(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.id == id; });
      if (eq == std::string::npos || it == criteria.end()) {
        throw Error(ErrorCode::InvalidArgument, "--weight expects ID=weight for a known criterion, got '" + s + "'");
      }
      try {
        it->weight = std::stod(s.substr(eq + 1));
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "weight must be a number in '" + s + "'");
      }
    }
    return Output{ctx.life().eval_run(eval_objects, static_cast<std::size_t>(eval_variants), format_from_string(format),
                                      criteria, models),
                  View::Json};
  });
  std::string run_id;
  auto* eshow = eval->add_subcommand("show", "Show a stored comparison report");
  eshow->add_option("run", run_id)->required();
  on(eshow, [&] { return Output{ctx.life().eval_show(run_id), View::Json}; });
  auto* esuggest = eval->add_subcommand("suggest", "Turn a report's judge suggestions into a proposal");
  esuggest->add_option("run", run_id)->required();
  esuggest->add_option("--object", object_filter, "Object to change (default: the first evaluated)");
  on(esuggest, [&] { return Output{ctx.life().eval_suggest(run_id, object_filter), View::Proposal}; });

  // service
  std::string listen = "127.0.0.1:8080";
  std::optional<std::string> cors, token;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the workspace over HTTP");
  serve_cmd->add_option("--listen", listen, "host:port")->capture_default_str();
  serve_cmd->add_option("--cors-origin", cors, "Allowed browser origin");
  serve_cmd->add_option("--token", token, "Require this bearer token");
  serve_cmd->callback([&] { special = [&] { return serve(ctx, listen, cors, token); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (special) return special();
    Output result = action();
    if (ctx.json) {
      out << result.data.dump(2) << "\n";
    } else {
      print_human(out, result);
    }
    return 0;
  } catch (const Error& e) {
    if (ctx.json) {
      err << error_envelope(e).dump(2) << "\n";
    } else {
      err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    }
    return exit_code(e.code());
  } catch (const std::exception& e) {
    Error wrapped(ErrorCode::IoError, e.what());
    if (ctx.json) {
      err << error_envelope(wrapped).dump(2) << "\n";
    } else {
      err << "error: " << e.what() << "\n";
    }
    return 2;
  }
}

}  // namespace ooprompt
