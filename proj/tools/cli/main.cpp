// scengraph command-line tool. Talks to the core only through the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scengraph/scengraph.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2 };

bool structured = false;

/// Thrown to unwind with a C API status.
struct ApiFailure {
  sg_status status;
  std::string message;
};

int exit_code(sg_status s) {
  switch (s) {
    case SG_OK: return kOk;
    case SG_ERR_PARSE:
    case SG_ERR_SCHEMA:
    case SG_ERR_IO:
    case SG_ERR_NOT_FOUND:
    case SG_ERR_INVALID_CONFIG:
    case SG_ERR_OUT_OF_RANGE:
    case SG_ERR_INVALID_ARGUMENT:
    case SG_ERR_UNKNOWN_RULE: return kUsage;
    default: return kFailed;
  }
}

void check(sg_status s) {
  if (s != SG_OK) throw ApiFailure{s, sg_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  sg_string_free(s);
  return out;
}

struct ContextDel {
  void operator()(sg_context* c) const { sg_context_destroy(c); }
};
struct ScenarioDel {
  void operator()(sg_scenario* s) const { sg_scenario_destroy(s); }
};
struct TraceDel {
  void operator()(sg_trace* t) const { sg_trace_destroy(t); }
};
using Context = std::unique_ptr<sg_context, ContextDel>;
using Scenario = std::unique_ptr<sg_scenario, ScenarioDel>;
using Trace = std::unique_ptr<sg_trace, TraceDel>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ApiFailure{SG_ERR_IO, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ApiFailure{SG_ERR_IO, "cannot write " + path};
}

/// "fixtures/uis1" finds fixtures/uis1.scenario.json.
std::string resolve(const std::string& path, const char* suffix) {
  if (fs::is_regular_file(path)) return path;
  if (fs::is_regular_file(path + suffix)) return path + suffix;
  throw ApiFailure{SG_ERR_NOT_FOUND, "no such file: " + path};
}

Context make_context(const std::string& config_path) {
  sg_context* raw = nullptr;
  check(sg_context_create(&raw));
  Context ctx(raw);
  if (!config_path.empty()) check(sg_context_load_config(ctx.get(), read_file(config_path).c_str()));
  return ctx;
}

Scenario load(const sg_context* ctx, const std::string& path) {
  sg_scenario* raw = nullptr;
  check(sg_scenario_load(ctx, resolve(path, ".scenario.json").c_str(), &raw));
  return Scenario(raw);
}

void emit(const std::string& text) {
  std::fwrite(text.data(), 1, text.size(), stdout);
  if (!text.empty() && text.back() != '\n') std::fputc('\n', stdout);
}

struct Options {
  std::string config;
  std::string format = "human";
  std::string path;
  std::string path2;
  std::string out;
  std::string out_dir;
  std::string catalog;
  std::string expect;
  std::string revision;
  bool strict = false;
  bool check_only = false;
  std::optional<std::uint64_t> index;
  std::optional<std::uint64_t> seed;
  double dt = 0.05;
  double max_time = 60.0;
  int stride = 1;
  unsigned threads = 0;
  std::vector<std::string> catalog_locations;
  std::vector<std::string> parameterize;
};

sg_tick_config tick_config(const Options& o) {
  sg_tick_config cfg;
  sg_tick_config_default(&cfg);
  cfg.dt = o.dt;
  cfg.max_time = o.max_time;
  cfg.seed = o.seed.value_or(0);
  cfg.sample_stride = o.stride;
  return cfg;
}

/// Applies --index or --seed to a logical scenario.
Scenario concretized(const sg_context* ctx, Scenario s, const Options& o) {
  sg_scenario* raw = nullptr;
  if (o.index) {
    check(sg_enumerate(ctx, s.get(), *o.index, &raw));
    return Scenario(raw);
  }
  if (o.seed) {
    check(sg_sample(ctx, s.get(), *o.seed, &raw));
    return Scenario(raw);
  }
  return s;
}

int cmd_validate(const sg_context* ctx, const Options& o) {
  auto s = load(ctx, o.path);
  char* report = nullptr;
  int valid = 0;
  check(sg_validate(ctx, s.get(), o.strict, &report, &valid));
  const std::string text = take(report);
  if (structured) {
    emit(text);
  } else {
    const auto doc = json::parse(text);
    std::size_t errors = 0, warnings = 0;
    for (const auto& f : doc["findings"]) (f["severity"] == "Error" ? errors : warnings)++;
    std::printf("%s: %s (%zu error%s, %zu warning%s)\n", o.path.c_str(), valid ? "valid" : "invalid", errors,
                errors == 1 ? "" : "s", warnings, warnings == 1 ? "" : "s");
    for (const auto& f : doc["findings"]) {
      std::string ids;
      for (const auto& id : f["node_ids"]) ids += (ids.empty() ? "" : ",") + id.get<std::string>();
      std::printf("  %s %s [%s] %s\n", f["rule_id"].get<std::string>().c_str(),
                  f["severity"].get<std::string>().c_str(), ids.c_str(), f["message"].get<std::string>().c_str());
    }
  }
  return valid ? kOk : kFailed;
}

int cmd_fmt(const sg_context* ctx, const Options& o) {
  const auto file = resolve(o.path, ".scenario.json");
  auto s = load(ctx, o.path);
  char* text = nullptr;
  check(sg_scenario_serialize(s.get(), &text));
  const auto canonical = take(text);
  if (o.check_only) {
    const bool same = read_file(file) == canonical;
    if (!same) std::fprintf(stderr, "%s is not in canonical form\n", file.c_str());
    return same ? kOk : kFailed;
  }
  if (!o.out.empty())
    write_file(o.out, canonical);
  else
    emit(canonical);
  return kOk;
}

int cmd_flatten(const sg_context* ctx, const Options& o) {
  auto s = load(ctx, o.path);
  sg_scenario* raw = nullptr;
  check(sg_scenario_flatten(s.get(), &raw));
  Scenario flat(raw);
  char* text = nullptr;
  check(sg_scenario_serialize(flat.get(), &text));
  const auto doc = take(text);
  if (!o.out.empty())
    write_file(o.out, doc);
  else
    emit(doc);
  return kOk;
}

int cmd_classify(const sg_context* ctx, const Options& o) {
  auto s = load(ctx, o.path);
  char* level = nullptr;
  check(sg_scenario_classify(ctx, s.get(), &level));
  const auto l = take(level);
  emit(structured ? json{{"level", l}}.dump() : l);
  return kOk;
}

int cmd_plan(const sg_context* ctx, const Options& o) {
  auto s = load(ctx, o.path);
  char* text = nullptr;
  std::uint64_t total = 0;
  check(sg_plan(ctx, s.get(), &text, &total));
  const auto doc = take(text);
  if (structured) {
    emit(doc);
    return kOk;
  }
  const auto p = json::parse(doc);
  std::printf("total_count %llu\n", static_cast<unsigned long long>(total));
  for (const auto& fp : p["free_params"]) {
    const std::string owner = fp["owner"];
    std::printf("  %s%s%s  %s values\n", owner.c_str(), owner.empty() ? "" : ".",
                fp["key"].get<std::string>().c_str(), fp["cardinality"].dump().c_str());
  }
  return kOk;
}

int cmd_defaults(const sg_context* ctx, const Options& o) {
  auto s = load(ctx, o.path);
  sg_scenario* raw = nullptr;
  check(sg_scenario_apply_defaults(ctx, s.get(), &raw));
  Scenario filled(raw);
  char* text = nullptr;
  check(sg_scenario_serialize(filled.get(), &text));
  const auto doc = take(text);
  if (!o.out.empty())
    write_file(o.out, doc);
  else
    emit(doc);
  return kOk;
}

int cmd_concretize(const sg_context* ctx, const Options& o) {
  if (!o.index && !o.seed) throw ApiFailure{SG_ERR_INVALID_ARGUMENT, "concretize needs --index or --seed"};
  auto s = concretized(ctx, load(ctx, o.path), o);
  char* text = nullptr;
  check(sg_scenario_serialize(s.get(), &text));
  const auto doc = take(text);
  if (!o.out.empty())
    write_file(o.out, doc);
  else
    emit(doc);
  return kOk;
}

int cmd_explain(const Options& o) {
  char* text = nullptr;
  check(sg_explain_rule(o.path.c_str(), &text));
  const auto t = take(text);
  emit(structured ? json{{"rule_id", o.path}, {"text", t}}.dump() : t);
  return kOk;
}

int cmd_export(const sg_context* ctx, const Options& o) {
  auto s = load(ctx, o.path);
  const json options{{"catalog_locations", o.catalog_locations}, {"parameterize", o.parameterize}};
  char* xml = nullptr;
  check(sg_export_xosc(ctx, s.get(), options.dump().c_str(), &xml));
  const auto doc = take(xml);
  if (o.out.empty()) {
    emit(doc);
  } else {
    write_file(o.out, doc);
    if (structured)
      emit(json{{"written", o.out}, {"bytes", doc.size()}}.dump());
    else
      std::printf("wrote %s (%zu bytes)\n", o.out.c_str(), doc.size());
  }
  return kOk;
}

int cmd_verify(const Options& o) {
  char* report = nullptr;
  int ok = 0;
  check(sg_verify_xosc(read_file(o.path).c_str(), &report, &ok));
  const auto text = take(report);
  if (structured) {
    emit(text);
  } else {
    const auto doc = json::parse(text);
    std::printf("%s: %s (%s entities, %s events, %s maneuver groups)\n", o.path.c_str(), ok ? "ok" : "FAILED",
                doc["entity_count"].dump().c_str(), doc["event_count"].dump().c_str(),
                doc["maneuver_group_count"].dump().c_str());
    for (const auto& issue : doc["issues"]) std::printf("  %s\n", issue.get<std::string>().c_str());
  }
  return ok ? kOk : kFailed;
}

int cmd_run(const sg_context* ctx, const Options& o) {
  auto s = concretized(ctx, load(ctx, o.path), o);
  const auto cfg = tick_config(o);
  sg_trace* raw = nullptr;
  check(sg_run(ctx, s.get(), &cfg, &raw));
  Trace trace(raw);
  if (!o.out.empty()) {
    char* text = nullptr;
    check(sg_trace_to_json(trace.get(), &text));
    write_file(o.out, take(text));
  }
  char* line = nullptr;
  if (structured) {
    check(sg_trace_outcome(trace.get(), &line));
  } else {
    check(sg_trace_outcome_line(trace.get(), &line));
  }
  emit(take(line));
  return kOk;
}

int cmd_sweep(const sg_context* ctx, const Options& o) {
  auto s = load(ctx, o.path);
  const auto cfg = tick_config(o);
  char* csv = nullptr;
  check(sg_sweep(ctx, s.get(), &cfg, o.threads, structured ? "json" : "csv", &csv));
  const auto table = take(csv);
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    write_file((fs::path(o.out_dir) / (structured ? "sweep.json" : "sweep.csv")).string(), table);
  }
  emit(table);
  return kOk;
}

std::string catalog_dir(const Options& o) {
  if (!o.catalog.empty()) return o.catalog;
  if (const char* env = std::getenv("SCENGRAPH_CATALOG"); env && *env) return env;
  return "catalog";
}

int cmd_lib_add(const sg_context* ctx, const Options& o) {
  const auto text = read_file(resolve(o.path, ".module.json"));
  char* rev = nullptr;
  check(sg_library_save(ctx, catalog_dir(o).c_str(), text.c_str(), o.expect.empty() ? nullptr : o.expect.c_str(), &rev));
  const auto r = take(rev);
  emit(structured ? json{{"name", json::parse(text).value("name", "")}, {"revision", r}}.dump() : r);
  return kOk;
}

int cmd_lib_list(const Options& o) {
  char* list = nullptr;
  check(sg_library_list(catalog_dir(o).c_str(), &list));
  const auto text = take(list);
  if (structured) {
    emit(text);
    return kOk;
  }
  for (const auto& e : json::parse(text)) {
    std::string roles;
    for (const auto& r : e["roles"]) roles += (roles.empty() ? "" : ",") + r.get<std::string>();
    std::printf("%s %s [%s]\n", e["name"].get<std::string>().c_str(), e["revision"].get<std::string>().c_str(),
                roles.c_str());
  }
  return kOk;
}

int cmd_lib_show(const sg_context* ctx, const Options& o) {
  char* doc = nullptr;
  check(sg_library_load(ctx, catalog_dir(o).c_str(), o.path.c_str(), o.revision.empty() ? nullptr : o.revision.c_str(),
                        &doc));
  emit(take(doc));
  return kOk;
}

void report_failure(const ApiFailure& f) {
  if (structured) {
    std::fprintf(stderr, "%s\n", json{{"error", sg_status_name(f.status)}, {"message", f.message}}.dump().c_str());
  } else {
    std::fprintf(stderr, "error: %s: %s\n", sg_status_name(f.status), f.message.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based driving scenario toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config, "Registry config (JSON) overriding bounds, defaults and actions");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"human", "structured"}));
  app.set_version_flag("--version", std::string(sg_version()));

  auto scenario_arg = [&](CLI::App* c) { c->add_option("scenario", o.path, "Scenario file (.scenario.json optional)")->required(); };
  auto tick_flags = [&](CLI::App* c) {
    c->add_option("--dt", o.dt, "Tick length in seconds");
    c->add_option("--max-time", o.max_time, "Simulation horizon in seconds");
    c->add_option("--stride", o.stride, "Store every n-th world state");
  };

  auto* validate = app.add_subcommand("validate", "Check rules R1-R10");
  scenario_arg(validate);
  validate->add_flag("--strict", o.strict, "Treat warnings as errors");

  auto* fmt = app.add_subcommand("fmt", "Print the canonical form of a scenario");
  scenario_arg(fmt);
  fmt->add_flag("--check", o.check_only, "Exit 1 when the file is not canonical");
  fmt->add_option("--out", o.out, "Write to a file instead of stdout");

  auto* flatten = app.add_subcommand("flatten", "Expand module instances");
  scenario_arg(flatten);
  flatten->add_option("--out", o.out, "Output file");

  auto* classify = app.add_subcommand("classify", "Print the abstraction level the parameters support");
  scenario_arg(classify);

  auto* plan = app.add_subcommand("plan", "Show the concretization plan");
  scenario_arg(plan);

  auto* defaults = app.add_subcommand("defaults", "Fill unset parameters with registry defaults");
  scenario_arg(defaults);
  defaults->add_option("--out", o.out, "Output file");

  auto* concretize = app.add_subcommand("concretize", "Pick one concrete variant of a logical scenario");
  scenario_arg(concretize);
  concretize->add_option("--index", o.index, "Enumeration index");
  concretize->add_option("--seed", o.seed, "Sample with this seed");
  concretize->add_option("--out", o.out, "Output file");

  auto* explain = app.add_subcommand("explain", "Describe a validation rule");
  explain->add_option("rule", o.path, "Rule id, e.g. R5")->required();

  auto* xport = app.add_subcommand("export", "Write an OpenSCENARIO 1.0 file");
  scenario_arg(xport);
  xport->add_option("--out", o.out, "Output .xosc file");
  xport->add_option("--catalog-locations", o.catalog_locations, "kind=path entries (bare path: maneuver catalog)");
  xport->add_option("--parameterize", o.parameterize, "node.key scalars emitted as ParameterDeclarations");

  auto* verify = app.add_subcommand("verify", "Structural check of an .xosc file");
  verify->add_option("file", o.path, ".xosc file")->required();

  auto* run = app.add_subcommand("run", "Execute a scenario");
  scenario_arg(run);
  tick_flags(run);
  run->add_option("--index", o.index, "Enumerate a logical scenario first");
  run->add_option("--seed", o.seed, "Sample a logical scenario first");
  run->add_option("--out", o.out, "Write the trace as JSON");

  auto* sweep = app.add_subcommand("sweep", "Run every variant of a logical scenario");
  scenario_arg(sweep);
  tick_flags(sweep);
  sweep->add_option("--out-dir", o.out_dir, "Directory for the result table");
  sweep->add_option("--threads", o.threads, "Worker threads (0: hardware concurrency)");

  auto* lib = app.add_subcommand("lib", "Module library");
  lib->require_subcommand(1);
  lib->add_option("--catalog", o.catalog, "Catalog directory (default $SCENGRAPH_CATALOG or ./catalog)");
  auto* lib_add = lib->add_subcommand("add", "Store a module definition");
  lib_add->add_option("module", o.path, "Module file (.module.json optional)")->required();
  lib_add->add_option("--expect", o.expect, "Fail unless this is the current latest revision");
  auto* lib_list = lib->add_subcommand("list", "List stored modules");
  auto* lib_show = lib->add_subcommand("show", "Print a stored module");
  lib_show->add_option("name", o.path, "Module name")->required();
  lib_show->add_option("--revision", o.revision, "Revision (default: latest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  structured = o.format == "structured";

  try {
    auto ctx = make_context(o.config);
    if (validate->parsed()) return cmd_validate(ctx.get(), o);
    if (fmt->parsed()) return cmd_fmt(ctx.get(), o);
    if (flatten->parsed()) return cmd_flatten(ctx.get(), o);
    if (classify->parsed()) return cmd_classify(ctx.get(), o);
    if (plan->parsed()) return cmd_plan(ctx.get(), o);
    if (defaults->parsed()) return cmd_defaults(ctx.get(), o);
    if (concretize->parsed()) return cmd_concretize(ctx.get(), o);
    if (explain->parsed()) return cmd_explain(o);
    if (xport->parsed()) return cmd_export(ctx.get(), o);
    if (verify->parsed()) return cmd_verify(o);
    if (run->parsed()) return cmd_run(ctx.get(), o);
    if (sweep->parsed()) return cmd_sweep(ctx.get(), o);
    if (lib_add->parsed()) return cmd_lib_add(ctx.get(), o);
    if (lib_list->parsed()) return cmd_lib_list(o);
    if (lib_show->parsed()) return cmd_lib_show(ctx.get(), o);
  } catch (const ApiFailure& f) {
    report_failure(f);
    return exit_code(f.status);
  } catch (const std::exception& e) {
    report_failure(ApiFailure{SG_ERR_IO, e.what()});
    return kUsage;
  }
  return kUsage;
}
