#include "scengraph/scengraph.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "json_codec.hpp"
#include "scengraph/catalog.hpp"
#include "scengraph/concretizer.hpp"
#include "scengraph/document.hpp"
#include "scengraph/error.hpp"
#include "scengraph/executor.hpp"
#include "scengraph/modules.hpp"
#include "scengraph/sweep.hpp"
#include "scengraph/validation.hpp"
#include "scengraph/xosc.hpp"

struct sg_context {
  scengraph::Registry registry = scengraph::Registry::make_builtin();
};

struct sg_scenario {
  scengraph::ScenarioGraph graph;
};

struct sg_trace {
  scengraph::Trace trace;
};

namespace {

using namespace scengraph;
using json = nlohmann::json;

thread_local std::string last_error;

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
sg_status guard(F&& f) {
  try {
    f();
    last_error.clear();
    return SG_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<sg_status>(static_cast<int>(e.code()) + 1);
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SG_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

const Registry& registry(const sg_context* ctx) { return ctx ? ctx->registry : Registry::builtin(); }

sg_scenario* wrap(ScenarioGraph g) { return new sg_scenario{std::move(g)}; }

TickConfig tick(const sg_tick_config* cfg) {
  TickConfig t;
  if (cfg) {
    t.dt = cfg->dt;
    t.max_time = cfg->max_time;
    t.seed = cfg->seed;
    t.sample_stride = cfg->sample_stride;
  }
  return t;
}

std::vector<ModuleDef> catalog_defs(const char* dir) {
  std::vector<ModuleDef> defs;
  if (!dir) return defs;
  Catalog cat(dir);
  for (const auto& e : cat.list()) {
    auto d = cat.load(e.name, e.revision);
    std::erase_if(defs, [&](const ModuleDef& x) { return x.id == d.id; });
    defs.push_back(std::move(d));
  }
  return defs;
}

ModuleDef define_from_json(const char* module_json, const std::vector<ModuleDef>& known, const Registry& reg) {
  auto def = parse_module(module_json, reg);
  ModuleSpec spec{def.id, def.name, def.elements, def.internal_edges, def.in_ports, def.out_ports, def.actor_roles};
  auto defined = define_module(std::move(spec), known, reg);
  if (!def.revision.empty() && def.revision != defined.revision)
    fail(ErrorCode::Conflict, "module '" + def.name + "' revision does not match its content");
  return defined;
}

}  // namespace

extern "C" {

const char* sg_version(void) { return "0.1.0"; }

const char* sg_status_name(sg_status status) {
  if (status == SG_OK) return "Ok";
  if (status == SG_ERR_INTERNAL) return "InternalError";
  if (status < SG_OK || status > SG_ERR_INTERNAL) return "Unknown";
  return to_string(static_cast<ErrorCode>(static_cast<int>(status) - 1)).data();
}

const char* sg_last_error(void) { return last_error.c_str(); }

void sg_string_free(char* s) { std::free(s); }

sg_status sg_context_create(sg_context** out) {
  return guard([&] {
    need(out, "out");
    *out = new sg_context;
  });
}

sg_status sg_context_load_config(sg_context* ctx, const char* json_text) {
  return guard([&] {
    need(ctx, "ctx");
    need(json_text, "config");
    auto copy = ctx->registry;
    copy.apply_overrides(json_text);
    ctx->registry = std::move(copy);
  });
}

void sg_context_destroy(sg_context* ctx) { delete ctx; }

sg_status sg_scenario_new(const sg_context*, const char* name, const char* map_name, const char* level,
                          sg_scenario** out) {
  return guard([&] {
    need(name, "name");
    need(out, "out");
    auto l = level_from(level ? level : "Functional");
    if (!l) fail(ErrorCode::InvalidArgument, "unknown abstraction level");
    *out = wrap(new_graph(name, map_name ? map_name : "", *l));
  });
}

sg_status sg_scenario_parse(const sg_context* ctx, const char* text, sg_scenario** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = wrap(parse(text, registry(ctx)));
  });
}

sg_status sg_scenario_load(const sg_context* ctx, const char* path, sg_scenario** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = wrap(parse(read_text_file(path), registry(ctx)));
  });
}

sg_status sg_scenario_clone(const sg_scenario* s, sg_scenario** out) {
  return guard([&] {
    need(s, "scenario");
    need(out, "out");
    *out = wrap(s->graph);
  });
}

void sg_scenario_destroy(sg_scenario* s) { delete s; }

sg_status sg_scenario_serialize(const sg_scenario* s, char** out) {
  return guard([&] {
    need(s, "scenario");
    need(out, "out");
    *out = dup(serialize(s->graph));
  });
}

sg_status sg_scenario_save(const sg_scenario* s, const char* path) {
  return guard([&] {
    need(s, "scenario");
    need(path, "path");
    write_text_file(path, serialize(s->graph));
  });
}

sg_status sg_scenario_add_actor(sg_scenario* s, const char* actor_json) {
  return guard([&] {
    need(s, "scenario");
    need(actor_json, "actor");
    add_actor(s->graph, codec::actor_from_json(codec::parse_json(actor_json), "$"));
  });
}

sg_status sg_scenario_add_node(const sg_context* ctx, sg_scenario* s, const char* node_json, char** out_id) {
  return guard([&] {
    need(s, "scenario");
    need(node_json, "node");
    auto doc = codec::parse_json(node_json);
    if (!doc.is_object()) fail(ErrorCode::SchemaError, "$: expected a node object");
    std::optional<NodeId> requested;
    if (doc.contains("id") && doc["id"].is_string()) requested = doc["id"].get<std::string>();
    if (!requested) doc["id"] = "_";
    auto node = codec::node_from_json(doc, "$", registry(ctx));
    auto id = add_node(s->graph, node.kind, std::move(node.payload), registry(ctx), requested);
    if (out_id) *out_id = dup(id);
  });
}

sg_status sg_scenario_connect(sg_scenario* s, const char* from, const char* to, const char* from_port,
                              const char* to_port, char** out_id) {
  return guard([&] {
    need(s, "scenario");
    need(from, "from");
    need(to, "to");
    auto opt = [](const char* p) { return p ? std::optional<std::string>(p) : std::nullopt; };
    auto id = connect(s->graph, from, to, opt(from_port), opt(to_port));
    if (out_id) *out_id = dup(id);
  });
}

sg_status sg_scenario_set_parameter(const sg_context* ctx, sg_scenario* s, const char* node, const char* key,
                                    const char* value_json) {
  return guard([&] {
    need(s, "scenario");
    need(node, "node");
    need(key, "key");
    need(value_json, "value");
    set_parameter(s->graph, node, key, codec::param_from_json(codec::parse_json(value_json), "$"), registry(ctx));
  });
}

sg_status sg_scenario_instantiate(const sg_context* ctx, sg_scenario* s, const char* module_json,
                                  const char* bindings_json, const char* overrides_json, char** out_id) {
  return guard([&] {
    need(s, "scenario");
    need(module_json, "module");
    const auto& reg = registry(ctx);
    // Either a single module document or [module, nested...].
    auto doc = codec::parse_json(module_json);
    std::vector<ModuleDef> nested;
    ModuleDef def;
    if (doc.is_array()) {
      if (doc.empty()) fail(ErrorCode::InvalidArgument, "empty module list");
      for (std::size_t i = 1; i < doc.size(); ++i) nested.push_back(parse_module(doc[i].dump(), reg));
      def = parse_module(doc[0].dump(), reg);
    } else {
      def = parse_module(module_json, reg);
    }
    std::map<std::string, ActorId> bindings;
    if (bindings_json) {
      auto b = codec::parse_json(bindings_json);
      if (!b.is_object()) fail(ErrorCode::InvalidArgument, "bindings must be an object");
      for (const auto& [role, actor] : b.items()) bindings[role] = actor.get<std::string>();
    }
    std::vector<ParamOverride> overrides;
    if (overrides_json) {
      auto o = codec::parse_json(overrides_json);
      if (!o.is_array()) fail(ErrorCode::InvalidArgument, "overrides must be a list");
      for (const auto& e : o)
        overrides.push_back(ParamOverride{e.at("element").get<std::string>(), e.at("key").get<std::string>(),
                                          codec::param_from_json(e.at("value"), "$.value")});
    }
    auto id = instantiate(s->graph, def, bindings, overrides, nested, reg);
    if (out_id) *out_id = dup(id);
  });
}

sg_status sg_scenario_flatten(const sg_scenario* s, sg_scenario** out) {
  return guard([&] {
    need(s, "scenario");
    need(out, "out");
    *out = wrap(flatten(s->graph));
  });
}

sg_status sg_scenario_apply_defaults(const sg_context* ctx, const sg_scenario* s, sg_scenario** out) {
  return guard([&] {
    need(s, "scenario");
    need(out, "out");
    *out = wrap(apply_defaults(s->graph, registry(ctx)));
  });
}

sg_status sg_scenario_classify(const sg_context* ctx, const sg_scenario* s, char** out_level) {
  return guard([&] {
    need(s, "scenario");
    need(out_level, "out");
    *out_level = dup(std::string(to_string(classify_level(s->graph, registry(ctx)))));
  });
}

sg_status sg_validate(const sg_context* ctx, const sg_scenario* s, int strict, char** out_report, int* out_is_valid) {
  return guard([&] {
    need(s, "scenario");
    auto report = validate(s->graph, registry(ctx), ValidationOptions{strict != 0});
    if (out_report) *out_report = dup(report_to_json(report));
    if (out_is_valid) *out_is_valid = report.is_valid ? 1 : 0;
  });
}

sg_status sg_explain_rule(const char* rule_id, char** out) {
  return guard([&] {
    need(rule_id, "rule id");
    need(out, "out");
    *out = dup(explain(rule_id));
  });
}

sg_status sg_plan(const sg_context* ctx, const sg_scenario* s, char** out_plan, uint64_t* out_total) {
  return guard([&] {
    need(s, "scenario");
    auto p = plan(s->graph, registry(ctx));
    if (out_plan) *out_plan = dup(plan_to_json(p));
    if (out_total) *out_total = p.total_count;
  });
}

sg_status sg_enumerate(const sg_context* ctx, const sg_scenario* s, uint64_t index, sg_scenario** out) {
  return guard([&] {
    need(s, "scenario");
    need(out, "out");
    *out = wrap(enumerate(s->graph, plan(s->graph, registry(ctx)), index));
  });
}

sg_status sg_sample(const sg_context* ctx, const sg_scenario* s, uint64_t seed, sg_scenario** out) {
  return guard([&] {
    need(s, "scenario");
    need(out, "out");
    *out = wrap(sample(s->graph, plan(s->graph, registry(ctx)), seed));
  });
}

sg_status sg_export_xosc(const sg_context* ctx, const sg_scenario* s, const char* options_json, char** out_xml) {
  return guard([&] {
    need(s, "scenario");
    need(out_xml, "out");
    ExportOptions options;
    if (options_json) {
      auto doc = codec::parse_json(options_json);
      if (!doc.is_object()) fail(ErrorCode::InvalidArgument, "export options must be an object");
      try {
        options.catalog_locations =
            parse_catalog_locations(doc.value("catalog_locations", std::vector<std::string>{}));
        options.parameterize = doc.value("parameterize", std::vector<std::string>{});
      } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("export options: ") + e.what());
      }
    }
    *out_xml = dup(export_xosc(s->graph, options, registry(ctx)));
  });
}

sg_status sg_verify_xosc(const char* xml, char** out_report, int* out_ok) {
  return guard([&] {
    need(xml, "xml");
    auto r = verify_structure(xml);
    if (out_report) *out_report = dup(xosc_report_to_json(r));
    if (out_ok) *out_ok = r.ok ? 1 : 0;
  });
}

void sg_tick_config_default(sg_tick_config* cfg) {
  if (!cfg) return;
  const TickConfig t;
  *cfg = sg_tick_config{t.dt, t.max_time, t.seed, t.sample_stride};
}

sg_status sg_run(const sg_context* ctx, const sg_scenario* s, const sg_tick_config* cfg, sg_trace** out) {
  return guard([&] {
    need(s, "scenario");
    need(out, "out");
    *out = new sg_trace{run(s->graph, tick(cfg), registry(ctx))};
  });
}

sg_status sg_trace_to_json(const sg_trace* t, char** out) {
  return guard([&] {
    need(t, "trace");
    need(out, "out");
    *out = dup(trace_to_json(t->trace));
  });
}

sg_status sg_trace_outcome(const sg_trace* t, char** out_summary) {
  return guard([&] {
    need(t, "trace");
    need(out_summary, "out");
    *out_summary = dup(summary_to_json(outcome(t->trace)));
  });
}

sg_status sg_trace_outcome_line(const sg_trace* t, char** out) {
  return guard([&] {
    need(t, "trace");
    need(out, "out");
    *out = dup(summary_line(outcome(t->trace)));
  });
}

sg_status sg_trace_replay(const sg_trace* t, double time, char** out_state) {
  return guard([&] {
    need(t, "trace");
    need(out_state, "out");
    *out_state = dup(world_state_to_json(replay_states(t->trace, time)));
  });
}

void sg_trace_destroy(sg_trace* t) { delete t; }

sg_status sg_sweep(const sg_context* ctx, const sg_scenario* s, const sg_tick_config* cfg, unsigned threads,
                   const char* format, char** out) {
  return guard([&] {
    need(s, "scenario");
    need(out, "out");
    const std::string fmt = format ? format : "csv";
    if (fmt != "csv" && fmt != "json") fail(ErrorCode::InvalidArgument, "sweep format must be csv or json");
    auto rows = sweep(s->graph, tick(cfg), threads, registry(ctx));
    if (fmt == "csv") {
      *out = dup(sweep_to_csv(rows));
      return;
    }
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      auto row = nlohmann::ordered_json::parse(summary_to_json(r.summary));
      row["index"] = r.index;
      row["outcome"] = outcome_label(r.summary);
      doc.push_back(std::move(row));
    }
    *out = dup(doc.dump(2) + "\n");
  });
}

sg_status sg_module_define(const sg_context* ctx, const char* catalog_dir, const char* module_json, char** out_module) {
  return guard([&] {
    need(module_json, "module");
    need(out_module, "out");
    const auto& reg = registry(ctx);
    *out_module = dup(serialize_module(define_from_json(module_json, catalog_defs(catalog_dir), reg)));
  });
}

sg_status sg_library_save(const sg_context* ctx, const char* catalog_dir, const char* module_json,
                          const char* expected_latest, char** out_revision) {
  return guard([&] {
    need(catalog_dir, "catalog directory");
    need(module_json, "module");
    const auto& reg = registry(ctx);
    auto def = define_from_json(module_json, catalog_defs(catalog_dir), reg);
    auto rev = Catalog(catalog_dir).save(def, expected_latest ? std::optional<std::string>(expected_latest)
                                                              : std::nullopt);
    if (out_revision) *out_revision = dup(rev);
  });
}

sg_status sg_library_load(const sg_context* ctx, const char* catalog_dir, const char* name, const char* revision,
                          char** out_module) {
  return guard([&] {
    need(catalog_dir, "catalog directory");
    need(name, "name");
    need(out_module, "out");
    (void)ctx;
    auto def = Catalog(catalog_dir).load(name, revision ? std::optional<std::string>(revision) : std::nullopt);
    *out_module = dup(serialize_module(def));
  });
}

sg_status sg_library_list(const char* catalog_dir, char** out) {
  return guard([&] {
    need(catalog_dir, "catalog directory");
    need(out, "out");
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& e : Catalog(catalog_dir).list())
      doc.push_back(nlohmann::ordered_json{{"name", e.name}, {"revision", e.revision}, {"roles", e.roles}});
    *out = dup(doc.dump(2) + "\n");
  });
}

}  // extern "C"
