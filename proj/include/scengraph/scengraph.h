#pragma once

/* C interface to the scenario toolkit. Every call returns an sg_status;
 * on failure sg_last_error() describes the problem (thread local). Strings
 * returned through char** are owned by the caller and released with
 * sg_string_free. Structured values cross the boundary as JSON text in the
 * same shapes the CLI prints. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(SG_BUILDING_LIBRARY)
#define SG_API __attribute__((visibility("default")))
#else
#define SG_API
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_ERR_INVALID_ARGUMENT,
  SG_ERR_DUPLICATE_TERMINAL,
  SG_ERR_UNKNOWN_ACTION,
  SG_ERR_UNKNOWN_NODE,
  SG_ERR_UNKNOWN_PORT,
  SG_ERR_DUPLICATE_EDGE,
  SG_ERR_UNKNOWN_PARAMETER,
  SG_ERR_PARSE,
  SG_ERR_SCHEMA,
  SG_ERR_UNKNOWN_RULE,
  SG_ERR_ILLEGAL_ELEMENT,
  SG_ERR_RECURSIVE_MODULE,
  SG_ERR_UNBOUND_ROLE,
  SG_ERR_BINDING_MISMATCH,
  SG_ERR_INSTANCE_CONFLICT,
  SG_ERR_DEPTH_EXCEEDED,
  SG_ERR_UNKNOWN_MODULE,
  SG_ERR_CONFLICT,
  SG_ERR_NOT_FOUND,
  SG_ERR_MISSING_DEFAULT,
  SG_ERR_LEVEL,
  SG_ERR_OUT_OF_RANGE,
  SG_ERR_INVALID_SCENARIO,
  SG_ERR_UNSUPPORTED_ACTION,
  SG_ERR_INVALID_CONFIG,
  SG_ERR_IO,
  SG_ERR_INTERNAL
} sg_status;

typedef struct sg_context sg_context;
typedef struct sg_scenario sg_scenario;
typedef struct sg_trace sg_trace;

typedef struct sg_tick_config {
  double dt;
  double max_time;
  uint64_t seed;
  int sample_stride;
} sg_tick_config;

SG_API const char* sg_version(void);
/* "InvalidArgument", "LevelError", ... */
SG_API const char* sg_status_name(sg_status status);
SG_API const char* sg_last_error(void);
SG_API void sg_string_free(char* s);

/* Context: action registry plus configuration. */
SG_API sg_status sg_context_create(sg_context** out);
/* Overlays a registry config document (categories, defaults, actions). */
SG_API sg_status sg_context_load_config(sg_context* ctx, const char* json_text);
SG_API void sg_context_destroy(sg_context* ctx);

/* Scenarios. level is "Functional", "Logical" or "Concrete". */
SG_API sg_status sg_scenario_new(const sg_context* ctx, const char* name, const char* map_name, const char* level,
                                 sg_scenario** out);
SG_API sg_status sg_scenario_parse(const sg_context* ctx, const char* text, sg_scenario** out);
SG_API sg_status sg_scenario_load(const sg_context* ctx, const char* path, sg_scenario** out);
SG_API sg_status sg_scenario_clone(const sg_scenario* s, sg_scenario** out);
SG_API void sg_scenario_destroy(sg_scenario* s);
SG_API sg_status sg_scenario_serialize(const sg_scenario* s, char** out);
SG_API sg_status sg_scenario_save(const sg_scenario* s, const char* path);
/* {"id","name","category","model","is_ego","start_pose":{x,y,heading},"start_speed"} */
SG_API sg_status sg_scenario_add_actor(sg_scenario* s, const char* actor_json);
/* Node document as stored in the "nodes" array; "id" is optional. */
SG_API sg_status sg_scenario_add_node(const sg_context* ctx, sg_scenario* s, const char* node_json, char** out_id);
/* from_port/to_port may be NULL. */
SG_API sg_status sg_scenario_connect(sg_scenario* s, const char* from, const char* to, const char* from_port,
                                     const char* to_port, char** out_id);
SG_API sg_status sg_scenario_set_parameter(const sg_context* ctx, sg_scenario* s, const char* node, const char* key,
                                           const char* value_json);
/* Adds an instance of a module document. bindings_json maps role -> actor;
 * overrides_json is a list of {element,key,value} (may be NULL). */
SG_API sg_status sg_scenario_instantiate(const sg_context* ctx, sg_scenario* s, const char* module_json,
                                         const char* bindings_json, const char* overrides_json, char** out_id);
SG_API sg_status sg_scenario_flatten(const sg_scenario* s, sg_scenario** out);
SG_API sg_status sg_scenario_apply_defaults(const sg_context* ctx, const sg_scenario* s, sg_scenario** out);
SG_API sg_status sg_scenario_classify(const sg_context* ctx, const sg_scenario* s, char** out_level);

/* Validation. The report is {"is_valid":bool,"findings":[...]}. */
SG_API sg_status sg_validate(const sg_context* ctx, const sg_scenario* s, int strict, char** out_report,
                             int* out_is_valid);
SG_API sg_status sg_explain_rule(const char* rule_id, char** out);

/* Concretization. */
SG_API sg_status sg_plan(const sg_context* ctx, const sg_scenario* s, char** out_plan, uint64_t* out_total);
SG_API sg_status sg_enumerate(const sg_context* ctx, const sg_scenario* s, uint64_t index, sg_scenario** out);
SG_API sg_status sg_sample(const sg_context* ctx, const sg_scenario* s, uint64_t seed, sg_scenario** out);

/* Export. options_json (may be NULL):
 * {"catalog_locations":["kind=path",...],"parameterize":["node.key",...]} */
SG_API sg_status sg_export_xosc(const sg_context* ctx, const sg_scenario* s, const char* options_json, char** out_xml);
SG_API sg_status sg_verify_xosc(const char* xml, char** out_report, int* out_ok);

/* Execution. */
SG_API void sg_tick_config_default(sg_tick_config* cfg);
SG_API sg_status sg_run(const sg_context* ctx, const sg_scenario* s, const sg_tick_config* cfg, sg_trace** out);
SG_API sg_status sg_trace_to_json(const sg_trace* t, char** out);
SG_API sg_status sg_trace_outcome(const sg_trace* t, char** out_summary);
/* e.g. "Collision(ego,bike) at t=5.35, min distance 2.1 m" */
SG_API sg_status sg_trace_outcome_line(const sg_trace* t, char** out);
SG_API sg_status sg_trace_replay(const sg_trace* t, double time, char** out_state);
SG_API void sg_trace_destroy(sg_trace* t);

/* Runs every enumeration index; format is "csv" or "json". threads = 0
 * uses the hardware concurrency. */
SG_API sg_status sg_sweep(const sg_context* ctx, const sg_scenario* s, const sg_tick_config* cfg, unsigned threads,
                          const char* format, char** out);

/* Module library on disk. expected_latest and revision may be NULL. */
SG_API sg_status sg_module_define(const sg_context* ctx, const char* catalog_dir, const char* module_json,
                                  char** out_module);
SG_API sg_status sg_library_save(const sg_context* ctx, const char* catalog_dir, const char* module_json,
                                 const char* expected_latest, char** out_revision);
SG_API sg_status sg_library_load(const sg_context* ctx, const char* catalog_dir, const char* name,
                                 const char* revision, char** out_module);
SG_API sg_status sg_library_list(const char* catalog_dir, char** out);

#ifdef __cplusplus
}
#endif
