#include "scengraph/document.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "json_codec.hpp"
#include "scengraph/error.hpp"
#include "scengraph/modules.hpp"

namespace scengraph {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

// Encoding ------------------------------------------------------------------

namespace codec {

ojson literal_to_json(const Literal& l) {
  if (const auto* d = std::get_if<double>(&l)) return *d;
  return std::get<std::string>(l);
}

ojson param_to_json(const ParamValue& v) {
  if (v.is_unset()) return nullptr;
  ojson out = ojson::object();
  if (v.is_scalar()) {
    out["scalar"] = literal_to_json(v.as_scalar().value);
  } else if (v.is_range()) {
    const auto& r = v.as_range();
    out["range"] = ojson::array({r.min, r.max, r.step});
  } else {
    ojson arr = ojson::array();
    for (const auto& l : v.as_set().values) arr.push_back(literal_to_json(l));
    out["set"] = std::move(arr);
  }
  out["unit"] = v.unit();
  return out;
}

ojson params_to_json(const std::map<std::string, ParamValue>& params) {
  ojson out = ojson::object();
  for (const auto& [k, v] : params) out[k] = param_to_json(v);
  return out;
}

ojson node_to_json(const GraphNode& n) {
  ojson out = ojson::object();
  out["id"] = n.id;
  out["kind"] = to_string(n.kind);
  switch (n.kind) {
    case NodeKind::Maneuver:
    case NodeKind::Condition: {
      const auto& a = n.action();
      out["action_type"] = a.action_type;
      out["category"] = to_string(a.category);
      out["ref_actor"] = a.reference_actor;
      out["target_actor"] = a.target_actor ? ojson(*a.target_actor) : ojson(nullptr);
      out["params"] = params_to_json(a.params);
      break;
    }
    case NodeKind::Join: out["policy"] = to_string(n.join().policy()); break;
    case NodeKind::ModuleInstance: {
      const auto& m = n.instance();
      out["module"] = m.def_id;
      ojson bindings = ojson::object();
      for (const auto& [role, actor] : m.actor_bindings) bindings[role] = actor;
      out["bindings"] = std::move(bindings);
      ojson overrides = ojson::array();
      for (const auto& o : m.param_overrides)
        overrides.push_back(ojson{{"element", o.element}, {"key", o.key}, {"value", param_to_json(o.value)}});
      out["overrides"] = std::move(overrides);
      break;
    }
    default: break;
  }
  return out;
}

ojson edge_to_json(const Edge& e) {
  ojson out = ojson::object();
  out["id"] = e.id;
  out["from"] = e.from;
  if (e.from_port) out["from_port"] = *e.from_port;
  out["to"] = e.to;
  if (e.to_port) out["to_port"] = *e.to_port;
  return out;
}

ojson ports_to_json(const std::vector<Port>& ports, const char* element_key) {
  ojson arr = ojson::array();
  for (const auto& p : ports) arr.push_back(ojson{{"name", p.name}, {element_key, p.element}});
  return arr;
}

ojson module_to_json(const ModuleDef& d, bool with_revision) {
  ojson out = ojson::object();
  out["id"] = d.id;
  out["name"] = d.name;
  if (with_revision) out["revision"] = d.revision;
  out["roles"] = d.actor_roles;
  out["in_ports"] = ports_to_json(d.in_ports, "entry");
  out["out_ports"] = ports_to_json(d.out_ports, "exit");
  ojson elements = ojson::array();
  for (const auto& e : d.elements) elements.push_back(node_to_json(e));
  out["elements"] = std::move(elements);
  ojson edges = ojson::array();
  for (const auto& e : d.internal_edges) edges.push_back(edge_to_json(e));
  out["edges"] = std::move(edges);
  return out;
}

ojson actor_to_json(const Actor& a) {
  ojson out = ojson::object();
  out["id"] = a.id;
  out["name"] = a.name;
  out["category"] = to_string(a.category);
  out["model"] = a.model;
  out["is_ego"] = a.is_ego;
  out["start_pose"] = ojson{{"x", param_to_json(a.start_pose.x)},
                            {"y", param_to_json(a.start_pose.y)},
                            {"heading", param_to_json(a.start_pose.heading)}};
  out["start_speed"] = param_to_json(a.start_speed);
  return out;
}

ojson graph_to_json(const ScenarioGraph& g) {
  ojson out = ojson::object();
  out["format_version"] = std::string(kFormatVersion);
  out["id"] = g.id;
  out["name"] = g.name;
  out["map"] = g.map_name;
  out["abstraction_level"] = to_string(g.abstraction_level);
  out["environment"] = params_to_json(g.environment);
  ojson actors = ojson::array();
  for (const auto& a : g.actors) actors.push_back(actor_to_json(a));
  out["actors"] = std::move(actors);
  ojson nodes = ojson::array();
  for (const auto& n : g.nodes) nodes.push_back(node_to_json(n));
  out["nodes"] = std::move(nodes);
  ojson edges = ojson::array();
  for (const auto& e : g.edges) edges.push_back(edge_to_json(e));
  out["edges"] = std::move(edges);
  ojson defs = ojson::array();
  for (const auto& d : g.module_defs) defs.push_back(module_to_json(d, true));
  out["module_defs"] = std::move(defs);
  return out;
}

// Decoding ------------------------------------------------------------------

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& why) {
  fail(ErrorCode::SchemaError, path + ": " + why);
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) schema(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema(path, std::string("missing field '") + key + "'");
  return *it;
}

std::string str(const json& obj, const char* key, const std::string& path) {
  const auto& v = field(obj, key, path);
  if (!v.is_string()) schema(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::string opt_str(const json& obj, const char* key, const std::string& path, std::string fallback = {}) {
  if (!obj.contains(key) || obj[key].is_null()) return fallback;
  if (!obj[key].is_string()) schema(path + "." + key, "expected a string");
  return obj[key].get<std::string>();
}

const json& arr(const json& obj, const char* key, const std::string& path, bool optional = false) {
  static const json empty = json::array();
  if (optional && (!obj.contains(key) || obj[key].is_null())) return empty;
  const auto& v = field(obj, key, path);
  if (!v.is_array()) schema(path + "." + key, "expected an array");
  return v;
}

Literal literal_from(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  schema(path, "expected a number or string");
}

double number_from(const json& v, const std::string& path) {
  if (!v.is_number()) schema(path, "expected a number");
  return v.get<double>();
}

}  // namespace

ParamValue param_from_json(const json& v, const std::string& path) {
  if (v.is_null()) return Unset{};
  if (!v.is_object()) schema(path, "expected a parameter object or null");
  const std::string unit = opt_str(v, "unit", path);
  try {
    if (v.contains("scalar")) return Scalar{literal_from(v["scalar"], path + ".scalar"), unit};
    if (v.contains("range")) {
      const auto& r = v["range"];
      if (!r.is_array() || r.size() != 3) schema(path + ".range", "expected [min, max, step]");
      return ParamValue(Range{number_from(r[0], path + ".range[0]"), number_from(r[1], path + ".range[1]"),
                              number_from(r[2], path + ".range[2]"), unit});
    }
    if (v.contains("set")) {
      const auto& s = v["set"];
      if (!s.is_array()) schema(path + ".set", "expected an array");
      DiscreteSet ds;
      ds.unit = unit;
      for (std::size_t i = 0; i < s.size(); ++i) ds.values.push_back(literal_from(s[i], path + ".set"));
      return ParamValue(std::move(ds));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) schema(path, e.what());
    throw;
  }
  schema(path, "expected one of scalar/range/set");
}

std::map<std::string, ParamValue> params_from_json(const json& v, const std::string& path) {
  std::map<std::string, ParamValue> out;
  if (v.is_null()) return out;
  if (!v.is_object()) schema(path, "expected an object");
  for (const auto& [k, pv] : v.items()) out[k] = param_from_json(pv, path + "." + k);
  return out;
}

GraphNode node_from_json(const json& v, const std::string& path, const Registry& reg) {
  GraphNode n;
  n.id = str(v, "id", path);
  if (n.id.empty()) schema(path + ".id", "must not be empty");
  auto kind = node_kind_from(str(v, "kind", path));
  if (!kind) schema(path + ".kind", "unknown node kind");
  n.kind = *kind;
  switch (n.kind) {
    case NodeKind::RootNode:
    case NodeKind::EndNode: n.payload = Terminal{}; break;
    case NodeKind::Maneuver:
    case NodeKind::Condition: {
      ActionNode a;
      a.action_type = str(v, "action_type", path);
      const auto* spec = reg.find(a.action_type);
      if (!spec) schema(path + ".action_type", "unknown action type '" + a.action_type + "'");
      if ((spec->category == ActionCategory::Condition) != (n.kind == NodeKind::Condition))
        schema(path + ".kind", a.action_type + " does not match node kind");
      a.category = spec->category;
      if (v.contains("category") && !v["category"].is_null()) {
        auto cat = action_category_from(str(v, "category", path));
        if (!cat || *cat != spec->category) schema(path + ".category", "does not match the action registry");
      }
      a.reference_actor = opt_str(v, "ref_actor", path);
      if (v.contains("target_actor") && !v["target_actor"].is_null()) a.target_actor = str(v, "target_actor", path);
      a.params = params_from_json(v.contains("params") ? v["params"] : json(nullptr), path + ".params");
      for (const auto& [key, value] : a.params) {
        const auto* ps = spec->param(key);
        if (!ps) schema(path + ".params." + key, a.action_type + " declares no such parameter");
        try {
          check_param_value(*ps, value, a.action_type);
        } catch (const Error& e) {
          schema(path + ".params." + key, e.what());
        }
      }
      n.payload = std::move(a);
      break;
    }
    case NodeKind::Join: {
      auto policy = join_policy_from(str(v, "policy", path));
      if (!policy) schema(path + ".policy", "expected AllFinished or OneFinished");
      n.payload = JoinNode(*policy);
      break;
    }
    case NodeKind::ModuleInstance: {
      ModuleInstance m;
      m.def_id = str(v, "module", path);
      if (v.contains("bindings")) {
        if (!v["bindings"].is_object()) schema(path + ".bindings", "expected an object");
        for (const auto& [role, actor] : v["bindings"].items()) {
          if (!actor.is_string()) schema(path + ".bindings." + role, "expected a string");
          m.actor_bindings[role] = actor.get<std::string>();
        }
      }
      const auto& ovs = arr(v, "overrides", path, true);
      for (std::size_t i = 0; i < ovs.size(); ++i) {
        const std::string p = path + ".overrides[" + std::to_string(i) + "]";
        m.param_overrides.push_back(
            ParamOverride{str(ovs[i], "element", p), str(ovs[i], "key", p), param_from_json(field(ovs[i], "value", p), p)});
      }
      n.payload = std::move(m);
      break;
    }
  }
  return n;
}

std::vector<Edge> edges_from_json(const json& list, const std::string& path, const std::set<std::string>& node_ids) {
  std::vector<Edge> edges;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const auto& v = list[i];
    Edge e;
    e.id = opt_str(v, "id", p, "e" + std::to_string(i + 1));
    e.from = str(v, "from", p);
    e.to = str(v, "to", p);
    if (v.contains("from_port") && !v["from_port"].is_null()) e.from_port = str(v, "from_port", p);
    if (v.contains("to_port") && !v["to_port"].is_null()) e.to_port = str(v, "to_port", p);
    if (!node_ids.count(e.from)) schema(p + ".from", "unknown node '" + e.from + "'");
    if (!node_ids.count(e.to)) schema(p + ".to", "unknown node '" + e.to + "'");
    if (e.from == e.to) schema(p, "self-loop on '" + e.from + "'");
    if (!ids.insert(e.id).second) schema(p + ".id", "duplicate edge id '" + e.id + "'");
    for (const auto& other : edges)
      if (other.from == e.from && other.to == e.to && other.from_port == e.from_port && other.to_port == e.to_port)
        schema(p, "duplicate edge " + e.from + " -> " + e.to);
    edges.push_back(std::move(e));
  }
  return edges;
}

std::vector<Port> ports_from_json(const json& list, const char* element_key, const std::string& path) {
  std::vector<Port> ports;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    ports.push_back(Port{str(list[i], "name", p), str(list[i], element_key, p)});
  }
  return ports;
}

ModuleDef module_from_json(const json& v, const std::string& path, const Registry& reg) {
  ModuleDef d;
  d.name = str(v, "name", path);
  d.id = opt_str(v, "id", path, d.name);
  for (const auto& r : arr(v, "roles", path, true)) {
    if (!r.is_string()) schema(path + ".roles", "expected strings");
    d.actor_roles.push_back(r.get<std::string>());
  }
  d.in_ports = ports_from_json(arr(v, "in_ports", path), "entry", path + ".in_ports");
  d.out_ports = ports_from_json(arr(v, "out_ports", path), "exit", path + ".out_ports");
  std::set<std::string> ids;
  const auto& elements = arr(v, "elements", path);
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const std::string p = path + ".elements[" + std::to_string(i) + "]";
    auto n = node_from_json(elements[i], p, reg);
    if (n.kind == NodeKind::RootNode || n.kind == NodeKind::EndNode)
      schema(p + ".kind", "root and end nodes cannot be part of a module");
    if (!ids.insert(n.id).second) schema(p + ".id", "duplicate element id '" + n.id + "'");
    d.elements.push_back(std::move(n));
  }
  d.internal_edges = edges_from_json(arr(v, "edges", path, true), path + ".edges", ids);
  for (const auto* ports : {&d.in_ports, &d.out_ports})
    for (const auto& port : *ports)
      if (!ids.count(port.element)) schema(path + ".ports", "port '" + port.name + "' names unknown element");
  const std::string computed = compute_revision(d);
  d.revision = opt_str(v, "revision", path);
  if (d.revision.empty())
    d.revision = computed;
  else if (d.revision != computed)
    schema(path + ".revision", "stale revision '" + d.revision + "' (content hash is " + computed + ")");
  return d;
}

Actor actor_from_json(const json& a, const std::string& p) {
  if (!a.is_object()) schema(p, "expected an actor object");
  Actor actor;
  actor.id = str(a, "id", p);
  actor.name = opt_str(a, "name", p, actor.id);
  auto cat = actor_category_from(str(a, "category", p));
  if (!cat) schema(p + ".category", "expected Pedestrian, TwoWheeler or FourWheeler");
  actor.category = *cat;
  actor.model = opt_str(a, "model", p);
  if (a.contains("is_ego")) {
    if (!a["is_ego"].is_boolean()) schema(p + ".is_ego", "expected a boolean");
    actor.is_ego = a["is_ego"].get<bool>();
  }
  if (a.contains("start_pose") && !a["start_pose"].is_null()) {
    const auto& pose = a["start_pose"];
    if (!pose.is_object()) schema(p + ".start_pose", "expected an object");
    auto comp = [&](const char* k) {
      return pose.contains(k) ? param_from_json(pose[k], p + ".start_pose." + k) : ParamValue{};
    };
    actor.start_pose = Pose2D{comp("x"), comp("y"), comp("heading")};
  }
  if (a.contains("start_speed")) actor.start_speed = param_from_json(a["start_speed"], p + ".start_speed");
  return actor;
}

ScenarioGraph graph_from_json(const json& v, const Registry& reg) {
  const std::string path = "$";
  if (!v.is_object()) schema(path, "expected a scenario object");
  const std::string version = str(v, "format_version", path);
  if (version != kFormatVersion) schema(path + ".format_version", "unsupported version '" + version + "'");
  ScenarioGraph g;
  g.name = str(v, "name", path);
  g.id = opt_str(v, "id", path, g.name);
  g.map_name = str(v, "map", path);
  auto level = level_from(str(v, "abstraction_level", path));
  if (!level) schema(path + ".abstraction_level", "expected Functional, Logical or Concrete");
  g.abstraction_level = *level;
  g.environment = params_from_json(v.contains("environment") ? v["environment"] : json(nullptr), path + ".environment");

  const auto& actors = arr(v, "actors", path);
  bool ego_seen = false;
  for (std::size_t i = 0; i < actors.size(); ++i) {
    const std::string p = path + ".actors[" + std::to_string(i) + "]";
    Actor actor = actor_from_json(actors[i], p);
    if (g.find_actor(actor.id)) schema(p + ".id", "duplicate actor id '" + actor.id + "'");
    if (actor.is_ego && ego_seen) schema(p + ".is_ego", "more than one ego actor");
    ego_seen = ego_seen || actor.is_ego;
    g.actors.push_back(std::move(actor));
  }

  std::set<std::string> ids;
  const auto& nodes = arr(v, "nodes", path);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = path + ".nodes[" + std::to_string(i) + "]";
    auto n = node_from_json(nodes[i], p, reg);
    if (!ids.insert(n.id).second) schema(p + ".id", "duplicate node id '" + n.id + "'");
    g.nodes.push_back(std::move(n));
  }
  g.edges = edges_from_json(arr(v, "edges", path), path + ".edges", ids);

  const auto& defs = arr(v, "module_defs", path, true);
  for (std::size_t i = 0; i < defs.size(); ++i) {
    const std::string p = path + ".module_defs[" + std::to_string(i) + "]";
    auto d = module_from_json(defs[i], p, reg);
    if (g.find_module(d.id)) schema(p + ".id", "duplicate module id '" + d.id + "'");
    g.module_defs.push_back(std::move(d));
  }
  auto instances = all_instance_ids(g);
  std::sort(instances.begin(), instances.end());
  auto dup = std::adjacent_find(instances.begin(), instances.end());
  if (dup != instances.end()) schema(path, "module instance '" + *dup + "' has more than one parent");
  return g;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Map the byte offset to line:column.
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::ParseError,
         "malformed document at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
}

}  // namespace codec

std::string serialize(const ScenarioGraph& g) { return codec::graph_to_json(g).dump(2) + "\n"; }

ScenarioGraph parse(std::string_view text, const Registry& reg) {
  return codec::graph_from_json(codec::parse_json(text), reg);
}

std::string serialize_module(const ModuleDef& def) { return codec::module_to_json(def, true).dump(2) + "\n"; }

ModuleDef parse_module(std::string_view text, const Registry& reg) {
  return codec::module_from_json(codec::parse_json(text), "$", reg);
}

std::string module_content(const ModuleDef& def) { return codec::module_to_json(def, false).dump(); }

std::string read_text_file(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) fail(ErrorCode::NotFound, "no such file: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::IoError, "write failed: " + path);
}

}  // namespace scengraph
