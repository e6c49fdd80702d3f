#include "scengraph/modules.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>

#include <openssl/sha.h>

#include "scengraph/document.hpp"
#include "scengraph/error.hpp"

namespace scengraph {

std::string compute_revision(const ModuleDef& def) {
  const std::string content = module_content(def);
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(content.data()), content.size(), digest);
  std::string hex;
  char buf[3];
  for (int i = 0; i < 8; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

bool has_instances(const ScenarioGraph& g) {
  return std::any_of(g.nodes.begin(), g.nodes.end(),
                     [](const GraphNode& n) { return n.kind == NodeKind::ModuleInstance; });
}

namespace {

const ModuleDef* find_def(std::span<const ModuleDef> defs, std::string_view id) {
  for (const auto& d : defs)
    if (d.id == id) return &d;
  return nullptr;
}

/// True if `from` reaches `target` through nested instances of `defs`.
bool reaches(std::span<const ModuleDef> defs, const std::string& from, const std::string& target,
             std::set<std::string>& seen) {
  if (from == target) return true;
  if (!seen.insert(from).second) return false;
  const auto* d = find_def(defs, from);
  if (!d) return false;
  for (const auto& e : d->elements)
    if (e.kind == NodeKind::ModuleInstance && reaches(defs, e.instance().def_id, target, seen)) return true;
  return false;
}

std::vector<EdgeId> assign_edge_ids(std::vector<Edge>& edges) {
  std::vector<EdgeId> ids;
  std::set<EdgeId> used;
  for (const auto& e : edges)
    if (!e.id.empty()) used.insert(e.id);
  std::size_t k = 1;
  for (auto& e : edges) {
    if (e.id.empty()) {
      while (used.count("e" + std::to_string(k))) ++k;
      e.id = "e" + std::to_string(k);
      used.insert(e.id);
    }
    ids.push_back(e.id);
  }
  return ids;
}

}  // namespace

ModuleDef define_module(ModuleSpec spec, std::span<const ModuleDef> known, const Registry& reg) {
  if (spec.name.empty()) fail(ErrorCode::InvalidArgument, "module name must not be empty");
  ModuleDef def;
  def.id = spec.id.empty() ? spec.name : spec.id;
  def.name = spec.name;
  def.actor_roles = spec.roles;
  const std::set<std::string> roles(spec.roles.begin(), spec.roles.end());
  if (roles.size() != spec.roles.size()) fail(ErrorCode::InvalidArgument, "duplicate actor role");

  std::set<NodeId> ids;
  for (const auto& e : spec.elements) {
    if (e.kind == NodeKind::RootNode || e.kind == NodeKind::EndNode)
      fail(ErrorCode::IllegalElement, "root and end nodes cannot be part of module '" + spec.name + "'");
    if (e.id.empty() || !ids.insert(e.id).second)
      fail(ErrorCode::InvalidArgument, "element ids must be unique and non-empty ('" + e.id + "')");
    if (e.is_action()) {
      const auto& a = e.action();
      const auto& as = reg.at(a.action_type);
      if (!roles.count(a.reference_actor))
        fail(ErrorCode::UnboundRole, e.id + ": reference '" + a.reference_actor + "' is not a role");
      if (as.two_actor != a.target_actor.has_value())
        fail(ErrorCode::InvalidArgument, e.id + ": " + a.action_type + (as.two_actor ? " needs" : " takes no") +
                                             " target actor");
      if (a.target_actor && !roles.count(*a.target_actor))
        fail(ErrorCode::UnboundRole, e.id + ": target '" + *a.target_actor + "' is not a role");
      for (const auto& [key, value] : a.params) {
        const auto* ps = as.param(key);
        if (!ps) fail(ErrorCode::UnknownParameter, a.action_type + " declares no parameter '" + key + "'");
        check_param_value(*ps, value, a.action_type);
      }
    } else if (e.kind == NodeKind::ModuleInstance) {
      const auto& inst = e.instance();
      if (inst.def_id == def.id) fail(ErrorCode::RecursiveModule, "module '" + def.id + "' instantiates itself");
      const auto* nested = find_def(known, inst.def_id);
      if (!nested) fail(ErrorCode::UnknownModule, "unknown module '" + inst.def_id + "'");
      std::set<std::string> seen;
      if (reaches(known, inst.def_id, def.id, seen))
        fail(ErrorCode::RecursiveModule, "module '" + def.id + "' is reachable from '" + inst.def_id + "'");
      for (const auto& r : nested->actor_roles) {
        auto it = inst.actor_bindings.find(r);
        if (it == inst.actor_bindings.end()) fail(ErrorCode::UnboundRole, e.id + ": role '" + r + "' is unbound");
        if (!roles.count(it->second))
          fail(ErrorCode::UnboundRole, e.id + ": '" + it->second + "' is not a role of '" + def.id + "'");
      }
    }
  }
  def.elements = std::move(spec.elements);

  for (const auto& e : spec.edges) {
    if (!ids.count(e.from) || !ids.count(e.to))
      fail(ErrorCode::UnknownNode, "module edge " + e.from + " -> " + e.to + " has an unknown endpoint");
    if (e.from == e.to) fail(ErrorCode::InvalidArgument, "self-loop on '" + e.from + "'");
  }
  def.internal_edges = std::move(spec.edges);
  assign_edge_ids(def.internal_edges);

  if (spec.in_ports.empty() || spec.out_ports.empty())
    fail(ErrorCode::InvalidArgument, "module '" + def.id + "' needs at least one in-port and one out-port");
  for (const auto* ports : {&spec.in_ports, &spec.out_ports})
    for (const auto& p : *ports)
      if (!ids.count(p.element)) fail(ErrorCode::UnknownNode, "port '" + p.name + "' names unknown element");
  def.in_ports = std::move(spec.in_ports);
  def.out_ports = std::move(spec.out_ports);

  // Every element must lie on an in-port -> out-port path.
  auto sweep = [&](bool forward, const std::vector<Port>& seeds) {
    std::set<NodeId> seen;
    std::vector<NodeId> stack;
    for (const auto& p : seeds) stack.push_back(p.element);
    while (!stack.empty()) {
      auto id = stack.back();
      stack.pop_back();
      if (!seen.insert(id).second) continue;
      for (const auto& e : def.internal_edges) {
        if (forward && e.from == id) stack.push_back(e.to);
        if (!forward && e.to == id) stack.push_back(e.from);
      }
    }
    return seen;
  };
  const auto from_in = sweep(true, def.in_ports);
  const auto to_out = sweep(false, def.out_ports);
  for (const auto& e : def.elements)
    if (!from_in.count(e.id) || !to_out.count(e.id))
      fail(ErrorCode::InvalidArgument, "element '" + e.id + "' is not on an in-port to out-port path");

  def.revision = compute_revision(def);
  return def;
}

namespace {

void register_def(ScenarioGraph& g, const ModuleDef& def) {
  if (const auto* existing = g.find_module(def.id)) {
    if (existing->revision != def.revision)
      fail(ErrorCode::Conflict, "scenario already holds module '" + def.id + "' at revision " + existing->revision);
    return;
  }
  g.module_defs.push_back(def);
}

/// Walks the definition (and nested definitions) checking each action
/// element's actor categories under the given role -> actor binding.
void check_bindings(const ScenarioGraph& g, const ModuleDef& def, const std::map<std::string, ActorId>& bound,
                    const Registry& reg, int depth) {
  if (depth > kDefaultFlattenDepth) fail(ErrorCode::DepthExceeded, "module nesting too deep");
  auto actor_of = [&](const std::string& role) -> const Actor* {
    auto it = bound.find(role);
    return it == bound.end() ? nullptr : g.find_actor(it->second);
  };
  for (const auto& e : def.elements) {
    if (e.is_action()) {
      const auto& a = e.action();
      const auto& spec = reg.at(a.action_type);
      if (const auto* ref = actor_of(a.reference_actor); ref && !spec.ref_categories.count(ref->category))
        fail(ErrorCode::BindingMismatch, def.id + "/" + e.id + ": " + a.action_type + " cannot be performed by " +
                                             std::string(to_string(ref->category)) + " '" + ref->id + "'");
      if (a.target_actor)
        if (const auto* tgt = actor_of(*a.target_actor); tgt && !spec.target_categories.count(tgt->category))
          fail(ErrorCode::BindingMismatch, def.id + "/" + e.id + ": " + a.action_type + " cannot target " +
                                               std::string(to_string(tgt->category)) + " '" + tgt->id + "'");
    } else if (e.kind == NodeKind::ModuleInstance) {
      const auto* nested = g.find_module(e.instance().def_id);
      if (!nested) fail(ErrorCode::UnknownModule, "unknown module '" + e.instance().def_id + "'");
      std::map<std::string, ActorId> sub;
      for (const auto& [role, outer] : e.instance().actor_bindings) {
        auto it = bound.find(outer);
        if (it != bound.end()) sub[role] = it->second;
      }
      check_bindings(g, *nested, sub, reg, depth + 1);
    }
  }
}

}  // namespace

NodeId instantiate(ScenarioGraph& g, const ModuleDef& def, const std::map<std::string, ActorId>& actor_bindings,
                   const std::vector<ParamOverride>& overrides, std::span<const ModuleDef> nested, const Registry& reg,
                   std::optional<NodeId> requested_id) {
  for (const auto& role : def.actor_roles)
    if (!actor_bindings.count(role)) fail(ErrorCode::UnboundRole, "role '" + role + "' of '" + def.id + "' is unbound");
  for (const auto& [role, actor] : actor_bindings) {
    if (std::find(def.actor_roles.begin(), def.actor_roles.end(), role) == def.actor_roles.end())
      fail(ErrorCode::InvalidArgument, "'" + def.id + "' has no role '" + role + "'");
    if (!g.find_actor(actor))
      fail(ErrorCode::UnboundRole, "role '" + role + "' is bound to unknown actor '" + actor + "'");
  }
  for (const auto& o : overrides) {
    const auto* el = def.find_element(o.element);
    if (!el) fail(ErrorCode::UnknownNode, "'" + def.id + "' has no element '" + o.element + "'");
    if (!el->is_action()) fail(ErrorCode::InvalidArgument, "element '" + o.element + "' has no parameters");
    const auto* ps = reg.at(el->action().action_type).param(o.key);
    if (!ps) fail(ErrorCode::UnknownParameter, el->action().action_type + " declares no parameter '" + o.key + "'");
    check_param_value(*ps, o.value, el->action().action_type);
  }

  ScenarioGraph staged = g;
  for (const auto& d : nested) register_def(staged, d);
  register_def(staged, def);
  check_bindings(staged, def, actor_bindings, reg, 1);

  ModuleInstance inst{def.id, actor_bindings, overrides};
  auto id = add_node(staged, NodeKind::ModuleInstance, std::move(inst), reg, std::move(requested_id));
  g = std::move(staged);
  return id;
}

// Flattening ----------------------------------------------------------------

namespace {

struct PortMap {
  std::map<std::string, NodeId> in;   // port -> flattened entry node
  std::map<std::string, NodeId> out;  // port -> flattened exit node
};

class Flattener {
public:
  Flattener(const ScenarioGraph& g, int max_depth) : g_(g), max_depth_(max_depth) {}

  /// Copies a container's nodes and edges into the output with `prefix`,
  /// substituting actor references through `actors`. Returns the port maps
  /// of the instances in this container, keyed by local instance id.
  std::map<NodeId, PortMap> expand(const std::vector<GraphNode>& nodes, const std::vector<Edge>& edges,
                                   const std::string& prefix, const std::function<ActorId(const ActorId&)>& actors,
                                   const std::vector<ParamOverride>& overrides, int depth) {
    std::map<NodeId, PortMap> ports;
    for (const auto& n : nodes) {
      if (n.kind != NodeKind::ModuleInstance) {
        GraphNode copy = n;
        copy.id = prefix + n.id;
        if (copy.is_action()) {
          auto& a = copy.action();
          a.reference_actor = actors(a.reference_actor);
          if (a.target_actor) a.target_actor = actors(*a.target_actor);
          for (const auto& o : overrides)
            if (o.element == n.id) a.params[o.key] = o.value;
        }
        out_nodes.push_back(std::move(copy));
        continue;
      }
      const auto& inst = n.instance();
      const auto* def = g_.find_module(inst.def_id);
      if (!def) fail(ErrorCode::UnknownModule, "unknown module '" + inst.def_id + "' (instance " + prefix + n.id + ")");
      if (depth + 1 > max_depth_)
        fail(ErrorCode::DepthExceeded, "module nesting deeper than " + std::to_string(max_depth_));
      std::map<std::string, ActorId> bound;
      for (const auto& role : def->actor_roles) {
        auto it = inst.actor_bindings.find(role);
        if (it == inst.actor_bindings.end())
          fail(ErrorCode::UnboundRole, "instance " + prefix + n.id + ": role '" + role + "' is unbound");
        bound[role] = actors(it->second);
      }
      auto sub_actors = [bound](const ActorId& role) {
        auto it = bound.find(role);
        return it == bound.end() ? role : it->second;
      };
      const std::string sub_prefix = prefix + n.id + "/";
      auto nested = expand(def->elements, def->internal_edges, sub_prefix, sub_actors, inst.param_overrides, depth + 1);

      auto resolve = [&](const Port& p, bool in) -> NodeId {
        auto it = nested.find(p.element);
        if (it == nested.end()) return sub_prefix + p.element;
        const auto& m = in ? it->second.in : it->second.out;
        if (m.size() != 1)
          fail(ErrorCode::UnknownPort, "port '" + p.name + "' maps to an instance without a single matching port");
        return m.begin()->second;
      };
      PortMap pm;
      for (const auto& p : def->in_ports) pm.in[p.name] = resolve(p, true);
      for (const auto& p : def->out_ports) pm.out[p.name] = resolve(p, false);
      ports[n.id] = std::move(pm);
    }

    auto endpoint = [&](const NodeId& id, const std::optional<std::string>& port, bool outgoing) -> NodeId {
      auto it = ports.find(id);
      if (it == ports.end()) return prefix + id;
      const auto& m = outgoing ? it->second.out : it->second.in;
      if (port) {
        auto p = m.find(*port);
        if (p == m.end()) fail(ErrorCode::UnknownPort, "instance " + prefix + id + " has no port '" + *port + "'");
        return p->second;
      }
      if (m.size() != 1)
        fail(ErrorCode::UnknownPort, "edge to instance " + prefix + id + " must name one of its ports");
      return m.begin()->second;
    };
    for (const auto& e : edges) {
      Edge copy;
      copy.id = prefix + e.id;
      copy.from = endpoint(e.from, e.from_port, true);
      copy.to = endpoint(e.to, e.to_port, false);
      out_edges.push_back(std::move(copy));
    }
    return ports;
  }

  std::vector<GraphNode> out_nodes;
  std::vector<Edge> out_edges;

private:
  const ScenarioGraph& g_;
  int max_depth_;
};

}  // namespace

ScenarioGraph flatten(const ScenarioGraph& g, int max_depth) {
  if (!has_instances(g)) return g;
  Flattener f(g, max_depth);
  f.expand(g.nodes, g.edges, "", [](const ActorId& a) { return a; }, {}, 0);
  ScenarioGraph out = g;
  out.nodes = std::move(f.out_nodes);
  out.edges = std::move(f.out_edges);
  std::set<NodeId> seen;
  for (const auto& n : out.nodes)
    if (!seen.insert(n.id).second) fail(ErrorCode::InvalidArgument, "flattened node id '" + n.id + "' collides");
  return out;
}

}  // namespace scengraph
