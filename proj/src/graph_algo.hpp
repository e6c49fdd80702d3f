#pragma once

// Index-based adjacency view over a node/edge list.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scengraph/model.hpp"

namespace scengraph {

class Adjacency {
public:
  Adjacency(const std::vector<GraphNode>& nodes, const std::vector<Edge>& edges) : succ(nodes.size()), pred(nodes.size()) {
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i].id] = i;
    for (const auto& e : edges) {
      auto f = index.find(e.from);
      auto t = index.find(e.to);
      if (f == index.end() || t == index.end()) continue;
      succ[f->second].push_back(t->second);
      pred[t->second].push_back(f->second);
    }
  }

  std::size_t size() const { return succ.size(); }

  std::optional<std::size_t> find(const std::string& id) const {
    auto it = index.find(id);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  /// Nodes reachable from `seeds` (inclusive), following successors or
  /// predecessors.
  std::vector<bool> reach(const std::vector<std::size_t>& seeds, bool forward) const {
    std::vector<bool> seen(size(), false);
    std::vector<std::size_t> stack(seeds.begin(), seeds.end());
    while (!stack.empty()) {
      auto n = stack.back();
      stack.pop_back();
      if (seen[n]) continue;
      seen[n] = true;
      for (auto m : forward ? succ[n] : pred[n]) stack.push_back(m);
    }
    return seen;
  }

  /// Kahn order; empty optional when the graph has a cycle.
  std::optional<std::vector<std::size_t>> topo_order() const {
    std::vector<std::size_t> indeg(size(), 0), order;
    for (std::size_t i = 0; i < size(); ++i) indeg[i] = pred[i].size();
    std::vector<std::size_t> ready;
    for (std::size_t i = size(); i-- > 0;)
      if (indeg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
      auto n = ready.back();
      ready.pop_back();
      order.push_back(n);
      for (auto m : succ[n])
        if (--indeg[m] == 0) ready.push_back(m);
    }
    if (order.size() != size()) return std::nullopt;
    return order;
  }

  /// Strongly connected components with more than one node (Tarjan).
  std::vector<std::vector<std::size_t>> cycles() const {
    std::vector<int> idx(size(), -1), low(size(), 0);
    std::vector<bool> on_stack(size(), false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> out;
    int counter = 0;
    auto strong = [&](auto&& self, std::size_t v) -> void {
      idx[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = true;
      for (auto w : succ[v]) {
        if (idx[w] < 0) {
          self(self, w);
          low[v] = std::min(low[v], low[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], idx[w]);
        }
      }
      if (low[v] == idx[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        if (comp.size() > 1) out.push_back(std::move(comp));
      }
    };
    for (std::size_t v = 0; v < size(); ++v)
      if (idx[v] < 0) strong(strong, v);
    return out;
  }

  std::map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> succ;
  std::vector<std::vector<std::size_t>> pred;
};

}  // namespace scengraph
