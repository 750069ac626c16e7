#include "mcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace mcn {

std::string to_string(ViolationRule rule) {
  switch (rule) {
    case ViolationRule::UnknownNode: return "UnknownNode";
    case ViolationRule::DuplicateNode: return "DuplicateNode";
    case ViolationRule::EmptySinks: return "EmptySinks";
    case ViolationRule::DuplicateSink: return "DuplicateSink";
    case ViolationRule::BadFrameLength: return "BadFrameLength";
    case ViolationRule::NotAcyclic: return "NotAcyclic";
    case ViolationRule::NonPositiveWeight: return "NonPositiveWeight";
    case ViolationRule::DuplicateEdge: return "DuplicateEdge";
    case ViolationRule::SlotOutOfRange: return "SlotOutOfRange";
    case ViolationRule::SourceHasIncoming: return "SourceHasIncoming";
    case ViolationRule::SinkHasOutgoing: return "SinkHasOutgoing";
  }
  return "Unknown";
}

namespace {

std::string edge_name(const Edge& e) { return e.from + "->" + e.to; }

}  // namespace

std::vector<Violation> validate_topology(const ScheduledGraph& g) {
  std::vector<Violation> out;
  const auto add = [&out](ViolationRule rule, std::string detail) {
    out.push_back(Violation{rule, std::move(detail)});
  };

  std::set<std::string> declared;
  for (const std::string& node : g.nodes) {
    if (!declared.insert(node).second) {
      add(ViolationRule::DuplicateNode, node);
    }
  }
  const auto known = [&declared](const std::string& node) {
    return declared.count(node) != 0;
  };

  if (g.pi < 1) {
    add(ViolationRule::BadFrameLength,
        "frame length " + std::to_string(g.pi));
  }
  if (!known(g.source)) {
    add(ViolationRule::UnknownNode, "source " + g.source);
  }
  if (g.sinks.empty()) {
    add(ViolationRule::EmptySinks, "at least one sink required");
  }
  std::set<std::string> sink_set;
  for (const std::string& s : g.sinks) {
    if (!known(s)) {
      add(ViolationRule::UnknownNode, "sink " + s);
    }
    if (!sink_set.insert(s).second) {
      add(ViolationRule::DuplicateSink, s);
    }
  }

  std::set<std::pair<std::string, std::string>> seen_links;
  for (const Edge& e : g.edges) {
    if (!known(e.from)) {
      add(ViolationRule::UnknownNode, "edge endpoint " + e.from);
    }
    if (!known(e.to)) {
      add(ViolationRule::UnknownNode, "edge endpoint " + e.to);
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      add(ViolationRule::NonPositiveWeight, edge_name(e));
    }
    if (!seen_links.insert({e.from, e.to}).second) {
      add(ViolationRule::DuplicateEdge, edge_name(e));
    }
    if (e.slot && (*e.slot < 1 || *e.slot > g.pi)) {
      add(ViolationRule::SlotOutOfRange,
          edge_name(e) + " slot " + std::to_string(*e.slot));
    }
    if (e.to == g.source) {
      add(ViolationRule::SourceHasIncoming, edge_name(e));
    }
    if (sink_set.count(e.from)) {
      add(ViolationRule::SinkHasOutgoing, edge_name(e));
    }
  }

  // Kahn's algorithm on the declared node set; leftover nodes lie on cycles.
  std::map<std::string, int> in_degree;
  std::map<std::string, std::vector<std::string>> adjacency;
  for (const std::string& node : declared) {
    in_degree[node] = 0;
  }
  for (const Edge& e : g.edges) {
    if (known(e.from) && known(e.to)) {
      adjacency[e.from].push_back(e.to);
      ++in_degree[e.to];
    }
  }
  std::deque<std::string> frontier;
  for (const auto& [node, deg] : in_degree) {
    if (deg == 0) frontier.push_back(node);
  }
  std::size_t removed = 0;
  while (!frontier.empty()) {
    const std::string node = frontier.front();
    frontier.pop_front();
    ++removed;
    for (const std::string& next : adjacency[node]) {
      if (--in_degree[next] == 0) frontier.push_back(next);
    }
  }
  if (removed != declared.size()) {
    std::ostringstream cyc;
    cyc << "nodes on a cycle:";
    for (const auto& [node, deg] : in_degree) {
      if (deg > 0) cyc << ' ' << node;
    }
    add(ViolationRule::NotAcyclic, cyc.str());
  }

  return out;
}

void require_valid(const ScheduledGraph& g) {
  const std::vector<Violation> violations = validate_topology(g);
  if (violations.empty()) {
    return;
  }
  std::ostringstream msg;
  msg << "invalid scheduled graph:";
  for (const Violation& v : violations) {
    msg << " [" << to_string(v.rule) << ": " << v.detail << "]";
  }
  throw ValidationError(msg.str());
}

ScheduledGraph induced_union_graph(const ScheduledGraph& g) {
  ScheduledGraph induced = g;
  induced.edges.clear();
  for (const Edge& e : g.edges) {
    if (e.slot) {
      induced.edges.push_back(e);
    }
  }
  return induced;
}

bool is_jointly_connected(const ScheduledGraph& g) {
  std::map<std::string, std::vector<std::string>> adjacency;
  for (const Edge& e : g.edges) {
    if (e.slot) {
      adjacency[e.from].push_back(e.to);
    }
  }
  std::set<std::string> reached{g.source};
  std::deque<std::string> frontier{g.source};
  while (!frontier.empty()) {
    const std::string node = frontier.front();
    frontier.pop_front();
    for (const std::string& next : adjacency[node]) {
      if (reached.insert(next).second) {
        frontier.push_back(next);
      }
    }
  }
  return std::all_of(g.sinks.begin(), g.sinks.end(),
                     [&reached](const std::string& s) {
                       return reached.count(s) != 0;
                     });
}

TreeDiagnosis is_scheduling_tree(const ScheduledGraph& g) {
  const ScheduledGraph induced = induced_union_graph(g);
  std::map<std::string, int> in_degree, out_degree;
  std::map<std::string, std::vector<std::string>> adjacency;
  for (const std::string& node : g.nodes) {
    in_degree[node];
    out_degree[node];
  }
  for (const Edge& e : induced.edges) {
    ++in_degree[e.to];
    ++out_degree[e.from];
    adjacency[e.from].push_back(e.to);
  }

  TreeDiagnosis diag;
  for (const auto& [node, deg] : in_degree) {
    if (node != g.source && deg != 1) {
      diag.offending_nodes.push_back(node);
    }
  }

  std::set<std::string> reached{g.source};
  std::deque<std::string> frontier{g.source};
  while (!frontier.empty()) {
    const std::string node = frontier.front();
    frontier.pop_front();
    for (const std::string& next : adjacency[node]) {
      if (reached.insert(next).second) {
        frontier.push_back(next);
      }
    }
  }
  for (const std::string& node : g.nodes) {
    if (!reached.count(node)) {
      diag.unreachable.push_back(node);
    }
  }

  const std::set<std::string> sink_set(g.sinks.begin(), g.sinks.end());
  for (const auto& [node, deg] : out_degree) {
    const bool is_leaf = deg == 0 && node != g.source;
    if (is_leaf != (sink_set.count(node) != 0)) {
      diag.leaf_mismatch.push_back(node);
    }
  }

  diag.is_tree = diag.offending_nodes.empty() && diag.unreachable.empty() &&
                 diag.leaf_mismatch.empty();
  return diag;
}

ScheduledGraph design_observability_tree(int n_s,
                                         const std::vector<int>& leaf_delays,
                                         int depth) {
  if (n_s < 1) {
    throw ValidationError("designer: at least one terminating node required");
  }
  if (depth < 1) {
    throw ValidationError("designer: branch depth must be at least 1");
  }
  if (static_cast<int>(leaf_delays.size()) != n_s) {
    throw ValidationError("designer: one target delay per terminating node");
  }
  for (int d : leaf_delays) {
    if (d < 1 || d > depth) {
      throw ValidationError(
          "designer: target delay " + std::to_string(d) +
          " infeasible for branch depth " + std::to_string(depth) +
          " (need 1 <= delay <= depth)");
    }
  }

  ScheduledGraph g;
  g.source = "v_y";
  g.pi = depth;
  g.nodes.push_back(g.source);
  for (int i = 1; i <= n_s; ++i) {
    const std::string leaf = "v_" + std::to_string(i);
    std::vector<std::string> chain{g.source};
    for (int j = 1; j < depth; ++j) {
      const std::string relay =
          "m" + std::to_string(i) + "_" + std::to_string(j);
      g.nodes.push_back(relay);
      chain.push_back(relay);
    }
    g.nodes.push_back(leaf);
    chain.push_back(leaf);
    g.sinks.push_back(leaf);

    // Slots 1,2,... down the first depth-d+1 hops (no inversions), then the
    // remaining d-1 hops reuse slot 1, each contributing one frame of delay.
    const int d = leaf_delays[static_cast<std::size_t>(i - 1)];
    const int ascending = depth - d + 1;
    for (int j = 0; j < depth; ++j) {
      Edge e;
      e.from = chain[static_cast<std::size_t>(j)];
      e.to = chain[static_cast<std::size_t>(j + 1)];
      e.weight = 1.0;
      e.slot = j < ascending ? j + 1 : 1;
      g.edges.push_back(e);
    }
  }
  require_valid(g);
  return g;
}

}  // namespace mcn
