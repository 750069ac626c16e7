#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcn/errors.hpp"

namespace mcn {

/// One directed radio link. An edge without a slot is declared but never
/// scheduled, so it is absent from the induced graph.
struct Edge {
  std::string from;
  std::string to;
  double weight = 1.0;
  std::optional<int> slot;  // 1..Pi
};

/// A radio connectivity graph with its TDMA schedule: either the actuation
/// graph (source v_c, single sink v_u) or the measurement graph (source v_y,
/// ordered terminating sinks v_1..v_{n_S}). Frame length Pi counts slots.
struct ScheduledGraph {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  std::string source;
  std::vector<std::string> sinks;
  int pi = 1;
};

enum class ViolationRule {
  UnknownNode,
  DuplicateNode,
  EmptySinks,
  DuplicateSink,
  BadFrameLength,
  NotAcyclic,
  NonPositiveWeight,
  DuplicateEdge,
  SlotOutOfRange,
  SourceHasIncoming,
  SinkHasOutgoing,
};

std::string to_string(ViolationRule rule);

struct Violation {
  ViolationRule rule;
  std::string detail;  // names the offending node/edge
};

/// Structural invariant check. Violations are data, not errors; an empty
/// list certifies a well-formed graph.
std::vector<Violation> validate_topology(const ScheduledGraph& g);

/// Throws ValidationError listing every violation; no-op on a valid graph.
void require_valid(const ScheduledGraph& g);

/// The union over all slots of the per-slot subgraphs: with one slot per
/// edge this is simply the graph restricted to scheduled edges.
ScheduledGraph induced_union_graph(const ScheduledGraph& g);

/// True iff every sink is reachable from the source through scheduled edges.
bool is_jointly_connected(const ScheduledGraph& g);

/// Diagnosis of the tree condition on the induced graph.
struct TreeDiagnosis {
  bool is_tree = false;
  std::vector<std::string> offending_nodes;  // non-root with in-degree != 1
  std::vector<std::string> unreachable;      // not reached from the root
  std::vector<std::string> leaf_mismatch;    // leaf set vs declared sinks
};

/// Checks that the induced graph is a tree rooted at the source whose leaf
/// set equals the declared sinks. is_tree iff all three lists are empty.
TreeDiagnosis is_scheduling_tree(const ScheduledGraph& g);

/// Builds a measurement-side tree with n_s branches of `depth` hops each,
/// unit weights, and slots arranged so branch i delivers with frame delay
/// leaf_delays[i]. Pi = depth. Throws ValidationError when a requested
/// delay is outside [1, depth].
ScheduledGraph design_observability_tree(int n_s,
                                         const std::vector<int>& leaf_delays,
                                         int depth);

}  // namespace mcn
