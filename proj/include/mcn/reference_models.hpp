#pragma once

#include "mcn/graph.hpp"
#include "mcn/lti.hpp"
#include "mcn/model.hpp"

// Small reference networks shared by the test suites, the self-test
// criteria, and the shipped example documents. All use a 0.05 s slot.
namespace mcn::reference {

inline ContinuousLTI scalar_plant() {
  Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1);
  a << -1.0;
  b << 1.0;
  c << 1.0;
  return make_continuous_siso(a, b, c);
}

inline ContinuousLTI spring_plant() {
  Eigen::MatrixXd a(2, 2), b(2, 1), c(1, 2);
  a << 0.0, 1.0, -2.0, -3.0;
  b << 0.0, 1.0;
  c << 1.0, 0.0;
  return make_continuous_siso(a, b, c);
}

inline ScheduledGraph direct_measurement(int pi) {
  ScheduledGraph g;
  g.nodes = {"v_y", "v_1"};
  g.edges = {{"v_y", "v_1", 1.0, 1}};
  g.source = "v_y";
  g.sinks = {"v_1"};
  g.pi = pi;
  return g;
}

inline ScheduledGraph direct_actuation(int pi) {
  ScheduledGraph g;
  g.nodes = {"v_c", "v_u"};
  g.edges = {{"v_c", "v_u", 1.0, 1}};
  g.source = "v_c";
  g.sinks = {"v_u"};
  g.pi = pi;
  return g;
}

/// Two-hop actuation relay (delay 1) with a direct measurement link.
inline McnModel chain() {
  ScheduledGraph g_r;
  g_r.nodes = {"v_c", "a", "v_u"};
  g_r.edges = {{"v_c", "a", 1.0, 1}, {"a", "v_u", 1.0, 2}};
  g_r.source = "v_c";
  g_r.sinks = {"v_u"};
  g_r.pi = 2;
  return build_model(scalar_plant(), g_r, direct_measurement(2), 0.05);
}

/// Two parallel actuation routes with different frame delays; the classic
/// non-isolable multi-route layout.
inline McnModel diamond() {
  ScheduledGraph g_r;
  g_r.nodes = {"v_c", "a", "b", "v_u"};
  g_r.edges = {{"v_c", "a", 0.5, 1},
               {"a", "v_u", 1.0, 2},
               {"v_c", "b", 0.5, 2},
               {"b", "v_u", 1.0, 1}};
  g_r.source = "v_c";
  g_r.sinks = {"v_u"};
  g_r.pi = 2;
  return build_model(spring_plant(), g_r, direct_measurement(2), 0.05);
}

/// Single-hop actuation with a designed two-branch measurement tree
/// (branch delays 1 and 2).
inline McnModel tree2() {
  ScheduledGraph g_o = design_observability_tree(2, {1, 2}, 2);
  return build_model(spring_plant(), direct_actuation(g_o.pi), g_o, 0.05);
}

/// Single-hop actuation with a three-branch measurement tree (delays
/// 1, 2, 2).
inline McnModel tree3() {
  ScheduledGraph g_o = design_observability_tree(3, {1, 2, 2}, 2);
  return build_model(spring_plant(), direct_actuation(g_o.pi), g_o, 0.05);
}

}  // namespace mcn::reference
