#include <doctest.h>

#include <algorithm>

#include "mcn/graph.hpp"

using mcn::Edge;
using mcn::ScheduledGraph;
using mcn::ViolationRule;

namespace {

ScheduledGraph chain_graph() {
  ScheduledGraph g;
  g.nodes = {"v_c", "a", "v_u"};
  g.edges = {{"v_c", "a", 1.0, 1}, {"a", "v_u", 1.0, 2}};
  g.source = "v_c";
  g.sinks = {"v_u"};
  g.pi = 2;
  return g;
}

bool has_rule(const std::vector<mcn::Violation>& violations,
              ViolationRule rule) {
  return std::any_of(violations.begin(), violations.end(),
                     [rule](const mcn::Violation& v) { return v.rule == rule; });
}

}  // namespace

TEST_CASE("well-formed chain validates cleanly") {
  CHECK(mcn::validate_topology(chain_graph()).empty());
  CHECK_NOTHROW(mcn::require_valid(chain_graph()));
}

TEST_CASE("violations are reported as data") {
  SUBCASE("zero weight") {
    ScheduledGraph g = chain_graph();
    g.edges[0].weight = 0.0;
    CHECK(has_rule(mcn::validate_topology(g), ViolationRule::NonPositiveWeight));
  }
  SUBCASE("cycle") {
    ScheduledGraph g = chain_graph();
    g.edges.push_back({"a", "b", 1.0, 1});
    g.edges.push_back({"b", "a", 1.0, 2});
    g.nodes.push_back("b");
    CHECK(has_rule(mcn::validate_topology(g), ViolationRule::NotAcyclic));
  }
  SUBCASE("slot beyond frame length") {
    ScheduledGraph g = chain_graph();
    g.edges[1].slot = 7;
    CHECK(has_rule(mcn::validate_topology(g), ViolationRule::SlotOutOfRange));
  }
  SUBCASE("duplicate link") {
    ScheduledGraph g = chain_graph();
    g.edges.push_back({"v_c", "a", 2.0, 2});
    CHECK(has_rule(mcn::validate_topology(g), ViolationRule::DuplicateEdge));
  }
  SUBCASE("edge into the source and out of a sink") {
    ScheduledGraph g = chain_graph();
    g.edges.push_back({"a", "v_c", 1.0, 1});
    g.edges.push_back({"v_u", "a", 1.0, 1});
    const auto violations = mcn::validate_topology(g);
    CHECK(has_rule(violations, ViolationRule::SourceHasIncoming));
    CHECK(has_rule(violations, ViolationRule::SinkHasOutgoing));
  }
  SUBCASE("undeclared endpoint") {
    ScheduledGraph g = chain_graph();
    g.edges.push_back({"a", "ghost", 1.0, 1});
    CHECK(has_rule(mcn::validate_topology(g), ViolationRule::UnknownNode));
  }
  SUBCASE("require_valid throws with the rule names") {
    ScheduledGraph g = chain_graph();
    g.edges[0].weight = -1.0;
    CHECK_THROWS_WITH_AS(mcn::require_valid(g),
                         doctest::Contains("NonPositiveWeight"),
                         mcn::ValidationError);
  }
}

TEST_CASE("induced graph keeps exactly the scheduled edges") {
  ScheduledGraph g = chain_graph();
  CHECK(mcn::induced_union_graph(g).edges.size() == 2);

  g.edges[1].slot.reset();
  const ScheduledGraph induced = mcn::induced_union_graph(g);
  REQUIRE(induced.edges.size() == 1);
  CHECK(induced.edges[0].from == "v_c");

  ScheduledGraph spread = chain_graph();
  spread.pi = 3;
  spread.edges[1].slot = 3;
  CHECK(mcn::induced_union_graph(spread).edges.size() == 2);
}

TEST_CASE("joint connectivity follows reachability over scheduled edges") {
  ScheduledGraph g = chain_graph();
  CHECK(mcn::is_jointly_connected(g));

  g.edges[1].slot.reset();
  CHECK_FALSE(mcn::is_jointly_connected(g));

  ScheduledGraph diamond;
  diamond.nodes = {"v_c", "a", "b", "v_u"};
  diamond.edges = {{"v_c", "a", 1.0, 1},
                   {"v_c", "b", 1.0, 1},
                   {"a", "v_u", 1.0, 2},
                   {"b", "v_u", 1.0, 2}};
  diamond.source = "v_c";
  diamond.sinks = {"v_u"};
  diamond.pi = 2;
  CHECK(mcn::validate_topology(diamond).empty());
  CHECK(mcn::is_jointly_connected(diamond));

  // Monotonicity: adding a scheduled edge never disconnects.
  diamond.edges.push_back({"a", "b", 1.0, 1});
  CHECK(mcn::is_jointly_connected(diamond));
}

TEST_CASE("tree diagnosis") {
  ScheduledGraph g;
  g.nodes = {"v_y", "m1", "m2", "v_1", "v_2"};
  g.edges = {{"v_y", "m1", 1.0, 1},
             {"m1", "v_1", 1.0, 2},
             {"v_y", "m2", 1.0, 1},
             {"m2", "v_2", 1.0, 2}};
  g.source = "v_y";
  g.sinks = {"v_1", "v_2"};
  g.pi = 2;

  SUBCASE("two clean branches form a tree") {
    const auto diag = mcn::is_scheduling_tree(g);
    CHECK(diag.is_tree);
    CHECK(diag.offending_nodes.empty());
    CHECK(diag.unreachable.empty());
    CHECK(diag.leaf_mismatch.empty());
  }
  SUBCASE("cross edge gives a node two parents") {
    g.edges.push_back({"m1", "v_2", 1.0, 2});
    const auto diag = mcn::is_scheduling_tree(g);
    CHECK_FALSE(diag.is_tree);
    REQUIRE(diag.offending_nodes.size() == 1);
    CHECK(diag.offending_nodes[0] == "v_2");
  }
  SUBCASE("isolated extra node is unreachable") {
    g.nodes.push_back("stray");
    const auto diag = mcn::is_scheduling_tree(g);
    CHECK_FALSE(diag.is_tree);
    CHECK(std::find(diag.unreachable.begin(), diag.unreachable.end(),
                    "stray") != diag.unreachable.end());
  }
  SUBCASE("unscheduled edge drops out of the diagnosis") {
    g.edges[3].slot.reset();  // m2 -> v_2 absent from the induced graph
    const auto diag = mcn::is_scheduling_tree(g);
    CHECK_FALSE(diag.is_tree);
    CHECK(!diag.unreachable.empty());
  }
  SUBCASE("diagnosis ignores slot permutations") {
    ScheduledGraph permuted = g;
    permuted.edges[0].slot = 2;
    permuted.edges[1].slot = 1;
    CHECK(mcn::is_scheduling_tree(permuted).is_tree ==
          mcn::is_scheduling_tree(g).is_tree);
  }
}

TEST_CASE("designer produces validated trees with the requested shape") {
  SUBCASE("single edge for one leaf at depth one") {
    const ScheduledGraph g = mcn::design_observability_tree(1, {1}, 1);
    CHECK(g.nodes.size() == 2);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].from == "v_y");
    CHECK(g.edges[0].to == "v_1");
    CHECK(mcn::is_scheduling_tree(g).is_tree);
  }
  SUBCASE("two branches at depth two") {
    const ScheduledGraph g = mcn::design_observability_tree(2, {1, 1}, 2);
    CHECK(g.nodes.size() == 5);
    CHECK(g.pi == 2);
    CHECK(g.edges.size() == 4);
    CHECK(mcn::validate_topology(g).empty());
    CHECK(mcn::is_scheduling_tree(g).is_tree);
    // Layered slots: every branch runs 1, 2 downstream.
    for (const Edge& e : g.edges) {
      CHECK((e.from == "v_y" ? *e.slot == 1 : *e.slot == 2));
    }
  }
  SUBCASE("slower branch gets a slot inversion") {
    const ScheduledGraph g = mcn::design_observability_tree(2, {1, 2}, 2);
    CHECK(mcn::is_scheduling_tree(g).is_tree);
    // Branch 2's two hops share slot 1: the second hop waits a full frame.
    int branch2_slot1 = 0;
    for (const Edge& e : g.edges) {
      if (e.from == "m2_1" || e.to == "m2_1") {
        CHECK(*e.slot == 1);
        ++branch2_slot1;
      }
    }
    CHECK(branch2_slot1 == 2);
  }
  SUBCASE("infeasible delays are rejected") {
    CHECK_THROWS_AS(mcn::design_observability_tree(1, {3}, 2),
                    mcn::ValidationError);
    CHECK_THROWS_AS(mcn::design_observability_tree(1, {0}, 2),
                    mcn::ValidationError);
    CHECK_THROWS_AS(mcn::design_observability_tree(2, {1}, 2),
                    mcn::ValidationError);
  }
}
