#include <doctest.h>

#include "fixtures.hpp"
#include "mcn/errors.hpp"
#include "mcn/model.hpp"

using Eigen::MatrixXd;

TEST_CASE("build_model bookkeeping on the two-hop actuation chain") {
  const mcn::McnModel m = fixtures::chain();
  CHECK(m.n_p == 1);
  CHECK(m.n_s == 1);
  // Route slots ascend, so the chain delivers within one frame.
  CHECK(m.d_r == 1);
  CHECK(m.d_o == 1);
  CHECK(m.n_r == 1);
  CHECK(m.n_o == 1);
  CHECK(m.n() == 3);
  CHECK(m.frame_time() == doctest::Approx(0.1));
  CHECK(m.gamma_r.coeff(1) == doctest::Approx(1.0));
  CHECK(m.gamma_o.size() == 1);
  CHECK(m.gamma_o[0].coeff(1) == doctest::Approx(1.0));

  // Assembled shapes and the sink-column invariant: delivered-output states
  // feed nothing, so their columns vanish.
  CHECK(m.sys.a.rows() == 3);
  CHECK(m.sys.b.cols() == 1);
  CHECK(m.sys.c.rows() == 1);
  CHECK(m.sys.a.col(0).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(m.sys.a(0, 1) == doctest::Approx(1.0));  // plant output delivered
  CHECK(m.sys.a(1, 1) == doctest::Approx(std::exp(-0.1)));
}

TEST_CASE("build_model bookkeeping on the designed measurement tree") {
  const mcn::McnModel m = fixtures::tree2();
  CHECK(m.n_s == 2);
  CHECK(m.d_o == 2);
  CHECK(m.n_o == 3);  // shared pipeline: d_o + n_s - 1
  CHECK(m.n_r == 1);
  CHECK(m.n() == 6);
  CHECK(m.gamma_o[0].coeff(1) == doctest::Approx(1.0));
  CHECK(m.gamma_o[0].coeff(2) == doctest::Approx(0.0));
  CHECK(m.gamma_o[1].coeff(1) == doctest::Approx(0.0));
  CHECK(m.gamma_o[1].coeff(2) == doctest::Approx(1.0));
  for (Eigen::Index j = 0; j < m.n_s; ++j) {
    CHECK(m.sys.a.col(j).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
}

TEST_CASE("build_model rejects mismatched frame lengths") {
  mcn::ScheduledGraph g_r = fixtures::direct_actuation(1);
  mcn::ScheduledGraph g_o = fixtures::direct_measurement(2);
  CHECK_THROWS_AS(
      mcn::build_model(fixtures::scalar_plant(), g_r, g_o, 0.05),
      mcn::ValidationError);
}

TEST_CASE("build_model rejects a disconnected measurement graph") {
  mcn::ScheduledGraph g_o = fixtures::direct_measurement(2);
  g_o.edges[0].slot.reset();  // declared but never scheduled
  CHECK_THROWS_AS(mcn::build_model(fixtures::scalar_plant(),
                                   fixtures::direct_actuation(2), g_o, 0.05),
                  mcn::ValidationError);
}

TEST_CASE("build_model rejects several actuator sinks") {
  mcn::ScheduledGraph g_r;
  g_r.nodes = {"v_c", "u1", "u2"};
  g_r.edges = {{"v_c", "u1", 1.0, 1}, {"v_c", "u2", 1.0, 1}};
  g_r.source = "v_c";
  g_r.sinks = {"u1", "u2"};
  g_r.pi = 1;
  CHECK_THROWS_AS(
      mcn::build_model(fixtures::scalar_plant(), g_r,
                       fixtures::direct_measurement(1), 0.05),
      mcn::ValidationError);
}

TEST_CASE("build_model rejects a non-positive slot duration") {
  CHECK_THROWS_AS(
      mcn::build_model(fixtures::scalar_plant(),
                       fixtures::direct_actuation(1),
                       fixtures::direct_measurement(1), 0.0),
      mcn::ValidationError);
}

TEST_CASE("the assembled model matches the block composition directly") {
  const mcn::McnModel m = fixtures::diamond();
  const mcn::DiscreteLTI again =
      mcn::assemble_mcn(m.obs, m.plant, m.ctrl);
  CHECK((m.sys.a - again.a).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((m.sys.b - again.b).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((m.sys.c - again.c).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}
