#include <doctest.h>

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "mcn/errors.hpp"
#include "mcn/fdi.hpp"

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

/// Trajectory of x+ = a x + b u, y = c x from the origin.
std::pair<MatrixXd, std::vector<double>> simulate_plain(
    const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
    const std::vector<double>& u) {
  VectorXd x = VectorXd::Zero(a.rows());
  MatrixXd y(static_cast<Index>(u.size()), c.rows());
  for (std::size_t k = 0; k < u.size(); ++k) {
    y.row(static_cast<Index>(k)) = (c * x).transpose();
    x = a * x + b * u[k];
  }
  return {y, u};
}

std::vector<double> random_input(std::size_t frames, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> u(frames);
  for (double& v : u) v = dist(rng);
  return u;
}

VectorXd unit(Index n, Index i) {
  VectorXd e = VectorXd::Zero(n);
  e(i) = 1.0;
  return e;
}

}  // namespace

TEST_CASE("case detection by route hop counts") {
  CHECK(mcn::detect_case(fixtures::chain()) ==
        mcn::McnCase::GRmultiGOsingle);
  CHECK(mcn::detect_case(fixtures::diamond()) ==
        mcn::McnCase::GRmultiGOsingle);
  CHECK(mcn::detect_case(fixtures::tree2()) ==
        mcn::McnCase::GRsingleGOmulti);
}

TEST_CASE("every chain link set collapses to one actuation class") {
  const mcn::McnModel m = fixtures::chain();
  const mcn::FailureClassSet set = mcn::enumerate_failure_classes(m);
  REQUIRE(set.omega.size() == 2);
  CHECK(set.omega[0].is_zero_class());
  CHECK(set.omega[0].members.size() == 1);
  // Three nonempty subsets of two links, all with the same profile drop.
  CHECK(set.omega[1].members.size() == 3);
  CHECK(set.omega[1].representative ==
        std::vector<mcn::EdgeRef>{
            {mcn::GraphSide::Actuation, "v_c", "a"}});
  CHECK(set.omega[1].signature.delta_r(0) == doctest::Approx(1.0));
  // The image is the head of the actuation chain.
  const Index head = m.n_o + m.n_p;
  CHECK(set.omega[1].signature.image.dim() == 1);
  CHECK(mcn::contains(set.omega[1].signature.image,
                      mcn::Subspace::span(unit(m.n(), head))));
  CHECK(set.phi_indices().size() == 2);
  CHECK(set.n_phi() == 1);
}

TEST_CASE("diamond routes split into two classes plus their sum") {
  const mcn::McnModel m = fixtures::diamond();
  const mcn::FailureClassSet set = mcn::enumerate_failure_classes(m);
  REQUIRE(set.omega.size() == 4);

  const auto& top = set.omega[1];
  const auto& bottom = set.omega[2];
  const auto& both = set.omega[3];
  CHECK(top.representative ==
        std::vector<mcn::EdgeRef>{{mcn::GraphSide::Actuation, "v_c", "a"}});
  CHECK(bottom.representative ==
        std::vector<mcn::EdgeRef>{{mcn::GraphSide::Actuation, "v_c", "b"}});
  CHECK(top.signature.delta_r(0) == doctest::Approx(0.5));
  CHECK(top.signature.delta_r(1) == doctest::Approx(0.0));
  CHECK(bottom.signature.delta_r(0) == doctest::Approx(0.0));
  CHECK(bottom.signature.delta_r(1) == doctest::Approx(0.5));

  // Cutting across both routes drops the full profile: a sum class.
  CHECK(both.signature.delta_r(0) == doctest::Approx(0.5));
  CHECK(both.signature.delta_r(1) == doctest::Approx(0.5));
  CHECK(both.in_sigma);
  CHECK(!top.in_sigma);
  CHECK(!bottom.in_sigma);
  CHECK(set.phi_indices() == std::vector<std::size_t>{0, 1, 2});

  // Each of the 15 nonempty subsets lands in exactly one class.
  std::size_t members = 0;
  for (const auto& cls : set.omega) members += cls.members.size();
  CHECK(members == 16);
}

TEST_CASE("cardinality bound prunes the sum class") {
  const mcn::McnModel m = fixtures::diamond();
  mcn::EnumerationOptions opts;
  opts.max_cardinality = 1;
  const mcn::FailureClassSet set = mcn::enumerate_failure_classes(m, opts);
  CHECK(!set.exhaustive);
  CHECK(set.omega.size() == 3);
  for (const auto& cls : set.omega) CHECK(!cls.in_sigma);
}

TEST_CASE("tree classes are one per branch with unit output images") {
  const mcn::McnModel m = fixtures::tree2();
  const mcn::FailureClassSet set = mcn::enumerate_failure_classes(m);
  // Zero class, one class per branch, and the branch-pair sum classes.
  const auto phi = set.phi_indices();
  REQUIRE(phi.size() == 3);
  const auto& b1 = set.omega[phi[1]];
  const auto& b2 = set.omega[phi[2]];
  CHECK(b1.signature.delta_o(0, 0) == doctest::Approx(1.0));
  CHECK(b1.signature.delta_o.row(1).cwiseAbs().maxCoeff() ==
        doctest::Approx(0.0));
  CHECK(b2.signature.delta_o(1, 1) == doctest::Approx(1.0));
  CHECK(mcn::equal(b1.signature.image,
                   mcn::Subspace::span(unit(m.n(), 0))));
  CHECK(mcn::equal(b2.signature.image,
                   mcn::Subspace::span(unit(m.n(), 1))));
  // Every branch subset collapses into its branch class: 2 links per
  // branch give 3 member sets each; mixed subsets form the sum class.
  CHECK(b1.members.size() == 3);
  CHECK(b2.members.size() == 3);
}

TEST_CASE("profile drops grow monotonically with the link set") {
  const mcn::McnModel m = fixtures::diamond();
  using ER = mcn::EdgeRef;
  const ER e1{mcn::GraphSide::Actuation, "v_c", "a"};
  const ER e2{mcn::GraphSide::Actuation, "b", "v_u"};
  const auto small = mcn::failure_signature(m, {{e1}, {}});
  const auto large = mcn::failure_signature(m, {{e1, e2}, {}});
  CHECK(((large.delta_r - small.delta_r).minCoeff()) >= -1e-12);
}

TEST_CASE("failure perturbations stay inside their structural rows") {
  const mcn::McnModel m = fixtures::tree2();
  const mcn::FailureConfig f{
      {{mcn::GraphSide::Measurement, "v_y", "m2_1"}}, {}};
  const auto sig = mcn::failure_signature(m, f);
  for (Index r = 0; r < m.n(); ++r) {
    const double mag = std::max(sig.d_a.row(r).cwiseAbs().maxCoeff(),
                                std::abs(sig.d_b(r, 0)));
    if (r < m.n_s || r == m.n_o + m.n_p) continue;
    CHECK(mag == doctest::Approx(0.0));
  }
  // And an empty configuration perturbs nothing.
  const auto zero = mcn::failure_signature(m, {});
  CHECK(zero.d_a.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(zero.image.is_zero());
}

TEST_CASE("failure configurations are validated") {
  const mcn::McnModel m = fixtures::chain();
  const mcn::EdgeRef ghost{mcn::GraphSide::Actuation, "v_c", "nowhere"};
  CHECK_THROWS_AS(mcn::failure_signature(m, {{ghost}, {}}),
                  mcn::ValidationError);
  const mcn::EdgeRef real{mcn::GraphSide::Actuation, "v_c", "a"};
  CHECK_THROWS_AS(mcn::failure_signature(m, {{real, real}, {}}),
                  mcn::ValidationError);
}

TEST_CASE("exhaustive enumeration over too many links is refused") {
  mcn::ScheduledGraph g_o;
  g_o.nodes = {"v_y"};
  g_o.source = "v_y";
  g_o.pi = 1;
  for (int i = 1; i <= 17; ++i) {
    const std::string node = "s" + std::to_string(i);
    g_o.nodes.push_back(node);
    g_o.edges.push_back({"v_y", node, 1.0, 1});
    g_o.sinks.push_back(node);
  }
  const mcn::McnModel m = mcn::build_model(
      fixtures::spring_plant(), fixtures::direct_actuation(1), g_o, 0.05);
  CHECK_THROWS_AS(mcn::enumerate_failure_classes(m), mcn::BudgetError);
  mcn::EnumerationOptions opts;
  opts.max_cardinality = 1;
  CHECK(mcn::enumerate_failure_classes(m, opts).omega.size() == 18);
}

TEST_CASE("detectability verdicts match the structural theory") {
  SUBCASE("single actuation class: solvable when observable") {
    const auto rep = mcn::classify_detectability(fixtures::chain());
    CHECK(rep.mcn_case == mcn::McnCase::GRmultiGOsingle);
    CHECK(rep.structural_prediction);
    CHECK(rep.all_solvable);
    REQUIRE(rep.solvable.size() == 2);
    CHECK(rep.solvable[1].has_value());
    CHECK(*rep.solvable[1]);
    CHECK(!rep.internal_inconsistency);
  }
  SUBCASE("two actuation classes share one direction: none solvable") {
    const auto rep = mcn::classify_detectability(fixtures::diamond());
    CHECK(!rep.structural_prediction);
    CHECK(!rep.all_solvable);
    for (std::size_t i : rep.classes.phi_nonzero_indices()) {
      CHECK(!*rep.solvable[i]);
    }
    CHECK(!rep.internal_inconsistency);
    CHECK(rep.recommendation.find("single-hop") != std::string::npos);
  }
  SUBCASE("measurement tree: everything solvable and independent") {
    const auto rep = mcn::classify_detectability(fixtures::tree2());
    CHECK(rep.mcn_case == mcn::McnCase::GRsingleGOmulti);
    CHECK(rep.tree.is_tree);
    CHECK(rep.structural_prediction);
    CHECK(rep.all_solvable);
    CHECK(rep.n_phi == 2);
    CHECK(rep.d_l_phi == 2);
    CHECK(rep.n_s == 2);
    CHECK(!rep.internal_inconsistency);
    CHECK(rep.annotations.empty());
  }
}

TEST_CASE("residual bank: exact decoupling, sensitivity, deadbeat settle") {
  const mcn::McnModel m = fixtures::tree2();
  const mcn::FailureClassSet classes = mcn::enumerate_failure_classes(m);
  const mcn::ResidualBank bank = mcn::synthesize_residual_bank(m, classes);
  REQUIRE(bank.generators.size() == 2);

  for (const auto& gen : bank.generators) {
    // Nilpotent error map within its dimension.
    MatrixXd p = MatrixXd::Identity(gen.f.rows(), gen.f.cols());
    for (Index k = 0; k < gen.f.rows(); ++k) p = gen.f * p;
    CHECK(p.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(gen.settle_frames <= gen.f.rows());
  }

  const std::vector<double> u = random_input(60, 7);

  //

  // Failure-free run: every residual is identically zero from the origin.
  {
    auto [y, uu] = simulate_plain(m.sys.a, m.sys.b, m.sys.c, u);
    const MatrixXd r = mcn::bank_residuals(bank, y, uu);
    CHECK(r.cwiseAbs().maxCoeff() < 1e-9);
  }

  // Fault in one branch: its generator fires, the other stays at zero.
  for (std::size_t which = 0; which < 2; ++which) {
    const auto& cls = classes.omega[bank.generators[which].class_index];
    const auto [af, bf] =
        mcn::faulty_realization(m, {cls.representative, {}});
    auto [y, uu] = simulate_plain(af, bf, m.sys.c, u);
    const MatrixXd r = mcn::bank_residuals(bank, y, uu);
    CHECK(r.col(static_cast<Index>(which)).cwiseAbs().maxCoeff() > 1e-4);
    CHECK(r.col(static_cast<Index>(1 - which)).cwiseAbs().maxCoeff() <
          1e-9);
  }
}

TEST_CASE("residual bank refuses non-isolable layouts") {
  const mcn::McnModel m = fixtures::diamond();
  const mcn::FailureClassSet classes = mcn::enumerate_failure_classes(m);
  CHECK_THROWS_AS(mcn::synthesize_residual_bank(m, classes),
                  mcn::ValidationError);
}

TEST_CASE("persistence detector flags only the failed branch") {
  const mcn::McnModel m = fixtures::tree2();
  const mcn::FailureClassSet classes = mcn::enumerate_failure_classes(m);
  const mcn::ResidualBank bank = mcn::synthesize_residual_bank(m, classes);
  const std::vector<double> u = random_input(50, 11);

  {
    auto [y, uu] = simulate_plain(m.sys.a, m.sys.b, m.sys.c, u);
    const auto det = mcn::run_detector(bank, y, uu);
    for (const auto& frame : det.detected) CHECK(frame.empty());
  }
  {
    const auto& cls = classes.omega[bank.generators[1].class_index];
    const auto [af, bf] =
        mcn::faulty_realization(m, {cls.representative, {}});
    auto [y, uu] = simulate_plain(af, bf, m.sys.c, u);
    const auto det = mcn::run_detector(bank, y, uu);
    bool saw = false;
    for (const auto& frame : det.detected) {
      for (std::size_t g : frame) {
        saw = true;
        CHECK(g == 1);
      }
    }
    CHECK(saw);
  }

  // Short traces cannot outlast the transient.
  auto [y, uu] = simulate_plain(m.sys.a, m.sys.b, m.sys.c,
                                random_input(4, 3));
  CHECK_THROWS_AS(mcn::run_detector(bank, y, uu), mcn::ValidationError);
}
