#include <doctest.h>

#include <mcn/json_io.hpp>

#include "fixtures.hpp"

namespace {

using namespace mcn;

Json tree2_document_json() {
  return Json::parse(R"({
    "plant": {
      "A": [[0, 1], [-2, -3]],
      "B": [[0], [1]],
      "C": [[1, 0]],
      "delta": 0.05
    },
    "controllability": {
      "nodes": ["v_c", "v_u"],
      "controller": "v_c",
      "actuator": "v_u",
      "edges": [{"from": "v_c", "to": "v_u", "weight": 1.0, "slot": 1}]
    },
    "observability": {
      "nodes": ["v_y", "m1_1", "m2_1", "v_1", "v_2"],
      "sensor": "v_y",
      "terminating": ["v_1", "v_2"],
      "edges": [
        {"from": "v_y", "to": "m1_1", "weight": 1.0, "slot": 1},
        {"from": "m1_1", "to": "v_1", "weight": 1.0, "slot": 2},
        {"from": "v_y", "to": "m2_1", "weight": 1.0, "slot": 1},
        {"from": "m2_1", "to": "v_2", "weight": 1.0, "slot": 1}
      ]
    },
    "pi": 2,
    "protocol": "zero-out"
  })");
}

TEST_CASE("round_sig keeps 12 significant digits and is idempotent") {
  CHECK(round_sig(0.1 + 0.2) == doctest::Approx(0.3).epsilon(1e-11));
  CHECK(round_sig(1.0) == 1.0);
  CHECK(round_sig(0.0) == 0.0);
  CHECK(round_sig(-2.5) == -2.5);
  const double v = 1.0 / 3.0;
  CHECK(round_sig(round_sig(v)) == round_sig(v));
}

TEST_CASE("matrix round-trips through json") {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, -0.25, 0, 7.5;
  const Json j = matrix_to_json(m);
  const Eigen::MatrixXd back = matrix_from_json(j, "m");
  CHECK(back.rows() == 2);
  CHECK(back.cols() == 3);
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix parsing rejects malformed shapes") {
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[]"), "A"), ValidationError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[1, 2]"), "A"),
                  ValidationError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1, 2], [3]]"), "A"),
                  ValidationError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1, \"x\"]]"), "A"),
                  ValidationError);
}

TEST_CASE("document parse builds the same model as direct construction") {
  const ModelDocument doc = model_document_from_json(tree2_document_json());
  CHECK(doc.protocol == FailureProtocol::ZeroOut);
  CHECK(doc.delta == 0.05);
  CHECK(doc.g_r.pi == 2);
  CHECK(doc.g_o.pi == 2);
  CHECK(doc.g_o.sinks == std::vector<std::string>{"v_1", "v_2"});

  const McnModel built = build_from_document(doc);
  const McnModel direct = fixtures::tree2();
  CHECK(built.n() == direct.n());
  CHECK((built.sys.a - direct.sys.a).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((built.sys.b - direct.sys.b).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((built.sys.c - direct.sys.c).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("document serialization round-trips") {
  const ModelDocument doc = model_document_from_json(tree2_document_json());
  const Json j = to_json(doc);
  const ModelDocument again = model_document_from_json(j);
  CHECK((again.a - doc.a).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.b - doc.b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((again.c - doc.c).cwiseAbs().maxCoeff() == 0.0);
  CHECK(again.delta == doc.delta);
  CHECK(again.g_r.edges.size() == doc.g_r.edges.size());
  CHECK(again.g_o.edges.size() == doc.g_o.edges.size());
  CHECK(again.g_o.sinks == doc.g_o.sinks);
  CHECK(again.protocol == doc.protocol);
  // Serialized form uses the singular actuator key.
  CHECK(j.at("controllability").at("actuator").is_string());
  CHECK(j.at("observability").at("terminating").is_array());
}

TEST_CASE("document parse reports the missing field by name") {
  Json j = tree2_document_json();
  j.erase("pi");
  CHECK_THROWS_WITH_AS(model_document_from_json(j),
                       doctest::Contains("\"pi\""), ValidationError);

  Json j2 = tree2_document_json();
  j2["plant"].erase("B");
  CHECK_THROWS_WITH_AS(model_document_from_json(j2),
                       doctest::Contains("\"B\""), ValidationError);

  Json j3 = tree2_document_json();
  j3["observability"]["edges"][0].erase("to");
  CHECK_THROWS_WITH_AS(model_document_from_json(j3),
                       doctest::Contains("\"to\""), ValidationError);

  Json j4 = tree2_document_json();
  j4["protocol"] = "explode";
  CHECK_THROWS_AS(model_document_from_json(j4), ValidationError);

  Json j5 = tree2_document_json();
  j5["observability"]["edges"][1]["slot"] = 1.5;
  CHECK_THROWS_AS(model_document_from_json(j5), ValidationError);
}

TEST_CASE("edges may omit weight and slot") {
  Json j = tree2_document_json();
  j["controllability"]["edges"][0].erase("weight");
  j["controllability"]["edges"][0].erase("slot");
  const ModelDocument doc = model_document_from_json(j);
  CHECK(doc.g_r.edges[0].weight == 1.0);
  CHECK_FALSE(doc.g_r.edges[0].slot.has_value());
}

TEST_CASE("gamma report exposes profiles and routes") {
  const McnModel m = fixtures::diamond();
  const Json j = gamma_to_json(m);
  CHECK(j.at("pi") == 2);
  CHECK(j.at("actuation").at("gamma").size() == 2);
  CHECK(j.at("actuation").at("gamma")[0].get<double>() ==
        doctest::Approx(0.5));
  CHECK(j.at("actuation").at("gamma")[1].get<double>() ==
        doctest::Approx(0.5));
  CHECK(j.at("actuation").at("routes").size() == 2);
  CHECK(j.at("observability").size() == 1);
  CHECK(j.at("observability")[0].at("sink") == "v_1");
}

TEST_CASE("classes report lists representatives and sigma flags") {
  const McnModel m = fixtures::diamond();
  const FailureClassSet set = enumerate_failure_classes(m);
  const Json j = classes_to_json(set);
  CHECK(j.at("case") == "multi-hop-actuation/single-hop-measurement");
  CHECK(j.at("exhaustive") == true);
  CHECK(j.at("classes").size() == set.omega.size());
  CHECK(j.at("classes")[0].at("index") == 0);
  CHECK(j.at("classes")[0].at("representative").empty());
  CHECK(j.at("n_phi").get<int>() == set.n_phi());
  bool any_sigma = false;
  for (const auto& c : j.at("classes")) {
    any_sigma = any_sigma || c.at("in_sigma").get<bool>();
  }
  CHECK(any_sigma);
}

TEST_CASE("detectability report serializes verdicts as data") {
  const McnModel m = fixtures::tree2();
  const auto rep = classify_detectability(m);
  const Json j = report_to_json(rep, ToleranceConfig{});
  CHECK(j.at("all_solvable") == true);
  CHECK(j.at("structural_prediction") == true);
  CHECK(j.at("internal_inconsistency") == false);
  CHECK(j.at("tree").at("is_tree") == true);
  CHECK(j.at("n_s") == 2);
  CHECK(j.at("n_phi") == 2);
  CHECK(j.at("solvable").size() == rep.classes.omega.size());
  CHECK(j.at("solvable")[0].is_null());  // zero class: nothing to solve
  CHECK(j.at("tolerances").at("rank_tol").get<double>() == 1e-10);
}

TEST_CASE("trace serializes to json and csv") {
  const McnModel m = fixtures::tree2();
  Scenario sc;
  sc.input = InputSpec::impulse(1.0);
  sc.frames = 4;
  const Trace t = simulate_scenario(m, sc);

  const Json j = trace_to_json(t);
  CHECK(j.at("frames") == 4);
  CHECK(j.at("u").size() == 4);
  CHECK(j.at("y").size() == 4);
  CHECK_FALSE(j.contains("slot_log"));

  const std::string csv = format_trace_csv(t);
  CHECK(csv.substr(0, csv.find('\n')) == "frame,u,u_tilde,y_1,y_2");
  // Header plus one line per frame.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.find("\n0,1,") == csv.find('\n'));  // impulse at frame 0
}

TEST_CASE("csv gains residual and detection columns when provided") {
  const McnModel m = fixtures::tree2();
  Scenario sc;
  sc.input = InputSpec::step(0.5);
  sc.frames = 12;
  const Trace t = simulate_scenario(m, sc);

  const auto set = enumerate_failure_classes(m);
  const auto bank = synthesize_residual_bank(m, set);
  std::vector<double> u = t.u;
  DetectorConfig cfg;
  const DetectionResult det = run_detector(bank, t.y, u, cfg);

  const std::string csv =
      format_trace_csv(t, &det.residuals, &det.detected);
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header == "frame,u,u_tilde,y_1,y_2,r_1,r_2,detected");

  Eigen::MatrixXd short_res(3, 2);
  short_res.setZero();
  CHECK_THROWS_AS(format_trace_csv(t, &short_res, &det.detected),
                  ValidationError);
}

TEST_CASE("slot log appears in json traces when recorded") {
  const McnModel m = fixtures::chain();
  Scenario sc;
  sc.input = InputSpec::impulse(1.0);
  sc.frames = 2;
  sc.record_slots = true;
  const Trace t = simulate_scenario(m, sc);
  const Json j = trace_to_json(t);
  REQUIRE(j.contains("slot_log"));
  CHECK(j.at("slot_log").size() == t.slot_log.size());
}

}  // namespace
