// Command-line front end: loads a network document, derives the frame-level
// model, and exposes the analysis, design, and simulation pipelines.
//
// Exit codes: 0 success, 1 invalid input or model, 2 numerical failure or
// analysis inconsistency (including self-test failures), 3 enumeration
// budget exceeded.
#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcn/errors.hpp"
#include "mcn/fdi.hpp"
#include "mcn/graph.hpp"
#include "mcn/json_io.hpp"
#include "mcn/model.hpp"
#include "mcn/selftest.hpp"
#include "mcn/simulate.hpp"
#include "mcn/subspace.hpp"

namespace {

using mcn::Json;

struct CommonOptions {
  std::string model_path;
  std::string format = "json";
  double rank_tol = 1e-10;
  double eq_tol = 1e-8;
  std::optional<int> max_cardinality;
  double threshold = 1e-6;
  int persistence = 3;
  long long frames = 50;
  std::string input = "step";
  double amplitude = 1.0;
  unsigned seed = 0;
  bool verbose_slots = false;
  std::vector<std::string> injects;
  std::string protocol_override;
};

mcn::ToleranceConfig tolerances(const CommonOptions& opt) {
  mcn::ToleranceConfig tol;
  tol.rank_tol = opt.rank_tol;
  tol.eq_tol = opt.eq_tol;
  return tol;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw mcn::ValidationError("cannot open \"" + path + "\"");
  }
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw mcn::ValidationError("\"" + path + "\" is not valid JSON: " +
                               e.what());
  }
}

mcn::ModelDocument load_document(const std::string& path) {
  return mcn::model_document_from_json(load_json(path));
}

void require_json_format(const CommonOptions& opt) {
  if (opt.format != "json") {
    throw mcn::ValidationError(
        "this command reports structured data; only --format json is "
        "available (csv applies to simulate and detect)");
  }
}

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

mcn::InputSpec make_input(const CommonOptions& opt) {
  if (opt.input == "impulse") return mcn::InputSpec::impulse(opt.amplitude);
  if (opt.input == "step") return mcn::InputSpec::step(opt.amplitude);
  if (opt.input == "random") {
    return mcn::InputSpec::random_uniform(opt.amplitude, opt.seed);
  }
  throw mcn::ValidationError(
      "--input must be one of impulse, step, random");
}

// "R:from->to@frame" or "O:from->to@frame".
std::pair<long long, mcn::EdgeRef> parse_injection(const std::string& raw) {
  const auto at = raw.rfind('@');
  const auto colon = raw.find(':');
  const auto arrow = raw.find("->");
  if (colon == std::string::npos || arrow == std::string::npos ||
      at == std::string::npos || arrow < colon || at < arrow + 2) {
    throw mcn::ValidationError(
        "--inject expects SIDE:from->to@frame with SIDE R or O, got \"" +
        raw + "\"");
  }
  const std::string side = raw.substr(0, colon);
  mcn::EdgeRef ref;
  if (side == "R") {
    ref.side = mcn::GraphSide::Actuation;
  } else if (side == "O") {
    ref.side = mcn::GraphSide::Measurement;
  } else {
    throw mcn::ValidationError("--inject side must be R or O, got \"" +
                               side + "\"");
  }
  ref.from = raw.substr(colon + 1, arrow - colon - 1);
  ref.to = raw.substr(arrow + 2, at - arrow - 2);
  long long frame = 0;
  try {
    frame = std::stoll(raw.substr(at + 1));
  } catch (const std::exception&) {
    throw mcn::ValidationError("--inject frame must be an integer in \"" +
                               raw + "\"");
  }
  if (ref.from.empty() || ref.to.empty()) {
    throw mcn::ValidationError("--inject names an empty node in \"" + raw +
                               "\"");
  }
  return {frame, ref};
}

mcn::FailureProtocol resolve_protocol(const CommonOptions& opt,
                                      const mcn::ModelDocument& doc) {
  if (opt.protocol_override.empty()) return doc.protocol;
  if (opt.protocol_override == "zero-out") {
    return mcn::FailureProtocol::ZeroOut;
  }
  if (opt.protocol_override == "hold-last") {
    return mcn::FailureProtocol::HoldLast;
  }
  throw mcn::ValidationError(
      "--protocol must be zero-out or hold-last");
}

mcn::Scenario make_scenario(const CommonOptions& opt,
                            const mcn::ModelDocument& doc) {
  mcn::Scenario sc;
  sc.input = make_input(opt);
  sc.frames = static_cast<Eigen::Index>(opt.frames);
  sc.record_slots = opt.verbose_slots;
  const mcn::FailureProtocol protocol = resolve_protocol(opt, doc);

  std::vector<std::pair<long long, mcn::EdgeRef>> parsed;
  for (const std::string& raw : opt.injects) {
    parsed.push_back(parse_injection(raw));
  }
  std::stable_sort(parsed.begin(), parsed.end(),
                   [](const auto& a, const auto& b) {
                     return a.first < b.first;
                   });
  for (const auto& [frame, ref] : parsed) {
    if (!sc.injections.empty() &&
        sc.injections.back().frame == static_cast<Eigen::Index>(frame)) {
      sc.injections.back().failure.edges.push_back(ref);
    } else {
      mcn::Injection inj;
      inj.frame = static_cast<Eigen::Index>(frame);
      inj.failure.protocol = protocol;
      inj.failure.edges = {ref};
      sc.injections.push_back(std::move(inj));
    }
  }
  return sc;
}

Json injections_to_json(const mcn::Scenario& sc) {
  Json arr = Json::array();
  for (const mcn::Injection& inj : sc.injections) {
    Json j;
    j["frame"] = inj.frame;
    Json links = Json::array();
    for (const mcn::EdgeRef& e : inj.failure.edges) {
      links.push_back(mcn::to_string(e));
    }
    j["links"] = std::move(links);
    j["protocol"] = mcn::to_string(inj.failure.protocol);
    arr.push_back(std::move(j));
  }
  return arr;
}

int cmd_validate(const CommonOptions& opt) {
  require_json_format(opt);
  const mcn::ModelDocument doc = load_document(opt.model_path);

  auto violations_json = [](const std::vector<mcn::Violation>& violations) {
    Json arr = Json::array();
    for (const mcn::Violation& v : violations) {
      Json j;
      j["rule"] = mcn::to_string(v.rule);
      j["detail"] = v.detail;
      arr.push_back(std::move(j));
    }
    return arr;
  };

  Json out;
  out["controllability_violations"] =
      violations_json(mcn::validate_topology(doc.g_r));
  out["observability_violations"] =
      violations_json(mcn::validate_topology(doc.g_o));

  bool buildable = false;
  std::string error;
  try {
    const mcn::McnModel m = mcn::build_from_document(doc, tolerances(opt));
    buildable = true;
    Json summary;
    summary["case"] = mcn::to_string(mcn::detect_case(m));
    summary["n"] = m.n();
    summary["n_s"] = m.n_s;
    summary["d_r"] = m.d_r;
    summary["d_o"] = m.d_o;
    summary["frame_time"] = mcn::round_sig(m.frame_time());
    out["model"] = std::move(summary);
  } catch (const std::exception& e) {
    error = e.what();
  }
  out["buildable"] = buildable;
  out["error"] = error.empty() ? Json() : Json(error);
  emit(out);
  return buildable ? 0 : 1;
}

int cmd_gamma(const CommonOptions& opt) {
  require_json_format(opt);
  const mcn::McnModel m =
      mcn::build_from_document(load_document(opt.model_path), tolerances(opt));
  emit(mcn::gamma_to_json(m));
  return 0;
}

mcn::EnumerationOptions enumeration_options(const CommonOptions& opt) {
  mcn::EnumerationOptions eo;
  eo.max_cardinality = opt.max_cardinality;
  return eo;
}

int cmd_classes(const CommonOptions& opt) {
  require_json_format(opt);
  const mcn::McnModel m =
      mcn::build_from_document(load_document(opt.model_path), tolerances(opt));
  emit(mcn::classes_to_json(
      mcn::enumerate_failure_classes(m, enumeration_options(opt))));
  return 0;
}

int cmd_analyze(const CommonOptions& opt) {
  require_json_format(opt);
  const mcn::ToleranceConfig tol = tolerances(opt);
  const mcn::McnModel m =
      mcn::build_from_document(load_document(opt.model_path), tol);
  const mcn::DetectabilityReport rep =
      mcn::classify_detectability(m, enumeration_options(opt), tol);
  emit(mcn::report_to_json(rep, tol));
  return rep.internal_inconsistency ? 2 : 0;
}

int cmd_design_tree(const CommonOptions& opt,
                    const std::vector<int>& delays, int depth_flag,
                    const std::string& full_model_path) {
  require_json_format(opt);
  if (delays.empty()) {
    throw mcn::ValidationError("--delays requires at least one branch delay");
  }
  const int depth =
      depth_flag > 0 ? depth_flag
                     : *std::max_element(delays.begin(), delays.end());
  const mcn::ScheduledGraph g_o = mcn::design_observability_tree(
      static_cast<int>(delays.size()), delays, depth);

  if (full_model_path.empty()) {
    Json out;
    out["observability"] = mcn::graph_to_json(g_o, "sensor", "terminating");
    out["pi"] = g_o.pi;
    emit(out);
    return 0;
  }
  mcn::ModelDocument doc = load_document(full_model_path);
  doc.g_o = g_o;
  doc.g_r.pi = g_o.pi;
  mcn::build_from_document(doc, tolerances(opt));  // must stay buildable
  emit(mcn::to_json(doc));
  return 0;
}

int cmd_simulate(const CommonOptions& opt) {
  const mcn::ModelDocument doc = load_document(opt.model_path);
  const mcn::McnModel m = mcn::build_from_document(doc, tolerances(opt));
  const mcn::Scenario sc = make_scenario(opt, doc);
  const mcn::Trace tr = mcn::simulate_scenario(m, sc);

  if (opt.format == "csv") {
    std::cout << mcn::format_trace_csv(tr);
    for (const std::string& line : tr.slot_log) {
      std::cerr << line << "\n";
    }
    return 0;
  }
  require_json_format(opt);
  Json out = mcn::trace_to_json(tr);
  if (!sc.injections.empty()) {
    out["injections"] = injections_to_json(sc);
  }
  emit(out);
  return 0;
}

int cmd_detect(const CommonOptions& opt) {
  const mcn::ModelDocument doc = load_document(opt.model_path);
  const mcn::ToleranceConfig tol = tolerances(opt);
  const mcn::McnModel m = mcn::build_from_document(doc, tol);
  const mcn::FailureClassSet classes =
      mcn::enumerate_failure_classes(m, enumeration_options(opt), tol);
  const mcn::ResidualBank bank =
      mcn::synthesize_residual_bank(m, classes, tol);

  const mcn::Scenario sc = make_scenario(opt, doc);
  const mcn::Trace tr = mcn::simulate_scenario(m, sc);
  mcn::DetectorConfig cfg;
  cfg.threshold = opt.threshold;
  cfg.persistence = opt.persistence;
  const mcn::DetectionResult det =
      mcn::run_detector(bank, tr.y, tr.u, cfg);

  if (opt.format == "csv") {
    std::cout << mcn::format_trace_csv(tr, &det.residuals, &det.detected);
    for (const std::string& line : tr.slot_log) {
      std::cerr << line << "\n";
    }
    return 0;
  }
  require_json_format(opt);
  Json out;
  Json config;
  config["threshold"] = cfg.threshold;
  config["persistence"] = cfg.persistence;
  out["config"] = std::move(config);
  Json gens = Json::array();
  for (std::size_t i = 0; i < bank.generators.size(); ++i) {
    const mcn::ResidualGenerator& g = bank.generators[i];
    Json jg;
    jg["index"] = i;
    jg["class_index"] = g.class_index;
    jg["label"] = g.label;
    jg["settle_frames"] = g.settle_frames;
    gens.push_back(std::move(jg));
  }
  out["generators"] = std::move(gens);
  if (!sc.injections.empty()) {
    out["injections"] = injections_to_json(sc);
  }
  out["trace"] = mcn::trace_to_json(tr);
  out["residuals"] = mcn::matrix_to_json(det.residuals);
  Json detected = Json::array();
  for (const auto& hits : det.detected) detected.push_back(hits);
  out["detected"] = std::move(detected);
  emit(out);
  return 0;
}

int cmd_selftest(std::optional<int> criterion, unsigned seed) {
  bool all_passed = true;
  mcn::run_selftest(criterion, seed, [&](const mcn::CriterionResult& r) {
    std::printf("%s criterion %d: %s -- %s\n", r.passed ? "PASS" : "FAIL",
                r.index, r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    all_passed = all_passed && r.passed;
  });
  return all_passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Multi-hop control network modeling, failure analysis, and "
      "detection"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::vector<int> design_delays;
  int design_depth = 0;
  std::string design_full_model;
  std::optional<int> selftest_criterion;
  unsigned selftest_seed = 1;

  auto add_model_arg = [&](CLI::App* cmd) {
    cmd->add_option("model", opt.model_path, "network document (JSON)")
        ->required();
  };
  auto add_tolerances = [&](CLI::App* cmd) {
    cmd->add_option("--rank-tol", opt.rank_tol,
                    "relative rank cutoff for subspace computations");
    cmd->add_option("--eq-tol", opt.eq_tol,
                    "principal-angle tolerance for subspace comparisons");
  };
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", opt.format, "output format: json or csv");
  };
  auto add_scenario = [&](CLI::App* cmd) {
    cmd->add_option("--frames", opt.frames, "simulation horizon in frames");
    cmd->add_option("--input", opt.input,
                    "input shape: impulse, step, or random");
    cmd->add_option("--amplitude", opt.amplitude, "input amplitude");
    cmd->add_option("--seed", opt.seed, "seed for the random input");
    cmd->add_option("--inject", opt.injects,
                    "link failure as SIDE:from->to@frame (repeatable; SIDE "
                    "is R or O)");
    cmd->add_option("--protocol", opt.protocol_override,
                    "failure protocol override: zero-out or hold-last");
    cmd->add_flag("--verbose-slots", opt.verbose_slots,
                  "log every slot transmission (stderr for csv output)");
  };

  CLI::App* validate = app.add_subcommand(
      "validate", "check a network document and report violations");
  add_model_arg(validate);
  add_tolerances(validate);
  add_format(validate);

  CLI::App* gamma = app.add_subcommand(
      "gamma", "frame-delay profiles and the routes behind them");
  add_model_arg(gamma);
  add_tolerances(gamma);
  add_format(gamma);

  CLI::App* classes = app.add_subcommand(
      "classes", "failure equivalence classes and their signatures");
  add_model_arg(classes);
  add_tolerances(classes);
  add_format(classes);
  classes->add_option("--max-cardinality", opt.max_cardinality,
                      "bound the enumerated link-set size");

  CLI::App* analyze = app.add_subcommand(
      "analyze", "detectability verdicts with structural cross-checks");
  add_model_arg(analyze);
  add_tolerances(analyze);
  add_format(analyze);
  analyze->add_option("--max-cardinality", opt.max_cardinality,
                      "bound the enumerated link-set size");

  CLI::App* design = app.add_subcommand(
      "design-tree", "synthesize a measurement tree for given branch delays");
  design->add_option("--delays", design_delays,
                     "per-branch frame delays (repeat or comma-separate)")
      ->required()
      ->delimiter(',');
  design->add_option("--depth", design_depth,
                     "hops per branch (default: max requested delay)");
  design->add_option("--full-model", design_full_model,
                     "base document whose measurement side is replaced");
  add_tolerances(design);
  add_format(design);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "slot-level closed-loop simulation with link failures");
  add_model_arg(simulate);
  add_tolerances(simulate);
  add_format(simulate);
  add_scenario(simulate);

  CLI::App* detect = app.add_subcommand(
      "detect", "simulate and run the residual-generator bank");
  add_model_arg(detect);
  add_tolerances(detect);
  add_format(detect);
  add_scenario(detect);
  detect->add_option("--max-cardinality", opt.max_cardinality,
                     "bound the enumerated link-set size");
  detect->add_option("--threshold", opt.threshold,
                     "residual magnitude that counts as active");
  detect->add_option("--persistence", opt.persistence,
                     "consecutive active frames required to report");

  CLI::App* selftest = app.add_subcommand(
      "selftest", "run the acceptance criteria and report pass/fail");
  selftest->add_option("--criterion", selftest_criterion,
                       "run a single criterion (1..10)");
  selftest->add_option("--seed", selftest_seed, "base seed for the sweeps");

  simulate->get_option("--format")->default_str("csv");
  detect->get_option("--format")->default_str("csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  // Subcommand-specific format defaults (CLI11 default_str is display-only).
  CLI::App* trace_cmd =
      simulate->parsed() ? simulate : (detect->parsed() ? detect : nullptr);
  if (trace_cmd && trace_cmd->get_option("--format")->count() == 0) {
    opt.format = "csv";
  }

  try {
    if (validate->parsed()) return cmd_validate(opt);
    if (gamma->parsed()) return cmd_gamma(opt);
    if (classes->parsed()) return cmd_classes(opt);
    if (analyze->parsed()) return cmd_analyze(opt);
    if (design->parsed()) {
      return cmd_design_tree(opt, design_delays, design_depth,
                             design_full_model);
    }
    if (simulate->parsed()) return cmd_simulate(opt);
    if (detect->parsed()) return cmd_detect(opt);
    if (selftest->parsed()) {
      return cmd_selftest(selftest_criterion, selftest_seed);
    }
  } catch (const mcn::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const mcn::BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const mcn::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
