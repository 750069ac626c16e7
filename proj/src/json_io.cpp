#include "mcn/json_io.hpp"

#include <cstdio>
#include <cstdlib>

#include "mcn/errors.hpp"

namespace mcn {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

const Json& need(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError("document is missing \"" + std::string(key) +
                          "\" in " + where);
  }
  return j.at(key);
}

double need_number(const Json& j, const char* key,
                   const std::string& where) {
  const Json& v = need(j, key, where);
  if (!v.is_number()) {
    throw ValidationError("\"" + std::string(key) + "\" in " + where +
                          " must be a number");
  }
  return v.get<double>();
}

std::string need_string(const Json& j, const char* key,
                        const std::string& where) {
  const Json& v = need(j, key, where);
  if (!v.is_string()) {
    throw ValidationError("\"" + std::string(key) + "\" in " + where +
                          " must be a string");
  }
  return v.get<std::string>();
}

ScheduledGraph graph_from_json(const Json& j, const std::string& source_key,
                               const std::string& sinks_key,
                               const std::string& where) {
  ScheduledGraph g;
  const Json& nodes = need(j, "nodes", where);
  if (!nodes.is_array()) {
    throw ValidationError("\"nodes\" in " + where + " must be an array");
  }
  for (const Json& n : nodes) {
    if (!n.is_string()) {
      throw ValidationError("\"nodes\" in " + where +
                            " must contain strings");
    }
    g.nodes.push_back(n.get<std::string>());
  }
  g.source = need_string(j, source_key.c_str(), where);
  const Json& sinks = need(j, sinks_key.c_str(), where);
  if (sinks.is_string()) {
    g.sinks.push_back(sinks.get<std::string>());
  } else if (sinks.is_array()) {
    for (const Json& s : sinks) {
      if (!s.is_string()) {
        throw ValidationError("\"" + sinks_key + "\" in " + where +
                              " must contain strings");
      }
      g.sinks.push_back(s.get<std::string>());
    }
  } else {
    throw ValidationError("\"" + sinks_key + "\" in " + where +
                          " must be a string or an array of strings");
  }
  const Json& edges = need(j, "edges", where);
  if (!edges.is_array()) {
    throw ValidationError("\"edges\" in " + where + " must be an array");
  }
  for (const Json& e : edges) {
    Edge edge;
    edge.from = need_string(e, "from", where + " edge");
    edge.to = need_string(e, "to", where + " edge");
    edge.weight = e.contains("weight")
                      ? need_number(e, "weight", where + " edge")
                      : 1.0;
    if (e.contains("slot") && !e.at("slot").is_null()) {
      if (!e.at("slot").is_number_integer()) {
        throw ValidationError("\"slot\" in " + where +
                              " edge must be an integer");
      }
      edge.slot = e.at("slot").get<int>();
    }
    g.edges.push_back(std::move(edge));
  }
  return g;
}

Json edge_to_json(const Edge& e) {
  Json j;
  j["from"] = e.from;
  j["to"] = e.to;
  j["weight"] = round_sig(e.weight);
  if (e.slot) {
    j["slot"] = *e.slot;
  } else {
    j["slot"] = nullptr;
  }
  return j;
}

Json edge_refs_to_json(const std::vector<EdgeRef>& refs) {
  Json arr = Json::array();
  for (const EdgeRef& r : refs) arr.push_back(to_string(r));
  return arr;
}

Json subspace_basis_to_json(const Subspace& s) {
  return matrix_to_json(s.basis());
}

}  // namespace

double round_sig(double v) {
  return std::atof(fmt(v).c_str());
}

Json matrix_to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(round_sig(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const Json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError("\"" + name +
                          "\" must be a nonempty array of row arrays");
  }
  const std::size_t rows = j.size();
  if (!j.at(0).is_array()) {
    throw ValidationError("\"" + name + "\" rows must be arrays of numbers");
  }
  const std::size_t cols = j.at(0).size();
  MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const Json& row = j.at(r);
    if (!row.is_array() || row.size() != cols) {
      throw ValidationError("\"" + name + "\" row " + std::to_string(r) +
                            " has inconsistent width");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row.at(c).is_number()) {
        throw ValidationError("\"" + name + "\" contains a non-number");
      }
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          row.at(c).get<double>();
    }
  }
  return m;
}

ModelDocument model_document_from_json(const Json& j) {
  ModelDocument d;
  const Json& plant = need(j, "plant", "the document root");
  d.a = matrix_from_json(need(plant, "A", "plant"), "plant.A");
  d.b = matrix_from_json(need(plant, "B", "plant"), "plant.B");
  d.c = matrix_from_json(need(plant, "C", "plant"), "plant.C");
  d.delta = need_number(plant, "delta", "plant");

  d.g_r = graph_from_json(need(j, "controllability", "the document root"),
                          "controller", "actuator", "controllability");
  d.g_o = graph_from_json(need(j, "observability", "the document root"),
                          "sensor", "terminating", "observability");
  const Json& pi = need(j, "pi", "the document root");
  if (!pi.is_number_integer()) {
    throw ValidationError("\"pi\" must be an integer frame length");
  }
  d.g_r.pi = pi.get<int>();
  d.g_o.pi = pi.get<int>();

  if (j.contains("protocol")) {
    if (!j.at("protocol").is_string()) {
      throw ValidationError("\"protocol\" must be a string");
    }
    const std::string p = j.at("protocol").get<std::string>();
    if (p == "zero-out") {
      d.protocol = FailureProtocol::ZeroOut;
    } else if (p == "hold-last") {
      d.protocol = FailureProtocol::HoldLast;
    } else {
      throw ValidationError(
          "\"protocol\" must be \"zero-out\" or \"hold-last\"");
    }
  }
  return d;
}

Json graph_to_json(const ScheduledGraph& g, const std::string& source_key,
                   const std::string& sinks_key) {
  Json j;
  j["nodes"] = g.nodes;
  j[source_key] = g.source;
  if (sinks_key == "actuator") {
    j[sinks_key] = g.sinks.empty() ? std::string() : g.sinks.front();
  } else {
    j[sinks_key] = g.sinks;
  }
  Json edges = Json::array();
  for (const Edge& e : g.edges) edges.push_back(edge_to_json(e));
  j["edges"] = std::move(edges);
  return j;
}

Json to_json(const ModelDocument& d) {
  Json j;
  Json plant;
  plant["A"] = matrix_to_json(d.a);
  plant["B"] = matrix_to_json(d.b);
  plant["C"] = matrix_to_json(d.c);
  plant["delta"] = round_sig(d.delta);
  j["plant"] = std::move(plant);
  j["controllability"] = graph_to_json(d.g_r, "controller", "actuator");
  j["observability"] = graph_to_json(d.g_o, "sensor", "terminating");
  j["pi"] = d.g_r.pi;
  j["protocol"] = to_string(d.protocol);
  return j;
}

McnModel build_from_document(const ModelDocument& d,
                             const ToleranceConfig& tol) {
  const ContinuousLTI plant = make_continuous_siso(d.a, d.b, d.c, tol);
  return build_model(plant, d.g_r, d.g_o, d.delta, tol);
}

Json gamma_to_json(const McnModel& m) {
  Json j;
  j["pi"] = m.g_r.pi;
  j["frame_time"] = round_sig(m.frame_time());

  auto side = [&](const ScheduledGraph& g, const FIRTransfer& gamma,
                  const std::string& sink) {
    Json s;
    s["sink"] = sink;
    Json coeffs = Json::array();
    for (Index d = 1; d <= gamma.max_delay(); ++d) {
      coeffs.push_back(round_sig(gamma.coeff(d)));
    }
    s["gamma"] = std::move(coeffs);
    s["max_delay"] = gamma.max_delay();
    Json paths = Json::array();
    for (const PathDelay& pd : enumerate_path_delays(g, sink)) {
      Json p;
      Json route = Json::array();
      route.push_back(g.source);
      for (const Edge& e : pd.path) route.push_back(e.to);
      p["route"] = std::move(route);
      p["weight"] = round_sig(pd.weight);
      p["delay"] = pd.delay;
      paths.push_back(std::move(p));
    }
    s["routes"] = std::move(paths);
    return s;
  };

  j["actuation"] = side(m.g_r, m.gamma_r, m.g_r.sinks.front());
  Json obs = Json::array();
  for (std::size_t i = 0; i < m.g_o.sinks.size(); ++i) {
    obs.push_back(side(m.g_o, m.gamma_o[i], m.g_o.sinks[i]));
  }
  j["observability"] = std::move(obs);
  j["cross_check"] = "ok";  // build_model certified both methods agree
  return j;
}

Json classes_to_json(const FailureClassSet& set) {
  Json j;
  j["case"] = to_string(set.mcn_case);
  Json sides = Json::array();
  for (GraphSide s : set.enumerated_sides) sides.push_back(to_string(s));
  j["enumerated_sides"] = std::move(sides);
  j["exhaustive"] = set.exhaustive;

  Json classes = Json::array();
  for (std::size_t i = 0; i < set.omega.size(); ++i) {
    const FailureClass& cls = set.omega[i];
    Json c;
    c["index"] = i;
    c["representative"] = edge_refs_to_json(cls.representative);
    c["in_sigma"] = cls.in_sigma;
    c["member_count"] = cls.members.size();
    Json members = Json::array();
    for (const auto& member : cls.members) {
      members.push_back(edge_refs_to_json(member));
    }
    c["members"] = std::move(members);
    Json delta_r = Json::array();
    for (Index d = 0; d < cls.signature.delta_r.size(); ++d) {
      delta_r.push_back(round_sig(cls.signature.delta_r(d)));
    }
    c["delta_r"] = std::move(delta_r);
    c["delta_o"] = matrix_to_json(cls.signature.delta_o);
    c["image_dim"] = cls.signature.image.dim();
    c["image_basis"] = subspace_basis_to_json(cls.signature.image);
    classes.push_back(std::move(c));
  }
  j["classes"] = std::move(classes);
  j["phi"] = set.phi_indices();
  j["n_phi"] = set.n_phi();
  return j;
}

Json report_to_json(const DetectabilityReport& rep,
                    const ToleranceConfig& tol) {
  Json j;
  j["case"] = to_string(rep.mcn_case);
  j["classes"] = classes_to_json(rep.classes);
  Json solvable = Json::array();
  for (const auto& v : rep.solvable) {
    if (v.has_value()) {
      solvable.push_back(*v);
    } else {
      solvable.push_back(nullptr);
    }
  }
  j["solvable"] = std::move(solvable);
  Json tree;
  tree["is_tree"] = rep.tree.is_tree;
  tree["offending_nodes"] = rep.tree.offending_nodes;
  tree["unreachable"] = rep.tree.unreachable;
  tree["leaf_mismatch"] = rep.tree.leaf_mismatch;
  j["tree"] = std::move(tree);
  j["n_s"] = rep.n_s;
  j["n_phi"] = rep.n_phi;
  j["d_l_phi"] = rep.d_l_phi;
  j["all_solvable"] = rep.all_solvable;
  j["structural_prediction"] = rep.structural_prediction;
  j["internal_inconsistency"] = rep.internal_inconsistency;
  j["annotations"] = rep.annotations;
  j["recommendation"] = rep.recommendation;
  Json tols;
  tols["rank_tol"] = tol.rank_tol;
  tols["eq_tol"] = tol.eq_tol;
  j["tolerances"] = std::move(tols);
  return j;
}

Json trace_to_json(const Trace& t) {
  Json j;
  j["frames"] = t.u.size();
  Json u = Json::array(), ut = Json::array();
  for (double v : t.u) u.push_back(round_sig(v));
  for (double v : t.u_tilde) ut.push_back(round_sig(v));
  j["u"] = std::move(u);
  j["u_tilde"] = std::move(ut);
  j["y"] = matrix_to_json(t.y);
  j["x_p"] = matrix_to_json(t.x_p);
  if (!t.slot_log.empty()) j["slot_log"] = t.slot_log;
  return j;
}

std::string format_trace_csv(
    const Trace& t, const Eigen::MatrixXd* residuals,
    const std::vector<std::vector<std::size_t>>* detected) {
  const Index frames = t.y.rows();
  if (residuals && residuals->rows() != frames) {
    throw ValidationError("residual trace length does not match the trace");
  }
  std::string out = "frame,u,u_tilde";
  for (Index i = 1; i <= t.y.cols(); ++i) {
    out += ",y_" + std::to_string(i);
  }
  if (residuals) {
    for (Index i = 1; i <= residuals->cols(); ++i) {
      out += ",r_" + std::to_string(i);
    }
  }
  if (detected) out += ",detected";
  out += "\n";
  for (Index k = 0; k < frames; ++k) {
    out += std::to_string(k);
    out += "," + fmt(t.u[static_cast<std::size_t>(k)]);
    out += "," + fmt(t.u_tilde[static_cast<std::size_t>(k)]);
    for (Index i = 0; i < t.y.cols(); ++i) out += "," + fmt(t.y(k, i));
    if (residuals) {
      for (Index i = 0; i < residuals->cols(); ++i) {
        out += "," + fmt((*residuals)(k, i));
      }
    }
    if (detected) {
      out += ",";
      const auto& hits = (*detected)[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < hits.size(); ++i) {
        if (i) out += ";";
        out += std::to_string(hits[i]);
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace mcn
