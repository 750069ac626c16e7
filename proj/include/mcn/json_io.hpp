#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "mcn/fdi.hpp"
#include "mcn/model.hpp"
#include "mcn/simulate.hpp"

namespace mcn {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits; applied to every number serialized so
/// documents and goldens stay stable across platforms.
double round_sig(double v);

Json matrix_to_json(const Eigen::MatrixXd& m);
/// Expects an array of equally long row arrays of numbers.
Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& name);

/// On-disk description of a network: plant matrices with the slot duration,
/// the two relay graphs, the shared frame length, and the failure protocol
/// assumed by scenario commands.
struct ModelDocument {
  Eigen::MatrixXd a, b, c;
  double delta = 0.0;
  ScheduledGraph g_r;
  ScheduledGraph g_o;
  FailureProtocol protocol = FailureProtocol::ZeroOut;
};

ModelDocument model_document_from_json(const Json& j);
Json to_json(const ModelDocument& d);
McnModel build_from_document(const ModelDocument& d,
                             const ToleranceConfig& tol = {});

/// Report serializers used by the command-line tool.
Json gamma_to_json(const McnModel& m);
Json classes_to_json(const FailureClassSet& set);
Json report_to_json(const DetectabilityReport& rep,
                    const ToleranceConfig& tol);
Json trace_to_json(const Trace& t);
Json graph_to_json(const ScheduledGraph& g, const std::string& source_key,
                   const std::string& sinks_key);

/// CSV trace: frame,u,u_tilde,y_1..y_nS[,r_1..r_m,detected]. The detected
/// column joins firing generator indices with ';'.
std::string format_trace_csv(
    const Trace& t, const Eigen::MatrixXd* residuals = nullptr,
    const std::vector<std::vector<std::size_t>>* detected = nullptr);

}  // namespace mcn
