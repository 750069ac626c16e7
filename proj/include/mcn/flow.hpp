#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mcn/graph.hpp"
#include "mcn/lti.hpp"

namespace mcn {

/// The network's in-flight data: one relay value mu per declared edge, plus
/// the source value held constant over the frame. Values persist across
/// frames until the edge's slot rewrites them.
struct SlotState {
  std::map<std::pair<std::string, std::string>, double> mu;
  double mu_source = 0.0;
  int slot_index = 1;   // 1..Pi
  long frame_index = 0;
};

/// All-zero relay state at frame 0, slot 1.
SlotState init_slot_state(const ScheduledGraph& g);

/// Executes one slot: every edge scheduled at s.slot_index simultaneously
/// latches weight * content(tail), where content(tail) sums the tail's
/// incoming relay values (the held source value for the source node). All
/// reads use pre-update values. Advances slot_index by one.
SlotState step_slot(SlotState s, const ScheduledGraph& g);

/// Sum of incoming relay values at each declared sink, in sink order.
Eigen::VectorXd read_sink_outputs(const SlotState& s, const ScheduledGraph& g);

/// Frame-level network response: at each frame boundary the sink outputs
/// are sampled, then the source latches u(k) and Pi slots execute. Returns
/// an input.size() x sinks.size() matrix of sampled outputs.
Eigen::MatrixXd run_network(const ScheduledGraph& g,
                            const std::vector<double>& input);

/// One source-to-sink route through the induced graph, with its weight
/// product and frame delay. Each consecutive hop pair whose slot does not
/// increase defers delivery by one frame.
struct PathDelay {
  std::vector<Edge> path;
  double weight = 1.0;
  int delay = 1;
};

/// Exhaustive route enumeration over scheduled edges (finite by acyclicity).
std::vector<PathDelay> enumerate_path_delays(const ScheduledGraph& g,
                                             const std::string& sink);

/// Frame-delay profile by path aggregation: gamma(d) sums the weights of
/// all delay-d routes. Throws ValidationError when the sink is unreachable
/// through scheduled edges (no transfer exists).
FIRTransfer compute_gamma(const ScheduledGraph& g, const std::string& sink);

/// Independent delay-profile measurement: impulse response of run_network,
/// trimmed of trailing zeros. Returns gamma(1..D); empty when the sink
/// never receives data.
std::vector<double> compute_gamma_simulated(const ScheduledGraph& g,
                                            const std::string& sink);

/// Path-aggregation profile padded (or verified) to exactly length d,
/// zeros allowed; used for pruned graphs in failure analysis. Throws
/// ValidationError if any route is slower than d frames.
std::vector<double> compute_gamma_padded(const ScheduledGraph& g,
                                         const std::string& sink,
                                         Eigen::Index d);

/// Cross-validates the two gamma methods for every sink of g; throws
/// NumericalError with the offending sink and delay when they disagree by
/// more than `tol` (absolute, per coefficient).
void cross_check_gamma(const ScheduledGraph& g, double tol = 1e-12);

}  // namespace mcn
