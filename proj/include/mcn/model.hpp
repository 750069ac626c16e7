#pragma once

#include <vector>

#include "mcn/flow.hpp"
#include "mcn/graph.hpp"
#include "mcn/lti.hpp"

namespace mcn {

/// A validated SISO multi-hop control network together with the derived
/// frame-level closed-loop model. Instances come from build_model and are
/// immutable afterwards.
struct McnModel {
  // Definition inputs.
  ContinuousLTI plant_ct;
  ScheduledGraph g_r;   // actuation relay graph: controller -> actuator
  ScheduledGraph g_o;   // measurement relay graph: sensor -> terminating nodes
  double delta = 0.0;   // slot duration; one frame lasts pi * delta

  // Derived frame-level model.
  DiscreteLTI plant;                  // zero-order hold over one frame
  FIRTransfer gamma_r{{1.0}};         // actuation-side delay profile
  std::vector<FIRTransfer> gamma_o;   // one profile per terminating node
  Realization ctrl;                   // actuation-side realization
  Realization obs;                    // measurement-side realization
  DiscreteLTI sys;                    // assembled interconnection (A, B, C)

  Eigen::Index n_o = 0;  // measurement-side state count
  Eigen::Index n_p = 0;  // plant state count
  Eigen::Index n_r = 0;  // actuation-side state count
  Eigen::Index n_s = 0;  // terminating node count
  Eigen::Index d_r = 0;  // actuation maximum frame delay
  Eigen::Index d_o = 0;  // measurement maximum frame delay

  Eigen::Index n() const { return n_o + n_p + n_r; }
  double frame_time() const { return delta * g_r.pi; }
};

/// Validates the network definition and assembles the frame-level model:
/// both graphs well formed and jointly connected, one actuator sink, a
/// shared frame length, a minimal plant, positive slot duration; the two
/// delay-profile methods are cross-checked as a build certificate
/// (NumericalError on disagreement).
McnModel build_model(const ContinuousLTI& plant_ct, const ScheduledGraph& g_r,
                     const ScheduledGraph& g_o, double delta,
                     const ToleranceConfig& tol = {});

}  // namespace mcn
