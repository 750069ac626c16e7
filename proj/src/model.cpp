#include "mcn/model.hpp"

#include <algorithm>
#include <cmath>

namespace mcn {

McnModel build_model(const ContinuousLTI& plant_ct, const ScheduledGraph& g_r,
                     const ScheduledGraph& g_o, double delta,
                     const ToleranceConfig& tol) {
  require_valid(g_r);
  require_valid(g_o);
  if (g_r.sinks.size() != 1) {
    throw ValidationError(
        "model: the actuation graph must declare exactly one actuator sink");
  }
  if (g_r.pi != g_o.pi) {
    throw ValidationError(
        "model: both graphs must share one frame length (got " +
        std::to_string(g_r.pi) + " and " + std::to_string(g_o.pi) + ")");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ValidationError("model: slot duration must be positive");
  }
  if (!is_jointly_connected(g_r)) {
    throw ValidationError(
        "model: actuator unreachable through scheduled actuation edges");
  }
  if (!is_jointly_connected(g_o)) {
    throw ValidationError(
        "model: a terminating node is unreachable through scheduled "
        "measurement edges");
  }

  McnModel m;
  m.plant_ct = make_continuous_siso(plant_ct.a, plant_ct.b, plant_ct.c, tol);
  m.g_r = g_r;
  m.g_o = g_o;
  m.delta = delta;

  // Build certificate: the path-aggregation and slot-simulation delay
  // profiles must agree on every sink of both graphs.
  cross_check_gamma(g_r);
  cross_check_gamma(g_o);

  m.gamma_r = compute_gamma(g_r, g_r.sinks.front());
  for (const std::string& sink : g_o.sinks) {
    m.gamma_o.push_back(compute_gamma(g_o, sink));
  }

  m.n_s = static_cast<Eigen::Index>(g_o.sinks.size());
  m.d_r = m.gamma_r.max_delay();
  m.d_o = 1;
  for (const FIRTransfer& f : m.gamma_o) {
    m.d_o = std::max(m.d_o, f.max_delay());
  }

  m.ctrl = realize_controllability(m.gamma_r);
  m.obs = realize_observability(m.gamma_o, m.d_o, m.n_s);
  m.plant = discretize_plant(m.plant_ct, m.frame_time());
  m.sys = assemble_mcn(m.obs, m.plant, m.ctrl);

  m.n_o = m.obs.a.rows();
  m.n_p = m.plant.a.rows();
  m.n_r = m.ctrl.a.rows();
  return m;
}

}  // namespace mcn
