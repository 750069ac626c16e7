#include "mcn/simulate.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <utility>

#include "mcn/errors.hpp"
#include "mcn/flow.hpp"

namespace mcn {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

using EdgeKey = std::pair<std::string, std::string>;

/// One relay graph under simulation, with its failure bookkeeping.
struct NetSim {
  const ScheduledGraph* g = nullptr;
  GraphSide side = GraphSide::Actuation;
  SlotState state;
  std::map<EdgeKey, FailureProtocol> faulty;

  double content_of(const std::string& node) const {
    if (node == g->source) return state.mu_source;
    double sum = 0.0;
    for (const Edge& e : g->edges) {
      if (e.to == node) sum += state.mu.at({e.from, e.to});
    }
    return sum;
  }

  /// Simultaneous update of every link scheduled in the current slot:
  /// zeroed links write 0, frozen links keep their stored datum.
  void step(std::vector<std::string>* log, Index frame) {
    const int slot = state.slot_index;
    std::vector<std::pair<EdgeKey, double>> writes;
    for (const Edge& e : g->edges) {
      if (!e.slot || *e.slot != slot) continue;
      const EdgeKey key{e.from, e.to};
      const auto it = faulty.find(key);
      if (it != faulty.end() && it->second == FailureProtocol::HoldLast) {
        continue;  // frozen: skip the write entirely
      }
      const double value =
          it != faulty.end() ? 0.0 : e.weight * content_of(e.from);
      writes.push_back({key, value});
    }
    for (const auto& [key, value] : writes) state.mu[key] = value;
    if (log) {
      for (const auto& [key, value] : writes) {
        char line[160];
        std::snprintf(line, sizeof line, "frame=%lld slot=%d %s %s->%s %.12g",
                      static_cast<long long>(frame), slot,
                      side == GraphSide::Actuation ? "R" : "O",
                      key.first.c_str(), key.second.c_str(), value);
        log->push_back(line);
      }
    }
    state.slot_index = slot % g->pi + 1;
  }

  void fail(const EdgeKey& key, FailureProtocol protocol) {
    faulty.emplace(key, protocol);
    if (protocol == FailureProtocol::ZeroOut) state.mu[key] = 0.0;
  }
};

}  // namespace

InputSpec InputSpec::impulse(double amplitude) {
  InputSpec s;
  s.kind = Kind::Impulse;
  s.amplitude = amplitude;
  return s;
}

InputSpec InputSpec::step(double amplitude) {
  InputSpec s;
  s.kind = Kind::Step;
  s.amplitude = amplitude;
  return s;
}

InputSpec InputSpec::from_samples(std::vector<double> samples) {
  InputSpec s;
  s.kind = Kind::Samples;
  s.samples = std::move(samples);
  return s;
}

InputSpec InputSpec::random_uniform(double amplitude, unsigned seed) {
  InputSpec s;
  s.kind = Kind::RandomUniform;
  s.amplitude = amplitude;
  s.seed = seed;
  return s;
}

std::vector<double> InputSpec::realize(Eigen::Index frames) const {
  if (frames <= 0) {
    throw ValidationError("simulation horizon must be positive");
  }
  std::vector<double> u(static_cast<std::size_t>(frames), 0.0);
  switch (kind) {
    case Kind::Impulse:
      u[0] = amplitude;
      break;
    case Kind::Step:
      std::fill(u.begin(), u.end(), amplitude);
      break;
    case Kind::Samples:
      if (samples.size() < u.size()) {
        throw ValidationError("sample input is shorter than the horizon");
      }
      std::copy_n(samples.begin(), u.size(), u.begin());
      break;
    case Kind::RandomUniform: {
      std::mt19937 rng(seed);
      std::uniform_real_distribution<double> dist(-amplitude, amplitude);
      for (double& v : u) v = dist(rng);
      break;
    }
  }
  return u;
}

Trace simulate_scenario(const McnModel& model, const Scenario& scenario) {
  const std::vector<double> u = scenario.input.realize(scenario.frames);

  // Validate the injection plan before anything runs.
  std::set<std::pair<GraphSide, EdgeKey>> seen;
  for (const Injection& inj : scenario.injections) {
    if (inj.frame < 0) {
      throw ValidationError("injection frame must be nonnegative");
    }
    for (const EdgeRef& ref : inj.failure.edges) {
      const ScheduledGraph& g =
          ref.side == GraphSide::Actuation ? model.g_r : model.g_o;
      const bool exists =
          std::any_of(g.edges.begin(), g.edges.end(), [&](const Edge& e) {
            return e.from == ref.from && e.to == ref.to;
          });
      if (!exists) {
        throw ValidationError("injection names a link absent from the " +
                              to_string(ref.side) + " graph: " +
                              to_string(ref));
      }
      if (!seen.insert({ref.side, {ref.from, ref.to}}).second) {
        throw ValidationError("link fails more than once across injections: " +
                              to_string(ref));
      }
    }
  }

  NetSim net_r{&model.g_r, GraphSide::Actuation, init_slot_state(model.g_r),
               {}};
  NetSim net_o{&model.g_o, GraphSide::Measurement,
               init_slot_state(model.g_o), {}};

  Trace trace;
  trace.u = u;
  trace.u_tilde.resize(u.size());
  trace.x_p.resize(scenario.frames, model.n_p);
  trace.y.resize(scenario.frames, model.n_s);
  std::vector<std::string>* log =
      scenario.record_slots ? &trace.slot_log : nullptr;

  VectorXd x_p = VectorXd::Zero(model.n_p);
  for (Index k = 0; k < scenario.frames; ++k) {
    // 1. Read what the relays delivered during earlier frames.
    const double u_tilde = read_sink_outputs(net_r.state, model.g_r)(0);
    trace.u_tilde[static_cast<std::size_t>(k)] = u_tilde;
    trace.y.row(k) = read_sink_outputs(net_o.state, model.g_o).transpose();
    trace.x_p.row(k) = x_p.transpose();

    // 2. Switch on the failures due this frame.
    for (const Injection& inj : scenario.injections) {
      if (inj.frame != k) continue;
      for (const EdgeRef& ref : inj.failure.edges) {
        NetSim& net = ref.side == GraphSide::Actuation ? net_r : net_o;
        net.fail({ref.from, ref.to}, inj.failure.protocol);
      }
    }

    // 3. Latch the frame's samples at the two sources.
    net_r.state.mu_source = u[static_cast<std::size_t>(k)];
    net_o.state.mu_source = (model.plant.c * x_p)(0);

    // 4. Run the slot schedule on both graphs.
    net_r.state.slot_index = 1;
    net_o.state.slot_index = 1;
    for (int h = 1; h <= model.g_r.pi; ++h) {
      net_r.step(log, k);
      net_o.step(log, k);
    }

    // 5. Advance the plant over one frame on the delivered actuation.
    x_p = model.plant.a * x_p + model.plant.b * u_tilde;
  }
  return trace;
}

double verify_injection_equivalence(const McnModel& model,
                                    const FailureConfig& f,
                                    Eigen::Index frames) {
  if (frames <= 0) {
    throw ValidationError("verification horizon must be positive");
  }
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> u(static_cast<std::size_t>(frames));
  for (double& v : u) v = dist(rng);

  Scenario scenario;
  scenario.input = InputSpec::from_samples(u);
  scenario.frames = frames;
  scenario.injections = {{0, f}};
  const Trace slot_trace = simulate_scenario(model, scenario);

  const FailureSignature sig = failure_signature(model, f);
  const MatrixXd a_f = model.sys.a - sig.d_a;
  const MatrixXd b_f = model.sys.b - sig.d_b;
  const Index head = model.n_o + model.n_p;

  double worst = 0.0;
  VectorXd x = VectorXd::Zero(model.n());
  for (Index k = 0; k < frames; ++k) {
    const VectorXd y = model.sys.c * x;
    worst = std::max(
        worst,
        (slot_trace.y.row(k).transpose() - y).cwiseAbs().maxCoeff());
    worst = std::max(worst,
                     (slot_trace.x_p.row(k).transpose() -
                      x.segment(model.n_o, model.n_p))
                         .cwiseAbs()
                         .maxCoeff());
    const double u_tilde_ss = model.n_r > 0 ? x(head) : 0.0;
    worst = std::max(
        worst,
        std::abs(slot_trace.u_tilde[static_cast<std::size_t>(k)] -
                 u_tilde_ss));
    x = a_f * x + b_f * u[static_cast<std::size_t>(k)];
  }
  return worst;
}

}  // namespace mcn
