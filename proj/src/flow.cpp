#include "mcn/flow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace mcn {

namespace {

using EdgeKey = std::pair<std::string, std::string>;

EdgeKey key_of(const Edge& e) { return {e.from, e.to}; }

double content_of(const SlotState& s, const ScheduledGraph& g,
                  const std::string& node) {
  if (node == g.source) {
    return s.mu_source;
  }
  double sum = 0.0;
  for (const Edge& e : g.edges) {
    if (e.to == node) {
      sum += s.mu.at(key_of(e));
    }
  }
  return sum;
}

}  // namespace

SlotState init_slot_state(const ScheduledGraph& g) {
  SlotState s;
  for (const Edge& e : g.edges) {
    s.mu[key_of(e)] = 0.0;
  }
  return s;
}

SlotState step_slot(SlotState s, const ScheduledGraph& g) {
  if (s.slot_index < 1 || s.slot_index > g.pi) {
    throw ValidationError("step_slot: slot index " +
                          std::to_string(s.slot_index) +
                          " outside 1.." + std::to_string(g.pi));
  }
  // Simultaneous update: gather new values against the pre-update state.
  std::vector<std::pair<EdgeKey, double>> writes;
  for (const Edge& e : g.edges) {
    if (e.slot && *e.slot == s.slot_index) {
      writes.emplace_back(key_of(e), e.weight * content_of(s, g, e.from));
    }
  }
  for (const auto& [key, value] : writes) {
    s.mu[key] = value;
  }
  ++s.slot_index;
  return s;
}

Eigen::VectorXd read_sink_outputs(const SlotState& s,
                                  const ScheduledGraph& g) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(g.sinks.size()));
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const std::string& sink = g.sinks[static_cast<std::size_t>(j)];
    for (const Edge& e : g.edges) {
      if (e.to == sink) {
        y(j) += s.mu.at(key_of(e));
      }
    }
  }
  return y;
}

Eigen::MatrixXd run_network(const ScheduledGraph& g,
                            const std::vector<double>& input) {
  require_valid(g);
  for (double u : input) {
    if (!std::isfinite(u)) {
      throw ValidationError("run_network: non-finite input");
    }
  }
  const Eigen::Index frames = static_cast<Eigen::Index>(input.size());
  Eigen::MatrixXd outputs(frames, static_cast<Eigen::Index>(g.sinks.size()));
  SlotState s = init_slot_state(g);
  for (Eigen::Index k = 0; k < frames; ++k) {
    outputs.row(k) = read_sink_outputs(s, g).transpose();
    s.mu_source = input[static_cast<std::size_t>(k)];
    s.slot_index = 1;
    s.frame_index = k;
    for (int h = 1; h <= g.pi; ++h) {
      s = step_slot(std::move(s), g);
    }
  }
  return outputs;
}

std::vector<PathDelay> enumerate_path_delays(const ScheduledGraph& g,
                                             const std::string& sink) {
  require_valid(g);
  std::map<std::string, std::vector<const Edge*>> out_edges;
  for (const Edge& e : g.edges) {
    if (e.slot) {
      out_edges[e.from].push_back(&e);
    }
  }

  std::vector<PathDelay> result;
  std::vector<const Edge*> stack;
  // Acyclicity (validated above) bounds the recursion.
  const std::function<void(const std::string&)> dfs =
      [&](const std::string& node) {
        if (node == sink) {
          PathDelay pd;
          pd.weight = 1.0;
          pd.delay = 1;
          for (std::size_t i = 0; i < stack.size(); ++i) {
            pd.path.push_back(*stack[i]);
            pd.weight *= stack[i]->weight;
            if (i > 0 && *stack[i]->slot <= *stack[i - 1]->slot) {
              ++pd.delay;  // non-increasing slot pair defers one frame
            }
          }
          result.push_back(std::move(pd));
          return;
        }
        for (const Edge* e : out_edges[node]) {
          stack.push_back(e);
          dfs(e->to);
          stack.pop_back();
        }
      };
  dfs(g.source);
  return result;
}

FIRTransfer compute_gamma(const ScheduledGraph& g, const std::string& sink) {
  const std::vector<PathDelay> paths = enumerate_path_delays(g, sink);
  if (paths.empty()) {
    throw ValidationError("compute_gamma: sink " + sink +
                          " unreachable through scheduled edges");
  }
  int d_max = 0;
  for (const PathDelay& p : paths) {
    d_max = std::max(d_max, p.delay);
  }
  std::vector<double> gamma(static_cast<std::size_t>(d_max), 0.0);
  for (const PathDelay& p : paths) {
    gamma[static_cast<std::size_t>(p.delay - 1)] += p.weight;
  }
  return FIRTransfer(std::move(gamma));
}

std::vector<double> compute_gamma_simulated(const ScheduledGraph& g,
                                            const std::string& sink) {
  const auto sink_it = std::find(g.sinks.begin(), g.sinks.end(), sink);
  if (sink_it == g.sinks.end()) {
    throw ValidationError("compute_gamma_simulated: " + sink +
                          " is not a declared sink");
  }
  const Eigen::Index col = sink_it - g.sinks.begin();
  const std::size_t frames =
      g.nodes.size() * static_cast<std::size_t>(g.pi) +
      static_cast<std::size_t>(g.pi) + 1;
  std::vector<double> impulse(frames, 0.0);
  impulse[0] = 1.0;
  const Eigen::MatrixXd response = run_network(g, impulse);
  std::vector<double> gamma;
  for (Eigen::Index k = 1; k < response.rows(); ++k) {
    gamma.push_back(response(k, col));
  }
  while (!gamma.empty() && gamma.back() == 0.0) {
    gamma.pop_back();
  }
  return gamma;
}

std::vector<double> compute_gamma_padded(const ScheduledGraph& g,
                                         const std::string& sink,
                                         Eigen::Index d) {
  if (d < 1) {
    throw ValidationError("compute_gamma_padded: length must be positive");
  }
  std::vector<double> gamma(static_cast<std::size_t>(d), 0.0);
  for (const PathDelay& p : enumerate_path_delays(g, sink)) {
    if (p.delay > d) {
      throw ValidationError(
          "compute_gamma_padded: a route needs " + std::to_string(p.delay) +
          " frames, beyond the stated maximum " + std::to_string(d));
    }
    gamma[static_cast<std::size_t>(p.delay - 1)] += p.weight;
  }
  return gamma;
}

void cross_check_gamma(const ScheduledGraph& g, double tol) {
  for (const std::string& sink : g.sinks) {
    const FIRTransfer by_paths = compute_gamma(g, sink);
    const std::vector<double> by_sim = compute_gamma_simulated(g, sink);
    const Eigen::Index d_max =
        std::max(by_paths.max_delay(),
                 static_cast<Eigen::Index>(by_sim.size()));
    for (Eigen::Index d = 1; d <= d_max; ++d) {
      const double pathwise = by_paths.coeff(d);
      const double simulated =
          d <= static_cast<Eigen::Index>(by_sim.size())
              ? by_sim[static_cast<std::size_t>(d - 1)]
              : 0.0;
      if (std::abs(pathwise - simulated) > tol) {
        std::ostringstream msg;
        msg << "gamma cross-check failed at sink " << sink << ", delay " << d
            << ": path aggregation " << pathwise << " vs slot simulation "
            << simulated;
        throw NumericalError(msg.str());
      }
    }
  }
}

}  // namespace mcn
