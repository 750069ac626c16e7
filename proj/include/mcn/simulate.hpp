#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mcn/fdi.hpp"
#include "mcn/model.hpp"

namespace mcn {

/// Frame-indexed input signal for a simulation scenario.
struct InputSpec {
  enum class Kind { Impulse, Step, Samples, RandomUniform };

  Kind kind = Kind::Step;
  double amplitude = 1.0;
  std::vector<double> samples;  // Kind::Samples
  unsigned seed = 0;            // Kind::RandomUniform

  static InputSpec impulse(double amplitude = 1.0);
  static InputSpec step(double amplitude = 1.0);
  static InputSpec from_samples(std::vector<double> samples);
  static InputSpec random_uniform(double amplitude = 1.0, unsigned seed = 0);

  /// The concrete per-frame values over a horizon. Sample inputs must cover
  /// the horizon; random inputs are reproducible from the seed.
  std::vector<double> realize(Eigen::Index frames) const;
};

/// A failure configuration switched on at the start of `frame` (after that
/// frame's outputs are read). Failures are permanent.
struct Injection {
  Eigen::Index frame = 0;
  FailureConfig failure;
};

struct Scenario {
  InputSpec input;
  Eigen::Index frames = 50;
  std::vector<Injection> injections;
  bool record_slots = false;
};

/// Frame-level history of a slot simulation. Row k holds the values read
/// or held at frame k: the commanded input, the delivered actuation, the
/// plant state before its frame update, and the delivered measurements.
struct Trace {
  std::vector<double> u;
  std::vector<double> u_tilde;
  Eigen::MatrixXd x_p;  // frames x n_P
  Eigen::MatrixXd y;    // frames x n_S
  std::vector<std::string> slot_log;  // nonempty iff record_slots
};

/// Slot-by-slot simulation of the closed network. Each frame: read the
/// delivered actuation and measurements, switch on due failures (zero-out
/// clears the link's stored datum; hold-last freezes it), latch the frame's
/// input and sensor samples, run the slot schedule on both graphs, then
/// advance the plant over one frame.
Trace simulate_scenario(const McnModel& model, const Scenario& scenario);

/// Certificate that a link failure switched on at frame 0 behaves exactly
/// like the additive perturbation (d_a, d_b) on the assembled model: runs
/// both descriptions on a reproducible random input and returns the largest
/// deviation across outputs, plant state, and delivered actuation.
double verify_injection_equivalence(const McnModel& model,
                                    const FailureConfig& f,
                                    Eigen::Index frames);

}  // namespace mcn
