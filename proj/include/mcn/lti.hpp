#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mcn/errors.hpp"
#include "mcn/subspace.hpp"

namespace mcn {

/// Continuous-time SISO plant (A_c, B_c, C_c). Construct via
/// make_continuous_siso, which validates shape and minimality.
struct ContinuousLTI {
  Eigen::MatrixXd a;  // n_P x n_P
  Eigen::MatrixXd b;  // n_P x 1
  Eigen::MatrixXd c;  // 1 x n_P
};

/// Discrete-time system (A, B, C) with its sampling period. Also used for
/// the assembled closed-loop model, where B is n x 1 and C is n_S x n.
struct DiscreteLTI {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;
  double sample_time = 0.0;
};

/// FIR transfer sum_d gamma(d) z^{-d}: the frame-delay profile a scheduled
/// relay graph induces between injection and delivery. Delays are 1-based;
/// coeffs[d-1] = gamma(d). Invariants: every gamma(d) >= 0, the leading
/// coefficient gamma(D) != 0, D >= 1.
class FIRTransfer {
 public:
  explicit FIRTransfer(std::vector<double> coeffs);

  Eigen::Index max_delay() const {
    return static_cast<Eigen::Index>(coeffs_.size());
  }
  /// gamma(d) for 1 <= d; delays beyond D return 0.
  double coeff(Eigen::Index d) const;
  const std::vector<double>& coeffs() const { return coeffs_; }

 private:
  std::vector<double> coeffs_;
};

/// A state-space triple without a sampling period (building block for the
/// assembled model). b is n x 1; c is p x n.
struct Realization {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd c;
};

/// e^{M t} via scaling-and-squaring with a Pade approximant.
Eigen::MatrixXd expm(const Eigen::MatrixXd& m, double t);

/// Validates shape (square A, single input column, single output row),
/// finiteness, and minimality (full-rank controllability and observability
/// matrices at tol.rank_tol). Violations are hard errors.
ContinuousLTI make_continuous_siso(const Eigen::MatrixXd& a,
                                   const Eigen::MatrixXd& b,
                                   const Eigen::MatrixXd& c,
                                   const ToleranceConfig& tol = {});

/// Zero-order-hold discretization over one frame: A = e^{A_c T},
/// B = (integral of e^{A_c s} ds over [0, T]) B_c computed from the
/// augmented block exponential, C = C_c.
DiscreteLTI discretize_plant(const ContinuousLTI& plant, double sample_time);

/// Delay-chain realization of a single FIR transfer (actuation side).
/// n_R = D; impulse response is (0, gamma(1), ..., gamma(D), 0, ...).
Realization realize_controllability(const FIRTransfer& f);

/// As realize_controllability but from a raw coefficient vector whose length
/// fixes n_R; entries may all be zero. Used for failure analysis, where a
/// pruned graph's profile is padded to the nominal maximum delay.
Realization realize_controllability_raw(const std::vector<double>& gamma);

/// Shared-pipeline realization for n_S sensing outputs (measurement side).
/// Each leaf transfer is padded internally to the common maximum delay d_o.
/// n_O = d_o + n_S - 1; output i has impulse response gamma_i.
Realization realize_observability(const std::vector<FIRTransfer>& leaf_gammas,
                                  Eigen::Index d_o, Eigen::Index n_s);

/// Raw-vector variant: gammas[i] must all have length d_o (entries may be
/// zero). Used for failure analysis with padded profiles.
Realization realize_observability_raw(
    const std::vector<std::vector<double>>& gammas);

/// Closed-loop interconnection: the controller-side chain feeds the plant,
/// the plant feeds the measurement-side pipeline. State order (x_O, x_P,
/// x_R); B routes the plant input command through the actuation chain; C
/// reads the n_S delivered measurements.
DiscreteLTI assemble_mcn(const Realization& obs, const DiscreteLTI& plant,
                         const Realization& ctrl);

}  // namespace mcn
