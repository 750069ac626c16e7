#include "mcn/lti.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

namespace mcn {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw ValidationError(std::string(what) + ": non-finite entries");
  }
}

}  // namespace

FIRTransfer::FIRTransfer(std::vector<double> coeffs)
    : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) {
    throw ValidationError("FIRTransfer: at least one delay coefficient required");
  }
  for (double g : coeffs_) {
    if (!std::isfinite(g) || g < 0.0) {
      throw ValidationError("FIRTransfer: coefficients must be finite and nonnegative");
    }
  }
  if (coeffs_.back() == 0.0) {
    throw ValidationError("FIRTransfer: leading coefficient gamma(D) must be nonzero");
  }
}

double FIRTransfer::coeff(Eigen::Index d) const {
  if (d < 1) {
    throw ValidationError("FIRTransfer: delays are 1-based");
  }
  if (d > max_delay()) {
    return 0.0;
  }
  return coeffs_[static_cast<std::size_t>(d - 1)];
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& m, double t) {
  if (m.rows() != m.cols()) {
    throw ValidationError("expm: matrix must be square");
  }
  if (!std::isfinite(t)) {
    throw ValidationError("expm: time must be finite");
  }
  require_finite(m, "expm");
  if (m.rows() == 0) {
    return Eigen::MatrixXd(0, 0);
  }
  return (m * t).exp();
}

ContinuousLTI make_continuous_siso(const Eigen::MatrixXd& a,
                                   const Eigen::MatrixXd& b,
                                   const Eigen::MatrixXd& c,
                                   const ToleranceConfig& tol) {
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n) {
    throw ValidationError("plant: A must be square and nonempty");
  }
  if (b.rows() != n || b.cols() != 1) {
    throw ValidationError("plant: B must be n x 1");
  }
  if (c.rows() != 1 || c.cols() != n) {
    throw ValidationError("plant: C must be 1 x n");
  }
  require_finite(a, "plant A");
  require_finite(b, "plant B");
  require_finite(c, "plant C");

  Eigen::MatrixXd ctrb(n, n), obsv(n, n);
  Eigen::MatrixXd col = b;
  Eigen::MatrixXd row = c;
  for (Eigen::Index k = 0; k < n; ++k) {
    ctrb.col(k) = col;
    obsv.row(k) = row;
    col = a * col;
    row = row * a;
  }
  if (matrix_rank(ctrb, tol) != n) {
    throw ValidationError("plant: (A, B) is not controllable");
  }
  if (matrix_rank(obsv, tol) != n) {
    throw ValidationError("plant: (C, A) is not observable");
  }
  return ContinuousLTI{a, b, c};
}

DiscreteLTI discretize_plant(const ContinuousLTI& plant, double sample_time) {
  if (!(sample_time > 0.0) || !std::isfinite(sample_time)) {
    throw ValidationError("discretize_plant: sample time must be positive");
  }
  const Eigen::Index n = plant.a.rows();
  // Augment with the input column; the exponential's top-right block is the
  // convolution integral applied to B.
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = plant.a;
  aug.topRightCorner(n, 1) = plant.b;
  const Eigen::MatrixXd big = expm(aug, sample_time);
  DiscreteLTI d;
  d.a = big.topLeftCorner(n, n);
  d.b = big.topRightCorner(n, 1);
  d.c = plant.c;
  d.sample_time = sample_time;
  return d;
}

Realization realize_controllability_raw(const std::vector<double>& gamma) {
  const Eigen::Index d = static_cast<Eigen::Index>(gamma.size());
  if (d == 0) {
    throw ValidationError("realization: empty delay profile");
  }
  for (double g : gamma) {
    if (!std::isfinite(g)) {
      throw ValidationError("realization: non-finite coefficient");
    }
  }
  Realization r;
  if (d == 1) {
    r.a = Eigen::MatrixXd::Zero(1, 1);
    r.b = Eigen::MatrixXd::Constant(1, 1, gamma[0]);
    r.c = Eigen::MatrixXd::Identity(1, 1);
    return r;
  }
  r.a = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 1; j < d; ++j) {
    // First row carries gamma(D)..gamma(2) against the delay-line states.
    r.a(0, j) = gamma[static_cast<std::size_t>(d - j)];
  }
  // Delay line: state j shifts to state j-1 each frame; the last state is
  // loaded from the input.
  for (Eigen::Index i = 1; i + 1 < d; ++i) {
    r.a(i, i + 1) = 1.0;
  }
  r.b = Eigen::MatrixXd::Zero(d, 1);
  r.b(0, 0) = gamma[0];
  r.b(d - 1, 0) = 1.0;
  r.c = Eigen::MatrixXd::Zero(1, d);
  r.c(0, 0) = 1.0;
  return r;
}

Realization realize_controllability(const FIRTransfer& f) {
  return realize_controllability_raw(f.coeffs());
}

Realization realize_observability_raw(
    const std::vector<std::vector<double>>& gammas) {
  const Eigen::Index n_s = static_cast<Eigen::Index>(gammas.size());
  if (n_s == 0) {
    throw ValidationError("realization: at least one sensing output required");
  }
  const Eigen::Index d_o = static_cast<Eigen::Index>(gammas.front().size());
  if (d_o == 0) {
    throw ValidationError("realization: empty delay profile");
  }
  for (const auto& g : gammas) {
    if (static_cast<Eigen::Index>(g.size()) != d_o) {
      throw ValidationError("realization: all output profiles must share one length");
    }
    for (double v : g) {
      if (!std::isfinite(v)) {
        throw ValidationError("realization: non-finite coefficient");
      }
    }
  }
  const Eigen::Index n_o = d_o + n_s - 1;
  Realization r;
  r.a = Eigen::MatrixXd::Zero(n_o, n_o);
  r.b = Eigen::MatrixXd::Zero(n_o, 1);
  r.c = Eigen::MatrixXd::Zero(n_s, n_o);
  r.c.leftCols(n_s).setIdentity();
  for (Eigen::Index i = 0; i < n_s; ++i) {
    r.b(i, 0) = gammas[static_cast<std::size_t>(i)][0];  // gamma_i(1)
  }
  if (d_o == 1) {
    return r;  // outputs latch directly from the input; no pipeline states
  }
  // Output rows read the shared pipeline: column n_s + j holds the input
  // from d_o - j frames ago, matched with gamma_i(d_o - j + ...) so that
  // output i reproduces its own delay profile.
  for (Eigen::Index i = 0; i < n_s; ++i) {
    for (Eigen::Index j = 0; j < d_o - 1; ++j) {
      r.a(i, n_s + j) = gammas[static_cast<std::size_t>(i)]
                              [static_cast<std::size_t>(d_o - 1 - j)];
    }
  }
  // Pipeline shift; the final pipeline state is loaded from the input.
  for (Eigen::Index j = 0; j + 1 < d_o - 1; ++j) {
    r.a(n_s + j, n_s + j + 1) = 1.0;
  }
  r.b(n_o - 1, 0) = 1.0;
  return r;
}

Realization realize_observability(const std::vector<FIRTransfer>& leaf_gammas,
                                  Eigen::Index d_o, Eigen::Index n_s) {
  if (static_cast<Eigen::Index>(leaf_gammas.size()) != n_s) {
    throw ValidationError("realization: leaf count does not match n_S");
  }
  if (d_o < 1) {
    throw ValidationError("realization: maximum delay must be at least 1");
  }
  std::vector<std::vector<double>> padded;
  padded.reserve(leaf_gammas.size());
  for (const FIRTransfer& f : leaf_gammas) {
    if (f.max_delay() > d_o) {
      throw ValidationError("realization: a leaf exceeds the stated maximum delay");
    }
    std::vector<double> g(static_cast<std::size_t>(d_o), 0.0);
    for (Eigen::Index d = 1; d <= f.max_delay(); ++d) {
      g[static_cast<std::size_t>(d - 1)] = f.coeff(d);
    }
    padded.push_back(std::move(g));
  }
  return realize_observability_raw(padded);
}

DiscreteLTI assemble_mcn(const Realization& obs, const DiscreteLTI& plant,
                         const Realization& ctrl) {
  const Eigen::Index n_o = obs.a.rows();
  const Eigen::Index n_p = plant.a.rows();
  const Eigen::Index n_r = ctrl.a.rows();
  const Eigen::Index n_s = obs.c.rows();
  if (obs.b.cols() != 1 || ctrl.c.rows() != 1) {
    throw ValidationError("assemble: side chains must be single-input/single-output");
  }
  if (plant.b.cols() != 1 || plant.c.rows() != 1) {
    throw ValidationError("assemble: plant must be SISO");
  }
  if (obs.a.cols() != n_o || ctrl.a.cols() != n_r || plant.a.cols() != n_p) {
    throw ValidationError("assemble: state blocks must be square");
  }
  const Eigen::Index n = n_o + n_p + n_r;
  DiscreteLTI sys;
  sys.a = Eigen::MatrixXd::Zero(n, n);
  sys.a.topLeftCorner(n_o, n_o) = obs.a;
  sys.a.block(0, n_o, n_o, n_p) = obs.b * plant.c;
  sys.a.block(n_o, n_o, n_p, n_p) = plant.a;
  sys.a.block(n_o, n_o + n_p, n_p, n_r) = plant.b * ctrl.c;
  sys.a.bottomRightCorner(n_r, n_r) = ctrl.a;
  sys.b = Eigen::MatrixXd::Zero(n, 1);
  sys.b.bottomRows(n_r) = ctrl.b;
  sys.c = Eigen::MatrixXd::Zero(n_s, n);
  sys.c.leftCols(n_o) = obs.c;
  sys.sample_time = plant.sample_time;
  return sys;
}

}  // namespace mcn
