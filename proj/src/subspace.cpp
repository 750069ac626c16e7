#include "mcn/subspace.hpp"

#include <algorithm>
#include <string>

namespace mcn {

namespace {

Eigen::Index svd_rank(const Eigen::VectorXd& singular_values, double rank_tol) {
  if (singular_values.size() == 0) {
    return 0;
  }
  const double cutoff = rank_tol * singular_values(0);
  if (singular_values(0) == 0.0) {
    return 0;
  }
  Eigen::Index r = 0;
  while (r < singular_values.size() && singular_values(r) > cutoff) {
    ++r;
  }
  return r;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) {
    return 0.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

}  // namespace

Subspace Subspace::zero(Eigen::Index ambient) {
  if (ambient < 0) {
    throw ValidationError("subspace ambient dimension must be nonnegative");
  }
  return Subspace(ambient, Eigen::MatrixXd(ambient, 0));
}

Subspace Subspace::full(Eigen::Index ambient) {
  if (ambient < 0) {
    throw ValidationError("subspace ambient dimension must be nonnegative");
  }
  return Subspace(ambient, Eigen::MatrixXd::Identity(ambient, ambient));
}

Subspace Subspace::span(const Eigen::MatrixXd& columns,
                        const ToleranceConfig& tol) {
  const Eigen::Index ambient = columns.rows();
  if (columns.cols() == 0 || columns.size() == 0) {
    return zero(ambient);
  }
  if (!columns.allFinite()) {
    throw ValidationError("span: matrix has non-finite entries");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
  const Eigen::Index r = svd_rank(svd.singularValues(), tol.rank_tol);
  return Subspace(ambient, svd.matrixU().leftCols(r));
}

Subspace Subspace::from_orthonormal(Eigen::MatrixXd basis) {
  const Eigen::Index r = basis.cols();
  if (r > 0) {
    const double defect =
        (basis.transpose() * basis - Eigen::MatrixXd::Identity(r, r))
            .cwiseAbs()
            .maxCoeff();
    if (defect > 1e-8) {
      throw ValidationError("from_orthonormal: columns are not orthonormal");
    }
  }
  const Eigen::Index ambient = basis.rows();
  return Subspace(ambient, std::move(basis));
}

Eigen::MatrixXd Subspace::projector() const {
  if (dim() == 0) {
    return Eigen::MatrixXd::Zero(ambient_, ambient_);
  }
  return basis_ * basis_.transpose();
}

Eigen::Index matrix_rank(const Eigen::MatrixXd& m, const ToleranceConfig& tol) {
  if (m.size() == 0) {
    return 0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd_rank(svd.singularValues(), tol.rank_tol);
}

Subspace sum(const Subspace& u, const Subspace& v, const ToleranceConfig& tol) {
  if (u.ambient() != v.ambient()) {
    throw ValidationError("sum: ambient dimension mismatch");
  }
  if (u.is_zero()) {
    return v;
  }
  if (v.is_zero()) {
    return u;
  }
  Eigen::MatrixXd joint(u.ambient(), u.dim() + v.dim());
  joint << u.basis(), v.basis();
  return Subspace::span(joint, tol);
}

Subspace kernel(const Eigen::MatrixXd& c, const ToleranceConfig& tol) {
  const Eigen::Index n = c.cols();
  if (c.rows() == 0) {
    return Subspace::full(n);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullV);
  const Eigen::Index r = svd_rank(svd.singularValues(), tol.rank_tol);
  return Subspace::from_orthonormal(svd.matrixV().rightCols(n - r));
}

Subspace orth_complement(const Subspace& u, const ToleranceConfig& tol) {
  if (u.is_zero()) {
    return Subspace::full(u.ambient());
  }
  return kernel(u.basis().transpose(), tol);
}

Subspace intersect(const Subspace& u, const Subspace& v,
                   const ToleranceConfig& tol) {
  if (u.ambient() != v.ambient()) {
    throw ValidationError("intersect: ambient dimension mismatch");
  }
  if (u.is_zero() || v.is_zero()) {
    return Subspace::zero(u.ambient());
  }
  if (u.is_full()) {
    return v;
  }
  if (v.is_full()) {
    return u;
  }
  return orth_complement(sum(orth_complement(u, tol), orth_complement(v, tol), tol),
                         tol);
}

Subspace preimage(const Eigen::MatrixXd& a, const Subspace& s,
                  const ToleranceConfig& tol) {
  if (a.rows() != s.ambient()) {
    throw ValidationError("preimage: ambient dimension mismatch");
  }
  if (s.is_full()) {
    return Subspace::full(a.cols());
  }
  const Eigen::MatrixXd residual_map =
      (Eigen::MatrixXd::Identity(a.rows(), a.rows()) - s.projector()) * a;
  return kernel(residual_map, tol);
}

Subspace image(const Eigen::MatrixXd& a, const Subspace& s,
               const ToleranceConfig& tol) {
  if (a.cols() != s.ambient()) {
    throw ValidationError("image: ambient dimension mismatch");
  }
  if (s.is_zero()) {
    return Subspace::zero(a.rows());
  }
  return Subspace::span(a * s.basis(), tol);
}

double sin_max_principal_angle(const Subspace& outer, const Subspace& inner) {
  if (outer.ambient() != inner.ambient()) {
    throw ValidationError("principal angle: ambient dimension mismatch");
  }
  if (inner.is_zero()) {
    return 0.0;
  }
  if (outer.is_zero()) {
    return 1.0;
  }
  const Eigen::MatrixXd residual =
      inner.basis() - outer.basis() * (outer.basis().transpose() * inner.basis());
  return std::min(1.0, spectral_norm(residual));
}

bool contains(const Subspace& outer, const Subspace& inner,
              const ToleranceConfig& tol) {
  if (inner.dim() > outer.dim()) {
    return false;
  }
  return sin_max_principal_angle(outer, inner) <= tol.eq_tol;
}

bool equal(const Subspace& u, const Subspace& v, const ToleranceConfig& tol) {
  if (u.dim() != v.dim()) {
    return false;
  }
  return std::max(sin_max_principal_angle(u, v),
                  sin_max_principal_angle(v, u)) <= tol.eq_tol;
}

namespace {

void check_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
                const Subspace& l, const char* who) {
  if (a.rows() != a.cols()) {
    throw ValidationError(std::string(who) + ": A must be square");
  }
  if (c.cols() != a.cols()) {
    throw ValidationError(std::string(who) + ": C column count must match A");
  }
  if (l.ambient() != a.cols()) {
    throw ValidationError(std::string(who) +
                          ": subspace ambient must match state dimension");
  }
}

}  // namespace

Subspace caisa(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
               const Subspace& l, const ToleranceConfig& tol) {
  check_pair(a, c, l, "caisa");
  const Eigen::Index n = a.rows();
  const Subspace null_c = kernel(c, tol);

  Subspace w = Subspace::zero(n);
  for (Eigen::Index iter = 0; iter <= n + 1; ++iter) {
    const Subspace next = sum(l, image(a, intersect(w, null_c, tol), tol), tol);
    if (next.dim() < w.dim()) {
      throw NumericalError("caisa: dimension decreased (rank tolerance breakdown)");
    }
    if (next.dim() == w.dim() && equal(next, w, tol)) {
      // Fixed-point certificate: w = l + A(w ∩ ker c) just re-verified.
      if (!contains(w, l, tol)) {
        throw NumericalError("caisa: fixed point does not contain the seed");
      }
      return w;
    }
    w = next;
  }
  throw NumericalError("caisa: no fixed point within n+1 iterations");
}

Subspace uosa(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
              const Subspace& l, const ToleranceConfig& tol) {
  check_pair(a, c, l, "uosa");
  const Eigen::Index n = a.rows();
  const Subspace null_c = kernel(c, tol);
  const Subspace w_star = caisa(a, c, l, tol);

  Subspace s = Subspace::full(n);
  for (Eigen::Index iter = 0; iter <= n + 1; ++iter) {
    const Subspace next =
        sum(w_star, intersect(preimage(a, s, tol), null_c, tol), tol);
    if (next.dim() > s.dim()) {
      throw NumericalError("uosa: dimension increased (rank tolerance breakdown)");
    }
    if (next.dim() == s.dim() && equal(next, s, tol)) {
      if (!contains(s, w_star, tol)) {
        throw NumericalError("uosa: fixed point does not contain W*(l)");
      }
      return s;
    }
    s = next;
  }
  throw NumericalError("uosa: no fixed point within n+1 iterations");
}

std::vector<bool> efprg_check(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& c,
                              const std::vector<Subspace>& signatures,
                              const ToleranceConfig& tol) {
  const Eigen::Index n = a.rows();
  for (const Subspace& l : signatures) {
    check_pair(a, c, l, "efprg_check");
    if (l.is_zero()) {
      throw ValidationError(
          "efprg_check: signatures must be the nonzero classes");
    }
  }
  std::vector<bool> verdicts;
  verdicts.reserve(signatures.size());
  for (std::size_t i = 0; i < signatures.size(); ++i) {
    Subspace l_bar = Subspace::zero(n);
    for (std::size_t j = 0; j < signatures.size(); ++j) {
      if (j != i) {
        l_bar = sum(l_bar, signatures[j], tol);
      }
    }
    const Subspace s_star = uosa(a, c, l_bar, tol);
    verdicts.push_back(intersect(s_star, signatures[i], tol).is_zero());
  }
  return verdicts;
}

}  // namespace mcn
