#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mcn/errors.hpp"

namespace mcn {

/// Tolerances for all rank / equality decisions on subspaces. Defaults are
/// tuned for matrices with entries of order 1 (desk-scale problems).
struct ToleranceConfig {
  double rank_tol = 1e-10;  ///< relative singular-value cutoff
  double eq_tol = 1e-8;     ///< max principal angle (radians) for equality
};

/// A linear subspace of R^n, stored as an n x r matrix with orthonormal
/// columns. Immutable after construction; freely shareable.
class Subspace {
 public:
  Subspace() = default;

  static Subspace zero(Eigen::Index ambient);
  static Subspace full(Eigen::Index ambient);
  /// Column space of an arbitrary matrix, rank-revealed by SVD at rank_tol.
  static Subspace span(const Eigen::MatrixXd& columns,
                       const ToleranceConfig& tol = {});
  /// Wraps a matrix whose columns are already orthonormal (checked).
  static Subspace from_orthonormal(Eigen::MatrixXd basis);

  Eigen::Index ambient() const { return ambient_; }
  Eigen::Index dim() const { return basis_.cols(); }
  bool is_zero() const { return dim() == 0; }
  bool is_full() const { return dim() == ambient_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  /// Orthogonal projector basis * basis^T (ambient x ambient).
  Eigen::MatrixXd projector() const;

 private:
  Subspace(Eigen::Index ambient, Eigen::MatrixXd orthonormal)
      : ambient_(ambient), basis_(std::move(orthonormal)) {}

  Eigen::Index ambient_ = 0;
  Eigen::MatrixXd basis_;  // ambient_ x dim, orthonormal columns
};

/// Numerical rank via SVD with the relative cutoff in tol.rank_tol.
Eigen::Index matrix_rank(const Eigen::MatrixXd& m,
                         const ToleranceConfig& tol = {});

Subspace sum(const Subspace& u, const Subspace& v,
             const ToleranceConfig& tol = {});
Subspace intersect(const Subspace& u, const Subspace& v,
                   const ToleranceConfig& tol = {});
/// {x : c x = 0}. A 0-row matrix has full kernel.
Subspace kernel(const Eigen::MatrixXd& c, const ToleranceConfig& tol = {});
/// {x : a x in s} = kernel((I - P_s) a).
Subspace preimage(const Eigen::MatrixXd& a, const Subspace& s,
                  const ToleranceConfig& tol = {});
Subspace orth_complement(const Subspace& u, const ToleranceConfig& tol = {});
/// span(a * basis(s)); image lives in R^{a.rows()}.
Subspace image(const Eigen::MatrixXd& a, const Subspace& s,
               const ToleranceConfig& tol = {});

/// sin of the largest principal angle between `inner` and its projection onto
/// `outer`; 0 when inner is contained in outer, 1 when some direction of
/// inner is orthogonal to outer.
double sin_max_principal_angle(const Subspace& outer, const Subspace& inner);
bool contains(const Subspace& outer, const Subspace& inner,
              const ToleranceConfig& tol = {});
bool equal(const Subspace& u, const Subspace& v,
           const ToleranceConfig& tol = {});

/// Smallest (C,A)-invariant subspace containing l: fixed point of
///   W_{k+1} = l + A(W_k ∩ ker c),  W_0 = 0.
/// The returned fixed point is re-verified (certificate) before returning.
Subspace caisa(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
               const Subspace& l, const ToleranceConfig& tol = {});

/// Smallest unobservability subspace containing l: fixed point of
///   S_{k+1} = W*(l) + (A^{-1} S_k ∩ ker c),  S_0 = R^n,
/// with the intersection binding before the sum.
Subspace uosa(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
              const Subspace& l, const ToleranceConfig& tol = {});

/// Solvability verdict per signature: true iff S*(sum of the others) meets
/// the signature only in 0. Signatures must be the nonzero classes.
std::vector<bool> efprg_check(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& c,
                              const std::vector<Subspace>& signatures,
                              const ToleranceConfig& tol = {});

}  // namespace mcn
