#pragma once

// Exact rational-arithmetic shadow of the subspace algebra, used only by the
// tests to cross-check the floating-point implementation on small integer
// instances. Not part of the public API.

#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

namespace ratlin {

using Rat = boost::multiprecision::cpp_rational;

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Rat(0)) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rat& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rat& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rat> data_;
};

inline Mat transpose(const Mat& m) {
  Mat t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

inline Mat mul(const Mat& a, const Mat& b) {
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
    }
  return c;
}

inline Mat hcat(const Mat& a, const Mat& b) {
  Mat c(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) c(i, a.cols() + j) = b(i, j);
  }
  return c;
}

inline Mat vcat(const Mat& a, const Mat& b) {
  Mat c(a.rows() + b.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(a.rows() + i, j) = b(i, j);
  return c;
}

// Reduced row echelon form in place; returns the pivot column indices.
inline std::vector<std::size_t> rref(Mat& m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t sel = row;
    while (sel < m.rows() && m(sel, col) == 0) ++sel;
    if (sel == m.rows()) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(row, j), m(sel, j));
    const Rat inv = m(row, col);
    for (std::size_t j = 0; j < m.cols(); ++j) m(row, j) /= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == row || m(i, col) == 0) continue;
      const Rat factor = m(i, col);
      for (std::size_t j = 0; j < m.cols(); ++j)
        m(i, j) -= factor * m(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline std::size_t rank(Mat m) { return rref(m).size(); }

// Basis of the column space: the original columns at the pivot indices.
inline Mat colspace(const Mat& m) {
  Mat r = m;
  const std::vector<std::size_t> pivots = rref(r);
  Mat basis(m.rows(), pivots.size());
  for (std::size_t k = 0; k < pivots.size(); ++k)
    for (std::size_t i = 0; i < m.rows(); ++i) basis(i, k) = m(i, pivots[k]);
  return basis;
}

// Basis of {x : m x = 0} as columns. A 0-row matrix has full kernel.
inline Mat kernel(const Mat& m) {
  const std::size_t n = m.cols();
  if (m.rows() == 0) return Mat::identity(n);
  Mat r = m;
  const std::vector<std::size_t> pivots = rref(r);
  std::vector<bool> is_pivot(n, false);
  for (std::size_t p : pivots) is_pivot[p] = true;
  std::vector<std::size_t> free_cols;
  for (std::size_t j = 0; j < n; ++j)
    if (!is_pivot[j]) free_cols.push_back(j);
  Mat basis(n, free_cols.size());
  for (std::size_t k = 0; k < free_cols.size(); ++k) {
    const std::size_t f = free_cols[k];
    basis(f, k) = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i)
      basis(pivots[i], k) = -r(i, f);
  }
  return basis;
}

inline Mat sum_basis(const Mat& u, const Mat& v) {
  return colspace(hcat(u, v));
}

// Basis of span(u) ∩ span(v); u and v must have independent columns.
inline Mat intersect_basis(const Mat& u, const Mat& v) {
  Mat neg_v = v;
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) neg_v(i, j) = -v(i, j);
  const Mat k = kernel(hcat(u, neg_v));
  Mat coeffs(u.cols(), k.cols());
  for (std::size_t i = 0; i < u.cols(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) coeffs(i, j) = k(i, j);
  return colspace(mul(u, coeffs));
}

// Basis of {x : a x ∈ span(s)}.
inline Mat preimage_basis(const Mat& a, const Mat& s) {
  const Mat normals = kernel(transpose(s));  // columns orthogonal to span(s)
  return kernel(mul(transpose(normals), a));
}

inline bool same_span(const Mat& u, const Mat& v) {
  const std::size_t ru = rank(u);
  const std::size_t rv = rank(v);
  return ru == rv && rank(hcat(u, v)) == ru;
}

inline Mat caisa(const Mat& a, const Mat& c, const Mat& l) {
  const std::size_t n = a.rows();
  const Mat null_c = kernel(c);
  Mat w(n, 0);
  while (true) {
    const Mat next =
        sum_basis(colspace(l), colspace(mul(a, intersect_basis(w, null_c))));
    if (next.cols() == w.cols()) return w;  // monotone chain: equal dims = fixed
    w = next;
  }
}

inline Mat uosa(const Mat& a, const Mat& c, const Mat& l) {
  const std::size_t n = a.rows();
  const Mat null_c = kernel(c);
  const Mat w_star = caisa(a, c, l);
  Mat s = Mat::identity(n);
  while (true) {
    const Mat next =
        sum_basis(w_star, intersect_basis(preimage_basis(a, s), null_c));
    if (next.cols() == s.cols()) return s;
    s = next;
  }
}

inline Eigen::MatrixXd to_double(const Mat& m) {
  Eigen::MatrixXd d(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(i, j).convert_to<double>();
  return d;
}

}  // namespace ratlin
