#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "mcn/subspace.hpp"
#include "rational_subspace.hpp"

using Eigen::MatrixXd;
using mcn::Subspace;

namespace {

ratlin::Mat random_int_matrix(std::mt19937& rng, std::size_t rows,
                              std::size_t cols, int lo = -3, int hi = 3) {
  std::uniform_int_distribution<int> dist(lo, hi);
  ratlin::Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

// A low-rank-biased integer matrix: product of two thin factors half the time.
ratlin::Mat random_structured(std::mt19937& rng, std::size_t rows,
                              std::size_t cols) {
  std::uniform_int_distribution<int> coin(0, 1);
  if (coin(rng) == 0 && rows > 1 && cols > 1) {
    const std::size_t inner = 1 + rng() % std::min(rows, cols);
    return ratlin::mul(random_int_matrix(rng, rows, inner),
                       random_int_matrix(rng, inner, cols));
  }
  return random_int_matrix(rng, rows, cols);
}

bool float_matches_exact(const Subspace& fp, const ratlin::Mat& exact_basis) {
  const MatrixXd exact_d = ratlin::to_double(exact_basis);
  const Subspace exact_span = Subspace::span(exact_d);
  return mcn::equal(fp, exact_span);
}

}  // namespace

TEST_CASE("floating-point span rank and basis agree with exact arithmetic") {
  std::mt19937 rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + trial % 5;  // 2..6
    const std::size_t k = 1 + trial % n;
    const ratlin::Mat m = random_structured(rng, n, k);
    const ratlin::Mat cs = ratlin::colspace(m);
    const Subspace fp = Subspace::span(ratlin::to_double(m));
    CHECK(fp.dim() == static_cast<Eigen::Index>(cs.cols()));
    CHECK(float_matches_exact(fp, cs));
  }
}

TEST_CASE("floating-point kernel agrees with exact arithmetic") {
  std::mt19937 rng(202);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const std::size_t rows = 1 + trial % n;
    const ratlin::Mat m = random_structured(rng, rows, n);
    const ratlin::Mat ker = ratlin::kernel(m);
    const Subspace fp = mcn::kernel(ratlin::to_double(m));
    CHECK(fp.dim() == static_cast<Eigen::Index>(ker.cols()));
    CHECK(float_matches_exact(fp, ker));
  }
}

TEST_CASE("floating-point sum and intersection agree with exact arithmetic") {
  std::mt19937 rng(303);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + trial % 4;  // 3..6
    const ratlin::Mat u = random_structured(rng, n, 1 + trial % 3);
    const ratlin::Mat v = random_structured(rng, n, 1 + (trial / 2) % 3);

    const Subspace fu = Subspace::span(ratlin::to_double(u));
    const Subspace fv = Subspace::span(ratlin::to_double(v));

    CHECK(float_matches_exact(mcn::sum(fu, fv), ratlin::sum_basis(u, v)));
    CHECK(float_matches_exact(mcn::intersect(fu, fv),
                              ratlin::intersect_basis(u, v)));
  }
}

TEST_CASE("floating-point preimage agrees with exact arithmetic") {
  std::mt19937 rng(404);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const ratlin::Mat a = random_int_matrix(rng, n, n);
    const ratlin::Mat s = random_structured(rng, n, 1 + trial % n);
    const ratlin::Mat pre = ratlin::preimage_basis(a, ratlin::colspace(s));
    const Subspace fp = mcn::preimage(
        ratlin::to_double(a), Subspace::span(ratlin::to_double(s)));
    CHECK(fp.dim() == static_cast<Eigen::Index>(pre.cols()));
    CHECK(float_matches_exact(fp, pre));
  }
}

TEST_CASE("caisa and uosa fixed points agree with exact arithmetic") {
  std::mt19937 rng(505);
  int done = 0;
  int attempt = 0;
  while (done < 60 && attempt < 600) {
    ++attempt;
    const std::size_t n = 2 + attempt % 5;
    const std::size_t p = 1 + attempt % 2;
    const ratlin::Mat a = random_int_matrix(rng, n, n, -2, 2);
    const ratlin::Mat c = random_int_matrix(rng, p, n, -2, 2);
    const ratlin::Mat l = random_structured(rng, n, 1 + attempt % 2);
    if (ratlin::rank(l) == 0) continue;

    const ratlin::Mat w_exact = ratlin::caisa(a, c, ratlin::colspace(l));
    const ratlin::Mat s_exact = ratlin::uosa(a, c, ratlin::colspace(l));

    const MatrixXd ad = ratlin::to_double(a);
    const MatrixXd cd = ratlin::to_double(c);
    const Subspace lf = Subspace::span(ratlin::to_double(l));

    CHECK(float_matches_exact(mcn::caisa(ad, cd, lf), w_exact));
    CHECK(float_matches_exact(mcn::uosa(ad, cd, lf), s_exact));
    ++done;
  }
  CHECK(done == 60);
}
