#include <cmath>
#include <random>

#include "doctest.h"
#include "ftoda/errors.hpp"
#include "ftoda/linalg.hpp"
#include "ftoda/wirtinger.hpp"
#include "support.hpp"

using namespace ftoda;

namespace {

// Random matrix with well-conditioned leading block minors.
CMatrix diagonally_dominant(std::mt19937_64& rng, int n) {
  CMatrix m = testing_support::random_cmatrix(rng, n, n);
  m += CMatrix::Identity(n, n) * (2.0 * n);
  return m;
}

bool block_unitriangular(const CMatrix& m, const BlockStructure& p, bool lower) {
  for (int a = 0; a < p.count(); ++a)
    for (int b = 0; b < p.count(); ++b) {
      const CMatrix x = block(m, p, a, b);
      if (a == b && !x.isIdentity(1e-13)) return false;
      if ((lower ? b > a : b < a) && x.norm() != 0.0) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("metric validation") {
  CMatrix bad(2, 2);
  bad << 1, 2, 0, 1;
  CHECK_THROWS_AS(HermitianMetric{bad}, InvalidArgument);
  CMatrix indefinite(2, 2);
  indefinite << 1, 0, 0, -1;
  CHECK_THROWS_AS(HermitianMetric{indefinite}, InvalidArgument);
  CMatrix nan = CMatrix::Identity(2, 2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(HermitianMetric{nan}, NonFiniteValue);

  CMatrix h(2, 2);
  h << 2, Complex(0, 1), Complex(0, -1), 3;
  const HermitianMetric m(h);
  const CMatrix g = m.factor();
  CHECK((g.adjoint() * g - h).norm() < 1e-14);
  CHECK(g(1, 0) == Complex(0.0));
}

TEST_CASE("block structure bookkeeping") {
  const BlockStructure p({2, 1, 3});
  CHECK(p.dim() == 6);
  CHECK(p.count() == 3);
  CHECK(p.offset(2) == 3);
  CHECK(p.block_of(0) == 0);
  CHECK(p.block_of(2) == 1);
  CHECK(p.block_of(5) == 2);
  CHECK_THROWS_AS(BlockStructure({2, 0}), InvalidArgument);
}

TEST_CASE("hermitian form and numerical rank") {
  const CMatrix a = CMatrix::Identity(3, 2);
  CHECK(hermitian_form(a, HermitianMetric::identity(3), a).isIdentity());
  CMatrix r(3, 3);
  r << 1, 2, 3, 2, 4, 6, 0, 1, 1;
  CHECK(numerical_rank(r) == 2);
  CHECK(numerical_rank(CMatrix::Zero(2, 2)) == 0);
  CHECK(std::isinf(condition_number(CMatrix::Zero(2, 2))));
}

TEST_CASE("rank is invariant under unitary transformations") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix low = testing_support::random_cmatrix(rng, 5, 2) * testing_support::random_cmatrix(rng, 2, 4);
    const CMatrix u = testing_support::random_cmatrix(rng, 5, 5).householderQr().householderQ();
    CHECK(numerical_rank(low) == 2);
    CHECK(numerical_rank(u * low) == 2);
  }
}

TEST_CASE("Gauss decomposition of [[2,1],[1,1]]") {
  CMatrix g(2, 2);
  g << 2, 1, 1, 1;
  const auto f = gauss_decompose(g, BlockStructure({1, 1}));
  CMatrix nm(2, 2), eta(2, 2), np(2, 2);
  nm << 1, 0, 0.5, 1;
  eta << 2, 0, 0, 0.5;
  np << 1, -0.5, 0, 1;
  CHECK((f.n_minus - nm).norm() < 1e-15);
  CHECK((f.eta - eta).norm() < 1e-15);
  CHECK((f.n_plus - np).norm() < 1e-15);
}

TEST_CASE("Gauss decomposition failures") {
  CMatrix g(2, 2);
  g << 0, 1, 1, 0;
  try {
    gauss_decompose(g, BlockStructure({1, 1}));
    FAIL("expected failure");
  } catch (const GaussDecompositionFailed& e) {
    CHECK(e.block() == 0);
  }
  CHECK_NOTHROW(gauss_decompose(g, BlockStructure({2})));
  CHECK_THROWS_AS(gauss_decompose(g, BlockStructure({1, 2})), DimensionMismatch);

  CMatrix near(2, 2);
  near << 1e-14, 1, 1, 1;
  CHECK_THROWS_AS(gauss_decompose(near, BlockStructure({1, 1})), GaussDecompositionFailed);
}

TEST_CASE("Gauss round trip, shape and uniqueness") {
  std::mt19937_64 rng(7);
  for (const auto& sizes : {std::vector<int>{1, 1}, {2, 2}, {1, 2, 1}, {3, 1, 2}}) {
    const BlockStructure p(sizes);
    for (int trial = 0; trial < 20; ++trial) {
      const CMatrix g = diagonally_dominant(rng, p.dim());
      const auto f = gauss_decompose(g, p);
      CHECK((f.n_minus * f.eta * f.n_plus.inverse() - g).norm() < 1e-10 * g.norm());
      CHECK(block_unitriangular(f.n_minus, p, true));
      CHECK(block_unitriangular(f.n_plus, p, false));
      for (int a = 0; a < p.count(); ++a)
        for (int b = 0; b < p.count(); ++b)
          if (a != b) CHECK(block(f.eta, p, a, b).norm() == 0.0);

      // Any other factorisation of the same shape coincides: rebuilding from
      // the factors and decomposing again reproduces them.
      const auto f2 = gauss_decompose(f.n_minus * f.eta * f.n_plus.inverse(), p);
      CHECK((f2.eta - f.eta).norm() < 1e-10 * f.eta.norm());
      CHECK((f2.n_minus - f.n_minus).norm() < 1e-10 * f.n_minus.norm());
    }
  }
}

TEST_CASE("block projection is a partition of unity") {
  std::mt19937_64 rng(9);
  const BlockStructure p({1, 2, 1});
  const std::vector<int> labels{2, 1};
  const CMatrix x = testing_support::random_cmatrix(rng, 4, 4);
  CMatrix sum = CMatrix::Zero(4, 4);
  for (int m = -3; m <= 3; ++m) sum += block_project(x, p, m, labels);
  CHECK((sum - x).norm() < 1e-14);
  CHECK(block_project(x, p, 4, labels).norm() == 0.0);
  CHECK(block_degree(labels, 0, 2) == 3);
  CHECK(block_degree(labels, 2, 1) == -1);
  CHECK(block_degree(labels, 1, 1) == 0);
}

TEST_CASE("block diagonal assembly") {
  const std::vector<CMatrix> blocks{CMatrix::Constant(1, 1, 2.0), CMatrix::Identity(2, 2)};
  const CMatrix d = block_diagonal(blocks);
  CHECK(d.rows() == 3);
  CHECK(d(0, 0) == Complex(2.0));
  CHECK(d(0, 1) == Complex(0.0));
  CHECK(d(2, 2) == Complex(1.0));
}

TEST_CASE("Wirtinger derivatives") {
  auto f = [](Complex z) {
    CMatrix m(1, 1);
    m(0, 0) = z * z * std::conj(z);
    return m;
  };
  const Complex z(0.3, -0.2);
  CHECK(std::abs(wirtinger::d_minus(f, z, 1e-4)(0, 0) - 2.0 * z * std::conj(z)) < 1e-8);
  CHECK(std::abs(wirtinger::d_plus(f, z, 1e-4)(0, 0) - z * z) < 1e-8);
  auto k = [](Complex w) { return std::log(1.0 + std::norm(w)); };
  CHECK(std::abs(wirtinger::d_plus_d_minus(k, z, 1e-4) - 1.0 / std::pow(1.0 + std::norm(z), 2)) < 1e-7);
}
