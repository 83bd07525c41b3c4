#pragma once

#include <random>
#include <vector>

#include "ftoda/poly.hpp"

namespace testing_support {

using ftoda::Complex;
using ftoda::GaussianRational;
using ftoda::Poly;
using ftoda::PolyMatrix;

inline Poly random_poly(std::mt19937_64& rng, int max_degree, int range = 3) {
  std::uniform_int_distribution<int> c(-range, range);
  std::vector<GaussianRational> coeffs;
  for (int k = 0; k <= max_degree; ++k) coeffs.emplace_back(mpq_class(c(rng)), mpq_class(c(rng)));
  return Poly(coeffs);
}

inline PolyMatrix random_matrix(std::mt19937_64& rng, int rows, int cols, int max_degree,
                                int range = 3) {
  PolyMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = random_poly(rng, max_degree, range);
  return m;
}

inline PolyMatrix column(std::vector<Poly> entries) {
  PolyMatrix m(static_cast<int>(entries.size()), 1);
  for (int i = 0; i < m.rows(); ++i) m(i, 0) = entries[i];
  return m;
}

inline Poly zpow(int k) { return Poly::monomial(1, k); }

// Identity plus small block-diagonal polynomial perturbations.
inline PolyMatrix random_gamma_minus(std::mt19937_64& rng, const ftoda::BlockStructure& p, int degree) {
  PolyMatrix g = PolyMatrix::identity(p.dim());
  std::uniform_int_distribution<int> c(-2, 2);
  for (int a = 0; a < p.count(); ++a)
    for (int i = 0; i < p.size(a); ++i)
      for (int j = 0; j < p.size(a); ++j) {
        std::vector<GaussianRational> coeffs;
        for (int k = 0; k <= degree; ++k)
          coeffs.push_back(GaussianRational(mpq_class(c(rng), 10), mpq_class(c(rng), 10)));
        g(p.offset(a) + i, p.offset(a) + j) += Poly(coeffs);
      }
  return g;
}

// Degree -2 element of the canonical gradation, linear in z.
inline PolyMatrix random_c_minus(std::mt19937_64& rng, const ftoda::BlockStructure& p) {
  PolyMatrix c(p.dim(), p.dim());
  std::uniform_int_distribution<int> d(-2, 2);
  for (int a = 0; a + 1 < p.count(); ++a)
    for (int i = 0; i < p.size(a + 1); ++i)
      for (int j = 0; j < p.size(a); ++j)
        c(p.offset(a + 1) + i, p.offset(a) + j) =
            Poly(std::vector<GaussianRational>{GaussianRational(d(rng), d(rng)), GaussianRational(d(rng))});
  return c;
}

inline ftoda::CMatrix random_cmatrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> d;
  ftoda::CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(d(rng), d(rng));
  return m;
}

}  // namespace testing_support
