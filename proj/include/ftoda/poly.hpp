#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "ftoda/linalg.hpp"

namespace ftoda {

/// Exact element re + i*im of Q(i). mpq_class keeps both parts canonical
/// (lowest terms, positive denominator).
class GaussianRational {
 public:
  GaussianRational() = default;
  GaussianRational(mpq_class re, mpq_class im = 0);  // NOLINT(google-explicit-constructor)
  GaussianRational(long n) : re_(n), im_(0) {}       // NOLINT(google-explicit-constructor)
  GaussianRational(int n) : re_(n), im_(0) {}        // NOLINT(google-explicit-constructor)

  static GaussianRational from_parts(long re_num, long re_den, long im_num, long im_den);

  const mpq_class& re() const noexcept { return re_; }
  const mpq_class& im() const noexcept { return im_; }
  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }

  GaussianRational conj() const { return {re_, -im_}; }
  mpq_class norm() const { return re_ * re_ + im_ * im_; }
  Complex to_complex() const { return {re_.get_d(), im_.get_d()}; }
  std::string str() const;

  GaussianRational& operator+=(const GaussianRational& o);
  GaussianRational& operator-=(const GaussianRational& o);
  GaussianRational& operator*=(const GaussianRational& o);
  GaussianRational& operator/=(const GaussianRational& o);

  friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
  friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
  friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
  friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }
  GaussianRational operator-() const { return {-re_, -im_}; }

  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

 private:
  mpq_class re_{0};
  mpq_class im_{0};
};

/// Best rational approximation with denominator at most max_den.
mpq_class rationalize(double x, long max_den);

/// Univariate polynomial in z over Q(i); ascending coefficients, no trailing
/// zeros, the zero polynomial has no coefficients.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<GaussianRational> coeffs);
  Poly(GaussianRational constant);  // NOLINT(google-explicit-constructor)
  Poly(int constant) : Poly(GaussianRational(constant)) {}  // NOLINT(google-explicit-constructor)

  static Poly monomial(GaussianRational c, int degree);
  static Poly z() { return monomial(1, 1); }

  const std::vector<GaussianRational>& coeffs() const noexcept { return c_; }
  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const noexcept { return c_.empty(); }
  bool is_constant() const noexcept { return c_.size() <= 1; }
  GaussianRational coeff(int k) const;
  GaussianRational lead() const;

  Poly derivative() const;
  /// Conjugates the coefficients (not the variable).
  Poly conj_coeffs() const;
  Poly monic() const;

  GaussianRational eval(const GaussianRational& x) const;
  Complex eval(Complex x) const;
  std::vector<Complex> numeric_coeffs() const;

  std::string str() const;

  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(const Poly& o);

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, const Poly& b) { return a *= b; }
  Poly operator-() const;
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

 private:
  void trim();
  std::vector<GaussianRational> c_;
};

/// Euclidean division a = q*b + r with deg r < deg b.
std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b);
/// Exact quotient; throws InvalidArgument if b does not divide a.
Poly exact_div(const Poly& a, const Poly& b);
/// Monic gcd; gcd(0, 0) = 0.
Poly gcd(const Poly& a, const Poly& b);

/// Numerical roots of a nonzero polynomial (companion-matrix eigenvalues).
std::vector<Complex> roots(const Poly& p);

/// num/den with den monic and gcd(num, den) = 1.
class RationalFunction {
 public:
  RationalFunction() : den_(1) {}
  RationalFunction(Poly num);  // NOLINT(google-explicit-constructor)
  RationalFunction(Poly num, Poly den);

  const Poly& num() const noexcept { return num_; }
  const Poly& den() const noexcept { return den_; }
  bool is_zero() const noexcept { return num_.is_zero(); }
  bool is_polynomial() const noexcept { return den_.degree() == 0; }
  Complex eval(Complex z) const { return num_.eval(z) / den_.eval(z); }
  std::string str() const;

  friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b);
  friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b);
  friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b);
  friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b);
  friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

 private:
  Poly num_;
  Poly den_;
};

/// Polynomial matrix evaluated in floating point; built once from an exact
/// PolyMatrix for fast pointwise work.
class NumericPolyMatrix {
 public:
  NumericPolyMatrix() = default;
  NumericPolyMatrix(int rows, int cols, std::vector<std::vector<Complex>> entries)
      : rows_(rows), cols_(cols), e_(std::move(entries)) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  CMatrix eval(Complex z) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::vector<Complex>> e_;  // row-major, ascending coefficients
};

/// Matrix of polynomials; holomorphic lifts and osculating blocks.
class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(int rows, int cols);

  static PolyMatrix identity(int n);
  static PolyMatrix constant(const std::vector<std::vector<GaussianRational>>& rows);
  static PolyMatrix hcat(const PolyMatrix& a, const PolyMatrix& b);
  static PolyMatrix vcat(const PolyMatrix& a, const PolyMatrix& b);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  Poly& operator()(int i, int j) { return e_[static_cast<size_t>(i) * cols_ + j]; }
  const Poly& operator()(int i, int j) const { return e_[static_cast<size_t>(i) * cols_ + j]; }

  PolyMatrix column(int j) const;
  PolyMatrix columns(int first, int count) const;
  PolyMatrix block(int r0, int c0, int nr, int nc) const;
  void set_block(int r0, int c0, const PolyMatrix& m);
  bool is_zero() const;
  int max_degree() const;

  PolyMatrix derivative() const;
  /// Transpose with conjugated coefficients; for P(z) this gives the
  /// polynomial Q with Q(zbar) = P(z)^dagger.
  PolyMatrix conj_transpose() const;
  PolyMatrix operator*(const PolyMatrix& o) const;
  PolyMatrix operator*(const Poly& s) const;
  PolyMatrix operator+(const PolyMatrix& o) const;
  PolyMatrix operator-(const PolyMatrix& o) const;
  PolyMatrix operator-() const;
  friend bool operator==(const PolyMatrix& a, const PolyMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.e_ == b.e_;
  }

  CMatrix eval(Complex z) const;
  NumericPolyMatrix numeric() const;
  std::string str() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Poly> e_;
};

/// Matrix of rational functions (dual frames).
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols) {}
  explicit RationalMatrix(const PolyMatrix& m);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  RationalFunction& operator()(int i, int j) { return e_[static_cast<size_t>(i) * cols_ + j]; }
  const RationalFunction& operator()(int i, int j) const {
    return e_[static_cast<size_t>(i) * cols_ + j];
  }
  RationalMatrix operator*(const RationalMatrix& o) const;
  bool is_identity() const;
  CMatrix eval(Complex z) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<RationalFunction> e_;
};

// ---------------------------------------------------------------------------
// Exact algebra over Q(i)[z]

/// Determinant by fraction-free (Bareiss) elimination.
Poly determinant(const PolyMatrix& m);

/// Rank over the field of rational functions.
int generic_rank(const PolyMatrix& m);

/// Monic gcd of all order x order minors; zero if every such minor vanishes.
Poly minors_gcd(const PolyMatrix& m, int order);

/// True iff the columns have rank generic_rank(m) at every point of C,
/// certified by the gcd of the maximal nonvanishing minors being 1.
bool is_constant_rank(const PolyMatrix& m);

/// Row echelon form under unimodular row operations: transform * m = echelon.
/// For full column rank input the top cols() rows of echelon are upper
/// triangular and the remaining rows vanish.
struct RowEchelon {
  PolyMatrix transform;
  PolyMatrix echelon;
  std::vector<int> pivot_cols;
};
RowEchelon row_echelon(const PolyMatrix& m);

/// Polynomial left inverse L (L * g = I) of a constant full-column-rank g.
PolyMatrix left_inverse(const PolyMatrix& g);

// ---------------------------------------------------------------------------
// Vector-valued polynomial functions

PolyMatrix differentiate(const PolyMatrix& m);

struct ZeroFactoring {
  PolyMatrix g;  // n x 1, entries coprime
  Poly d;        // monic gcd of the entries of f
};
/// f = g * d with g free of zeros. Throws ZeroFunction for f == 0.
ZeroFactoring factor_zeros(const PolyMatrix& f);

/// Incrementally grown set of columns of constant full rank on C.
class ConstantRankBasis {
 public:
  explicit ConstantRankBasis(int n);
  ConstantRankBasis(int n, const PolyMatrix& constant_rank_columns);

  int ambient_dim() const noexcept { return n_; }
  int rank() const noexcept { return g_.cols(); }
  const PolyMatrix& columns() const noexcept { return g_; }

  struct Expansion {
    std::vector<Poly> coeffs;  // f = sum_b columns()[:, b] * coeffs[b]
    bool added = false;        // a new column was appended for f
    int correction_steps = 0;  // zero-removal iterations spent
  };
  /// Expresses f (n x 1) in the basis, appending a zero-free column first
  /// when f lies outside the current span.
  Expansion absorb(const PolyMatrix& f);

 private:
  struct RowSubset {
    std::vector<int> rows;
    Poly det;  // determinant of the selected rows of g_, nonzero
  };
  // Nonsingular row subsets in lexicographic order, enumerated lazily.
  const RowSubset* subset(size_t k);
  std::vector<Poly> cramer(const RowSubset& s, const PolyMatrix& f) const;
  std::vector<Poly> solve_modulo(const PolyMatrix& g, const Poly& p);

  int n_;
  PolyMatrix g_;
  std::vector<RowSubset> subsets_;
  std::vector<int> next_rows_;
  bool subsets_done_ = false;
};

struct ConstantRankReduction {
  PolyMatrix gs;  // n x l, constant rank l
  PolyMatrix d;   // l x k, column-echelon upper triangular; f = gs * d
  int rank = 0;
};
/// Replaces the columns of fs by a constant-rank set spanning the same
/// rational-function span. Throws ZeroFunction if fs == 0.
ConstantRankReduction constant_rank_reduce(const PolyMatrix& fs);

/// Columns g_{k+1}..g_n completing a constant-rank-k set to constant rank n
/// (the completed determinant is a nonzero constant). Throws AlreadyFull
/// when k == n and NotConstantRank if gs is not of constant rank.
PolyMatrix rank_complete(const PolyMatrix& gs, int n);

/// Exact inverse of the square matrix whose columns are fs; row i is the
/// covector f^i with f^i(f_j) = delta. Throws SingularFrame if det == 0.
RationalMatrix dual_frame(const PolyMatrix& fs);

}  // namespace ftoda
