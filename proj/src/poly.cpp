#include "ftoda/poly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "ftoda/errors.hpp"

namespace ftoda {

// ---------------------------------------------------------------------------
// GaussianRational

GaussianRational::GaussianRational(mpq_class re, mpq_class im)
    : re_(std::move(re)), im_(std::move(im)) {
  re_.canonicalize();
  im_.canonicalize();
}

GaussianRational GaussianRational::from_parts(long re_num, long re_den, long im_num,
                                              long im_den) {
  if (re_den == 0 || im_den == 0) throw InvalidArgument("zero denominator in coefficient");
  return {mpq_class(re_num, re_den), mpq_class(im_num, im_den)};
}

std::string GaussianRational::str() const {
  if (sgn(im_) == 0) return re_.get_str();
  if (sgn(re_) == 0) return im_.get_str() + "i";
  return "(" + re_.get_str() + (sgn(im_) > 0 ? "+" : "") + im_.get_str() + "i)";
}

GaussianRational& GaussianRational::operator+=(const GaussianRational& o) {
  re_ += o.re_;
  im_ += o.im_;
  return *this;
}

GaussianRational& GaussianRational::operator-=(const GaussianRational& o) {
  re_ -= o.re_;
  im_ -= o.im_;
  return *this;
}

GaussianRational& GaussianRational::operator*=(const GaussianRational& o) {
  mpq_class re = re_ * o.re_ - im_ * o.im_;
  mpq_class im = re_ * o.im_ + im_ * o.re_;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

GaussianRational& GaussianRational::operator/=(const GaussianRational& o) {
  const mpq_class den = o.norm();
  if (sgn(den) == 0) throw InvalidArgument("division by zero in Q(i)");
  mpq_class re = (re_ * o.re_ + im_ * o.im_) / den;
  mpq_class im = (im_ * o.re_ - re_ * o.im_) / den;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

mpq_class rationalize(double x, long max_den) {
  if (!std::isfinite(x)) throw InvalidArgument("cannot rationalize a non-finite value");
  if (max_den < 1) throw InvalidArgument("denominator bound must be positive");
  const bool negative = x < 0;
  double y = std::fabs(x);
  // Convergents p/q of the continued fraction, tracked exactly.
  mpz_class p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  mpq_class best;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(y);
    const mpz_class a(a_d);
    const mpz_class p2 = a * p1 + p0;
    const mpz_class q2 = a * q1 + q0;
    if (q2 > max_den) {
      // Best semiconvergent versus last convergent.
      const mpz_class k = (mpz_class(max_den) - q0) / q1;
      const mpq_class semi(p0 + k * p1, q0 + k * q1);
      const mpq_class conv(p1, q1);
      const mpq_class target(std::fabs(x));
      best = abs(semi - target) < abs(conv - target) ? semi : conv;
      break;
    }
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    best = mpq_class(p1, q1);
    const double frac = y - a_d;
    if (frac <= 1e-15 * std::max(1.0, y)) break;
    y = 1.0 / frac;
  }
  best.canonicalize();
  return negative ? mpq_class(-best) : best;
}

// ---------------------------------------------------------------------------
// Poly

Poly::Poly(std::vector<GaussianRational> coeffs) : c_(std::move(coeffs)) { trim(); }

Poly::Poly(GaussianRational constant) {
  if (!constant.is_zero()) c_.push_back(std::move(constant));
}

Poly Poly::monomial(GaussianRational c, int degree) {
  if (c.is_zero()) return {};
  std::vector<GaussianRational> v(static_cast<size_t>(degree) + 1);
  v.back() = std::move(c);
  return Poly(std::move(v));
}

void Poly::trim() {
  while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
}

GaussianRational Poly::coeff(int k) const {
  if (k < 0 || k >= static_cast<int>(c_.size())) return {};
  return c_[k];
}

GaussianRational Poly::lead() const { return c_.empty() ? GaussianRational() : c_.back(); }

Poly Poly::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<GaussianRational> d(c_.size() - 1);
  for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * GaussianRational(static_cast<long>(k));
  return Poly(std::move(d));
}

Poly Poly::conj_coeffs() const {
  std::vector<GaussianRational> d;
  d.reserve(c_.size());
  for (const auto& c : c_) d.push_back(c.conj());
  return Poly(std::move(d));
}

Poly Poly::monic() const {
  if (c_.empty()) return {};
  const GaussianRational l = c_.back();
  std::vector<GaussianRational> d = c_;
  for (auto& c : d) c /= l;
  return Poly(std::move(d));
}

GaussianRational Poly::eval(const GaussianRational& x) const {
  GaussianRational acc;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Complex Poly::eval(Complex x) const {
  Complex acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + it->to_complex();
  return acc;
}

std::vector<Complex> Poly::numeric_coeffs() const {
  std::vector<Complex> out;
  out.reserve(c_.size());
  for (const auto& c : c_) out.push_back(c.to_complex());
  return out;
}

std::string Poly::str() const {
  if (c_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (size_t k = 0; k < c_.size(); ++k) {
    if (c_[k].is_zero()) continue;
    if (!first) os << " + ";
    first = false;
    os << c_[k].str();
    if (k == 1) os << "*z";
    if (k > 1) os << "*z^" << k;
  }
  return os.str();
}

Poly& Poly::operator+=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
  trim();
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
  trim();
  return *this;
}

Poly& Poly::operator*=(const Poly& o) {
  if (c_.empty() || o.c_.empty()) {
    c_.clear();
    return *this;
  }
  std::vector<GaussianRational> r(c_.size() + o.c_.size() - 1);
  for (size_t i = 0; i < c_.size(); ++i) {
    if (c_[i].is_zero()) continue;
    for (size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
  }
  c_ = std::move(r);
  trim();
  return *this;
}

Poly Poly::operator-() const {
  std::vector<GaussianRational> d;
  d.reserve(c_.size());
  for (const auto& c : c_) d.push_back(-c);
  return Poly(std::move(d));
}

std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw InvalidArgument("polynomial division by zero");
  if (a.degree() < b.degree()) return {Poly(), a};
  std::vector<GaussianRational> r = a.coeffs();
  const auto& bc = b.coeffs();
  const int db = b.degree();
  const GaussianRational lb = b.lead();
  std::vector<GaussianRational> q(static_cast<size_t>(a.degree() - db) + 1);
  for (int k = a.degree(); k >= db; --k) {
    if (r[k].is_zero()) continue;
    const GaussianRational f = r[k] / lb;
    q[k - db] = f;
    for (int j = 0; j <= db; ++j) r[k - db + j] -= f * bc[j];
  }
  r.resize(static_cast<size_t>(db));
  return {Poly(std::move(q)), Poly(std::move(r))};
}

Poly exact_div(const Poly& a, const Poly& b) {
  auto [q, r] = divmod(a, b);
  if (!r.is_zero()) throw InvalidArgument("polynomial division is not exact");
  return q;
}

Poly gcd(const Poly& a, const Poly& b) {
  Poly x = a.monic();
  Poly y = b.monic();
  while (!y.is_zero()) {
    Poly r = divmod(x, y).second.monic();
    x = std::move(y);
    y = std::move(r);
  }
  return x.monic();
}

std::vector<Complex> roots(const Poly& p) {
  if (p.is_zero()) throw ZeroFunction("roots of the zero polynomial");
  const int d = p.degree();
  if (d == 0) return {};
  const auto c = p.monic().numeric_coeffs();
  CMatrix companion = CMatrix::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -c[i];
  Eigen::ComplexEigenSolver<CMatrix> es(companion, false);
  std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + d);
  return out;
}

// ---------------------------------------------------------------------------
// RationalFunction

RationalFunction::RationalFunction(Poly num) : num_(std::move(num)), den_(1) {}

RationalFunction::RationalFunction(Poly num, Poly den) {
  if (den.is_zero()) throw InvalidArgument("rational function with zero denominator");
  if (num.is_zero()) {
    den_ = Poly(1);
    return;
  }
  const Poly g = gcd(num, den);
  num = exact_div(num, g);
  den = exact_div(den, g);
  const GaussianRational l = den.lead();
  std::vector<GaussianRational> nc = num.coeffs(), dc = den.coeffs();
  for (auto& c : nc) c /= l;
  for (auto& c : dc) c /= l;
  num_ = Poly(std::move(nc));
  den_ = Poly(std::move(dc));
}

std::string RationalFunction::str() const {
  if (is_polynomial()) return num_.str();
  return "(" + num_.str() + ")/(" + den_.str() + ")";
}

RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
  if (a.den_ == b.den_) return {a.num_ + b.num_, a.den_};
  return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
}

RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) {
  if (a.den_ == b.den_) return {a.num_ - b.num_, a.den_};
  return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
}

RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
  return {a.num_ * b.num_, a.den_ * b.den_};
}

RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
  if (b.is_zero()) throw InvalidArgument("rational function division by zero");
  return {a.num_ * b.den_, a.den_ * b.num_};
}

// ---------------------------------------------------------------------------
// Matrices

CMatrix NumericPolyMatrix::eval(Complex z) const {
  CMatrix out(rows_, cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      const auto& c = e_[static_cast<size_t>(i) * cols_ + j];
      Complex acc = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
      out(i, j) = acc;
    }
  }
  return out;
}

PolyMatrix::PolyMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols) {
  if (rows < 0 || cols < 0) throw InvalidArgument("negative matrix dimension");
}

PolyMatrix PolyMatrix::identity(int n) {
  PolyMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = Poly(1);
  return m;
}

PolyMatrix PolyMatrix::constant(const std::vector<std::vector<GaussianRational>>& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r ? static_cast<int>(rows[0].size()) : 0;
  PolyMatrix m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != c) throw DimensionMismatch("ragged constant matrix");
    for (int j = 0; j < c; ++j) m(i, j) = Poly(rows[i][j]);
  }
  return m;
}

PolyMatrix PolyMatrix::hcat(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.cols_ == 0) return b;
  if (b.cols_ == 0) return a;
  if (a.rows_ != b.rows_) throw DimensionMismatch("hcat: row counts differ");
  PolyMatrix m(a.rows_, a.cols_ + b.cols_);
  m.set_block(0, 0, a);
  m.set_block(0, a.cols_, b);
  return m;
}

PolyMatrix PolyMatrix::vcat(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.rows_ == 0) return b;
  if (b.rows_ == 0) return a;
  if (a.cols_ != b.cols_) throw DimensionMismatch("vcat: column counts differ");
  PolyMatrix m(a.rows_ + b.rows_, a.cols_);
  m.set_block(0, 0, a);
  m.set_block(a.rows_, 0, b);
  return m;
}

PolyMatrix PolyMatrix::column(int j) const { return block(0, j, rows_, 1); }

PolyMatrix PolyMatrix::columns(int first, int count) const { return block(0, first, rows_, count); }

PolyMatrix PolyMatrix::block(int r0, int c0, int nr, int nc) const {
  if (r0 < 0 || c0 < 0 || r0 + nr > rows_ || c0 + nc > cols_) {
    throw IndexOutOfRange("PolyMatrix::block out of range");
  }
  PolyMatrix m(nr, nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) m(i, j) = (*this)(r0 + i, c0 + j);
  return m;
}

void PolyMatrix::set_block(int r0, int c0, const PolyMatrix& m) {
  if (r0 < 0 || c0 < 0 || r0 + m.rows_ > rows_ || c0 + m.cols_ > cols_) {
    throw IndexOutOfRange("PolyMatrix::set_block out of range");
  }
  for (int i = 0; i < m.rows_; ++i)
    for (int j = 0; j < m.cols_; ++j) (*this)(r0 + i, c0 + j) = m(i, j);
}

bool PolyMatrix::is_zero() const {
  return std::all_of(e_.begin(), e_.end(), [](const Poly& p) { return p.is_zero(); });
}

int PolyMatrix::max_degree() const {
  int d = -1;
  for (const auto& p : e_) d = std::max(d, p.degree());
  return d;
}

PolyMatrix PolyMatrix::derivative() const {
  PolyMatrix m(rows_, cols_);
  for (size_t k = 0; k < e_.size(); ++k) m.e_[k] = e_[k].derivative();
  return m;
}

PolyMatrix PolyMatrix::conj_transpose() const {
  PolyMatrix m(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j).conj_coeffs();
  return m;
}

PolyMatrix PolyMatrix::operator*(const PolyMatrix& o) const {
  if (cols_ != o.rows_) throw DimensionMismatch("PolyMatrix product: inner dimensions differ");
  PolyMatrix m(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < o.cols_; ++j) {
      Poly acc;
      for (int k = 0; k < cols_; ++k) {
        if ((*this)(i, k).is_zero() || o(k, j).is_zero()) continue;
        acc += (*this)(i, k) * o(k, j);
      }
      m(i, j) = std::move(acc);
    }
  }
  return m;
}

PolyMatrix PolyMatrix::operator*(const Poly& s) const {
  PolyMatrix m(rows_, cols_);
  for (size_t k = 0; k < e_.size(); ++k) m.e_[k] = e_[k] * s;
  return m;
}

PolyMatrix PolyMatrix::operator+(const PolyMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("PolyMatrix sum");
  PolyMatrix m(rows_, cols_);
  for (size_t k = 0; k < e_.size(); ++k) m.e_[k] = e_[k] + o.e_[k];
  return m;
}

PolyMatrix PolyMatrix::operator-(const PolyMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("PolyMatrix difference");
  PolyMatrix m(rows_, cols_);
  for (size_t k = 0; k < e_.size(); ++k) m.e_[k] = e_[k] - o.e_[k];
  return m;
}

PolyMatrix PolyMatrix::operator-() const {
  PolyMatrix m(rows_, cols_);
  for (size_t k = 0; k < e_.size(); ++k) m.e_[k] = -e_[k];
  return m;
}

CMatrix PolyMatrix::eval(Complex z) const {
  CMatrix out(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j).eval(z);
  return out;
}

NumericPolyMatrix PolyMatrix::numeric() const {
  std::vector<std::vector<Complex>> e;
  e.reserve(e_.size());
  for (const auto& p : e_) e.push_back(p.numeric_coeffs());
  return {rows_, cols_, std::move(e)};
}

std::string PolyMatrix::str() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < rows_; ++i) {
    os << (i ? "; " : "");
    for (int j = 0; j < cols_; ++j) os << (j ? ", " : "") << (*this)(i, j).str();
  }
  os << "]";
  return os.str();
}

RationalMatrix::RationalMatrix(const PolyMatrix& m) : RationalMatrix(m.rows(), m.cols()) {
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) (*this)(i, j) = RationalFunction(m(i, j));
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& o) const {
  if (cols_ != o.rows_) throw DimensionMismatch("RationalMatrix product");
  RationalMatrix m(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < o.cols_; ++j) {
      RationalFunction acc;
      for (int k = 0; k < cols_; ++k) {
        if ((*this)(i, k).is_zero() || o(k, j).is_zero()) continue;
        acc = acc + (*this)(i, k) * o(k, j);
      }
      m(i, j) = std::move(acc);
    }
  return m;
}

bool RationalMatrix::is_identity() const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) {
      const RationalFunction expected = RationalFunction(Poly(i == j ? 1 : 0));
      if (!((*this)(i, j) == expected)) return false;
    }
  return true;
}

CMatrix RationalMatrix::eval(Complex z) const {
  CMatrix out(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j).eval(z);
  return out;
}

// ---------------------------------------------------------------------------
// Exact algebra

Poly determinant(const PolyMatrix& m) {
  const int n = m.rows();
  if (m.cols() != n) throw DimensionMismatch("determinant of a non-square matrix");
  if (n == 0) return Poly(1);
  PolyMatrix a = m;
  Poly prev(1);
  bool negate = false;
  for (int k = 0; k < n - 1; ++k) {
    if (a(k, k).is_zero()) {
      int swap = -1;
      for (int i = k + 1; i < n; ++i)
        if (!a(i, k).is_zero()) {
          swap = i;
          break;
        }
      if (swap < 0) return {};
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(swap, j));
      negate = !negate;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        a(i, j) = exact_div(a(k, k) * a(i, j) - a(i, k) * a(k, j), prev);
      }
      a(i, k) = Poly();
    }
    prev = a(k, k);
  }
  return negate ? -a(n - 1, n - 1) : a(n - 1, n - 1);
}

RowEchelon row_echelon(const PolyMatrix& m) {
  const int rows = m.rows();
  const int cols = m.cols();
  PolyMatrix a = m;
  PolyMatrix v = PolyMatrix::identity(rows);
  std::vector<int> pivots;
  auto swap_rows = [&](int r1, int r2) {
    if (r1 == r2) return;
    for (int j = 0; j < cols; ++j) std::swap(a(r1, j), a(r2, j));
    for (int j = 0; j < rows; ++j) std::swap(v(r1, j), v(r2, j));
  };
  int row = 0;
  for (int col = 0; col < cols && row < rows; ++col) {
    while (true) {
      int best = -1;
      for (int i = row; i < rows; ++i) {
        if (a(i, col).is_zero()) continue;
        if (best < 0 || a(i, col).degree() < a(best, col).degree()) best = i;
      }
      if (best < 0) break;
      swap_rows(best, row);
      bool cleared = true;
      for (int i = row + 1; i < rows; ++i) {
        if (a(i, col).is_zero()) continue;
        const Poly q = divmod(a(i, col), a(row, col)).first;
        for (int j = col; j < cols; ++j) a(i, j) -= q * a(row, j);
        for (int j = 0; j < rows; ++j) v(i, j) -= q * v(row, j);
        if (!a(i, col).is_zero()) cleared = false;
      }
      if (cleared) {
        pivots.push_back(col);
        ++row;
        break;
      }
    }
  }
  return {std::move(v), std::move(a), std::move(pivots)};
}

int generic_rank(const PolyMatrix& m) {
  // Fraction-free elimination; every entry stays a minor of m.
  PolyMatrix a = m;
  const int rows = m.rows();
  const int cols = m.cols();
  Poly prev(1);
  int rank = 0;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int piv = -1;
    for (int i = rank; i < rows; ++i) {
      if (a(i, col).is_zero()) continue;
      if (piv < 0 || a(i, col).degree() < a(piv, col).degree()) piv = i;
    }
    if (piv < 0) continue;
    if (piv != rank)
      for (int j = 0; j < cols; ++j) std::swap(a(piv, j), a(rank, j));
    for (int i = rank + 1; i < rows; ++i) {
      for (int j = col + 1; j < cols; ++j)
        a(i, j) = exact_div(a(rank, col) * a(i, j) - a(i, col) * a(rank, j), prev);
      a(i, col) = Poly();
    }
    prev = a(rank, col);
    ++rank;
  }
  return rank;
}

namespace {

void combinations(int n, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

Poly minors_gcd(const PolyMatrix& m, int order) {
  if (order <= 0) return Poly(1);
  std::vector<std::vector<int>> rsets, csets;
  combinations(m.rows(), order, rsets);
  combinations(m.cols(), order, csets);
  Poly acc;
  for (const auto& rs : rsets) {
    for (const auto& cs : csets) {
      PolyMatrix sub(order, order);
      for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j) sub(i, j) = m(rs[i], cs[j]);
      acc = gcd(acc, determinant(sub));
      if (acc.degree() == 0) return acc;
    }
  }
  return acc;
}

bool is_constant_rank(const PolyMatrix& m) {
  const int r = generic_rank(m);
  if (r == 0) return true;
  return minors_gcd(m, r).degree() == 0;
}

PolyMatrix left_inverse(const PolyMatrix& g) {
  const int r = g.cols();
  const RowEchelon e = row_echelon(g);
  if (static_cast<int>(e.pivot_cols.size()) != r) {
    throw NotConstantRank("left_inverse: columns are not of full rank");
  }
  for (int i = 0; i < r; ++i) {
    if (e.echelon(i, i).degree() != 0) {
      throw NotConstantRank("left_inverse: columns drop rank at a root of " +
                            e.echelon(i, i).str());
    }
  }
  // Back substitution T X = V_top with constant diagonal.
  const int n = g.rows();
  PolyMatrix x(r, n);
  for (int i = r - 1; i >= 0; --i) {
    const Poly inv(GaussianRational(1) / e.echelon(i, i).lead());
    for (int j = 0; j < n; ++j) {
      Poly acc = e.transform(i, j);
      for (int k = i + 1; k < r; ++k) acc -= e.echelon(i, k) * x(k, j);
      x(i, j) = acc * inv;
    }
  }
  return x;
}

PolyMatrix differentiate(const PolyMatrix& m) { return m.derivative(); }

ZeroFactoring factor_zeros(const PolyMatrix& f) {
  if (f.is_zero()) throw ZeroFunction("factor_zeros: function vanishes identically");
  Poly d;
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j) d = gcd(d, f(i, j));
  PolyMatrix g(f.rows(), f.cols());
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j) g(i, j) = exact_div(f(i, j), d);
  return {std::move(g), std::move(d)};
}

namespace {

// Inverse of a modulo m (gcd(a, m) = 1); remainders are kept monic.
Poly inverse_mod(const Poly& a, const Poly& m) {
  Poly r0 = m, r1 = divmod(a, m).second, s0, s1(1);
  while (!r1.is_zero()) {
    const Poly unit(GaussianRational(1) / r1.lead());
    r1 = r1 * unit;
    s1 = s1 * unit;
    auto [q, r] = divmod(r0, r1);
    r0 = std::exchange(r1, std::move(r));
    s0 = std::exchange(s1, s0 - q * s1);
  }
  if (r0.degree() != 0) throw InvalidArgument("inverse_mod: arguments are not coprime");
  return divmod(s0 * Poly(GaussianRational(1) / r0.lead()), m).second;
}

Poly mod(const Poly& a, const Poly& m) { return divmod(a, m).second; }

Poly squarefree_part(const Poly& w) { return exact_div(w, gcd(w, w.derivative())).monic(); }

// Rescales a nonzero column to coprime integer coefficient parts; returns
// the factor applied.
GaussianRational make_primitive(PolyMatrix& g) {
  mpz_class den = 1;
  for (int i = 0; i < g.rows(); ++i)
    for (const auto& c : g(i, 0).coeffs()) {
      mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.re().get_den_mpz_t());
      mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.im().get_den_mpz_t());
    }
  g = g * Poly(GaussianRational(mpq_class(den)));
  mpz_class content = 0;
  for (int i = 0; i < g.rows(); ++i)
    for (const auto& c : g(i, 0).coeffs()) {
      mpz_gcd(content.get_mpz_t(), content.get_mpz_t(), c.re().get_num_mpz_t());
      mpz_gcd(content.get_mpz_t(), content.get_mpz_t(), c.im().get_num_mpz_t());
    }
  mpq_class shrink(1, content);
  // Very long integers are traded for a power-of-two denominator so that
  // the column keeps a magnitude comparable to the rest of the basis.
  size_t bits = 0;
  for (int i = 0; i < g.rows(); ++i)
    for (const auto& c : g(i, 0).coeffs()) {
      bits = std::max(bits, mpz_sizeinbase(c.re().get_num_mpz_t(), 2));
      bits = std::max(bits, mpz_sizeinbase(c.im().get_num_mpz_t(), 2));
    }
  bits = std::max(bits, mpz_sizeinbase(content.get_mpz_t(), 2));
  bits -= std::min(bits, mpz_sizeinbase(content.get_mpz_t(), 2));
  if (bits > 24) {
    mpz_class pow2;
    mpz_ui_pow_ui(pow2.get_mpz_t(), 2, bits);
    shrink /= pow2;
  }
  g = g * Poly(GaussianRational(shrink));
  return GaussianRational(mpq_class(den * shrink));
}

}  // namespace

ConstantRankBasis::ConstantRankBasis(int n) : n_(n), g_(n, 0) {}

ConstantRankBasis::ConstantRankBasis(int n, const PolyMatrix& constant_rank_columns)
    : ConstantRankBasis(n) {
  if (constant_rank_columns.rows() != n) throw DimensionMismatch("basis rows differ from n");
  const int r = constant_rank_columns.cols();
  if (r == 0) return;
  if (r > n || minors_gcd(constant_rank_columns, r).degree() != 0) {
    throw NotConstantRank("basis columns are not of constant full rank");
  }
  g_ = constant_rank_columns;
}

const ConstantRankBasis::RowSubset* ConstantRankBasis::subset(size_t k) {
  const int r = rank();
  if (next_rows_.empty() && !subsets_done_) {
    next_rows_.resize(static_cast<size_t>(r));
    for (int i = 0; i < r; ++i) next_rows_[i] = i;
  }
  while (subsets_.size() <= k && !subsets_done_) {
    PolyMatrix sub(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) sub(i, j) = g_(next_rows_[i], j);
    Poly det = determinant(sub);
    if (!det.is_zero()) subsets_.push_back({next_rows_, std::move(det)});
    int i = r - 1;
    while (i >= 0 && next_rows_[i] == n_ - r + i) --i;
    if (i < 0) {
      subsets_done_ = true;
    } else {
      ++next_rows_[i];
      for (int j = i + 1; j < r; ++j) next_rows_[j] = next_rows_[j - 1] + 1;
    }
  }
  return k < subsets_.size() ? &subsets_[k] : nullptr;
}

// adj(G_S) f_S, i.e. det(G_S) times the solution of G_S b = f_S, by
// fraction-free Gauss-Jordan elimination on [G_S | f_S].
std::vector<Poly> ConstantRankBasis::cramer(const RowSubset& s, const PolyMatrix& f) const {
  const int r = rank();
  PolyMatrix a(r, r + 1);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) a(i, j) = g_(s.rows[i], j);
    a(i, r) = f(s.rows[i], 0);
  }
  Poly prev(1);
  for (int k = 0; k < r; ++k) {
    if (a(k, k).is_zero()) {
      int piv = k + 1;
      while (a(piv, k).is_zero()) ++piv;
      for (int j = 0; j <= r; ++j) std::swap(a(k, j), a(piv, j));
    }
    for (int i = 0; i < r; ++i) {
      if (i == k) continue;
      for (int j = k + 1; j <= r; ++j)
        a(i, j) = exact_div(a(k, k) * a(i, j) - a(i, k) * a(k, j), prev);
      a(i, k) = Poly();
    }
    for (int i = 0; i < k; ++i) a(i, i) = a(k, k);
    prev = a(k, k);
  }
  // prev = +-det(G_S) and a(:, r) = prev * solution.
  const bool flip = !(prev == s.det);
  std::vector<Poly> out(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) out[i] = flip ? -a(i, r) : a(i, r);
  return out;
}

// Coefficients b with g - g_ b vanishing at every root of the squarefree p.
// Each row subset handles the part of p coprime to its determinant; the
// pieces are glued by the Chinese remainder theorem.
std::vector<Poly> ConstantRankBasis::solve_modulo(const PolyMatrix& g, const Poly& p) {
  const int r = rank();
  std::vector<Poly> b(static_cast<size_t>(r));
  Poly modulus(1);
  Poly remaining = p;
  for (size_t k = 0; remaining.degree() > 0; ++k) {
    const RowSubset* s = subset(k);
    if (!s) throw NotConstantRank("basis drops rank at a root of " + remaining.str());
    const Poly common = gcd(remaining, s->det);
    const Poly q = exact_div(remaining, common).monic();
    remaining = common;
    if (q.degree() <= 0) continue;
    const Poly inv = inverse_mod(s->det, q);
    std::vector<Poly> bq = cramer(*s, g);
    // Combine x = b (mod modulus), x = bq (mod q).
    const Poly lift = inverse_mod(modulus, q);
    for (int i = 0; i < r; ++i) {
      bq[i] = mod(mod(bq[i], q) * inv, q);
      const Poly t = mod(mod(bq[i] - b[i], q) * lift, q);
      b[i] = b[i] + modulus * t;
    }
    modulus *= q;
  }
  return b;
}

ConstantRankBasis::Expansion ConstantRankBasis::absorb(const PolyMatrix& f) {
  if (f.rows() != n_ || f.cols() != 1) throw DimensionMismatch("absorb expects an n x 1 column");
  const int r = rank();
  Expansion out;
  out.coeffs.assign(static_cast<size_t>(r), Poly());
  if (f.is_zero()) return out;
  if (r > 0) {
    const RowSubset* s = subset(0);
    if (!s) throw NotConstantRank("basis columns are dependent");
    std::vector<Poly> num = cramer(*s, f);
    PolyMatrix lhs = f * s->det;
    for (int i = 0; i < r; ++i) lhs = lhs - g_.column(i) * num[i];
    if (lhs.is_zero()) {
      for (int i = 0; i < r; ++i) out.coeffs[i] = exact_div(num[i], s->det);
      return out;
    }
  }

  // f = g_ * c + g * e, starting from f = g * d with g zero-free; each pass
  // subtracts from g the basis combination matching it at the roots of the
  // wedge and divides out the resulting zeros.
  auto [g, e] = factor_zeros(f);
  std::vector<Poly> c(static_cast<size_t>(r));
  Poly w = minors_gcd(PolyMatrix::hcat(g_, g), r + 1);
  if (w.is_zero()) throw NotConstantRank("absorb: candidate column lies in the span");
  if (w.degree() > 0) e = e * Poly(GaussianRational(1) / make_primitive(g));
  const int budget = w.degree();
  while (w.degree() > 0) {
    if (out.correction_steps >= budget) {
      throw NotConstantRank("zero-removal loop exceeded " + std::to_string(budget) + " steps");
    }
    const std::vector<Poly> b = solve_modulo(g, squarefree_part(w));
    PolyMatrix h = g;
    for (int i = 0; i < r; ++i) h = h - g_.column(i) * b[i];
    auto [g_next, d_next] = factor_zeros(h);
    for (int i = 0; i < r; ++i) c[i] += b[i] * e;
    e = d_next * e;
    g = std::move(g_next);
    e = e * Poly(GaussianRational(1) / make_primitive(g));
    ++out.correction_steps;
    // The wedge is linear in the last column: wedge(g_, h) = d_next * wedge(g_, g_next).
    w = exact_div(w, d_next).monic();
  }
  g_ = PolyMatrix::hcat(g_, g);
  subsets_.clear();
  next_rows_.clear();
  subsets_done_ = false;
  c.push_back(std::move(e));
  out.coeffs = std::move(c);
  out.added = true;
  return out;
}

ConstantRankReduction constant_rank_reduce(const PolyMatrix& fs) {
  if (fs.is_zero()) throw ZeroFunction("constant_rank_reduce: all columns vanish");
  ConstantRankBasis basis(fs.rows());
  std::vector<std::vector<Poly>> cols;
  cols.reserve(fs.cols());
  for (int j = 0; j < fs.cols(); ++j) cols.push_back(basis.absorb(fs.column(j)).coeffs);
  const int l = basis.rank();
  PolyMatrix d(l, fs.cols());
  for (int j = 0; j < fs.cols(); ++j)
    for (int b = 0; b < static_cast<int>(cols[j].size()); ++b) d(b, j) = cols[j][b];
  return {basis.columns(), std::move(d), l};
}

PolyMatrix rank_complete(const PolyMatrix& gs, int n) {
  if (gs.rows() != n) throw DimensionMismatch("rank_complete: columns must have n rows");
  const int k = gs.cols();
  if (k >= n) throw AlreadyFull("rank_complete: set already has rank n");
  if (k > 0 && (generic_rank(gs) != k || !is_constant_rank(gs))) {
    throw NotConstantRank("rank_complete: input is not of constant full rank");
  }
  ConstantRankBasis basis(n, gs);
  // Standard basis vectors completing gs(0) to a basis of C^n; each is then
  // corrected to keep the rank constant on all of C.
  CMatrix at0 = gs.eval(0.0);
  for (int j = 0; j < n && basis.rank() < n; ++j) {
    CMatrix trial(n, at0.cols() + 1);
    trial << at0, Eigen::VectorXcd::Unit(n, j);
    if (numerical_rank(trial) <= numerical_rank(at0)) continue;
    at0 = trial;
    PolyMatrix e(n, 1);
    e(j, 0) = Poly(1);
    basis.absorb(e);
  }
  return basis.columns().columns(k, n - k);
}

RationalMatrix dual_frame(const PolyMatrix& fs) {
  const int n = fs.rows();
  if (fs.cols() != n) throw DimensionMismatch("dual_frame needs n columns in C^n");
  if (determinant(fs).is_zero()) throw SingularFrame("dual_frame: determinant vanishes identically");
  RationalMatrix a(fs);
  RationalMatrix inv(n, n);
  for (int i = 0; i < n; ++i) inv(i, i) = RationalFunction(Poly(1));
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int i = col; i < n; ++i)
      if (!a(i, col).is_zero()) {
        piv = i;
        break;
      }
    if (piv < 0) throw SingularFrame("dual_frame: singular during elimination");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    const RationalFunction p = a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) = a(col, j) / p;
      inv(col, j) = inv(col, j) / p;
    }
    for (int i = 0; i < n; ++i) {
      if (i == col || a(i, col).is_zero()) continue;
      const RationalFunction f = a(i, col);
      for (int j = 0; j < n; ++j) {
        a(i, j) = a(i, j) - f * a(col, j);
        inv(i, j) = inv(i, j) - f * inv(col, j);
      }
    }
  }
  return inv;
}

}  // namespace ftoda
