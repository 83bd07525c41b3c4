#include "ftoda/grading.hpp"

#include <string>

#include "ftoda/errors.hpp"

namespace ftoda {

GradationSpec::GradationSpec(BlockStructure blocks, std::vector<int> labels)
    : blocks_(std::move(blocks)), labels_(std::move(labels)) {
  if (static_cast<int>(labels_.size()) != blocks_.count() - 1) {
    throw InvalidArgument("gradation needs " + std::to_string(blocks_.count() - 1) +
                          " labels, got " + std::to_string(labels_.size()));
  }
  for (int s : labels_) {
    if (s < 0) throw InvalidArgument("Dynkin labels must be nonnegative");
  }
}

GradationSpec GradationSpec::canonical(BlockStructure blocks) {
  std::vector<int> labels(static_cast<size_t>(blocks.count() - 1), 2);
  return {std::move(blocks), std::move(labels)};
}

bool GradationSpec::is_canonical() const {
  for (int s : labels_)
    if (s != 2) return false;
  return true;
}

std::vector<int> GradationSpec::dynkin_labels() const {
  std::vector<int> l(static_cast<size_t>(dim() - 1), 0);
  for (int a = 1; a <= t(); ++a) l[blocks_.offset(a) - 1] = labels_[a - 1];
  return l;
}

GradingOperator build_grading(const GradationSpec& spec) {
  const auto& k = spec.blocks().sizes();
  const auto& s = spec.labels();
  const int t = spec.t();
  const int n = spec.dim();

  // prefix[b] = k_0 + ... + k_{b-1}
  std::vector<long> prefix(static_cast<size_t>(t) + 2, 0);
  for (int b = 0; b <= t; ++b) prefix[b + 1] = prefix[b] + k[b];

  GradingOperator op;
  op.rho.reserve(static_cast<size_t>(t) + 1);
  for (int a = 0; a <= t; ++a) {
    mpq_class acc = 0;
    for (int b = 1; b <= a; ++b) acc -= mpq_class(s[b - 1]) * prefix[b];
    for (int b = a + 1; b <= t; ++b) acc += mpq_class(s[b - 1]) * (n - prefix[b]);
    acc /= n;
    acc.canonicalize();
    op.rho.push_back(acc);
  }
  op.q = CMatrix::Zero(n, n);
  for (int a = 0; a <= t; ++a)
    for (int i = 0; i < k[a]; ++i) {
      const int d = spec.blocks().offset(a) + i;
      op.q(d, d) = op.rho[a].get_d();
    }
  return op;
}

std::vector<mpq_class> grading_diagonal_from_cartan(const GradationSpec& spec) {
  const int r = spec.dim() - 1;
  if (r == 0) return {mpq_class(0)};
  const auto l = spec.dynkin_labels();

  // Solve K v = l exactly; K is the A_r Cartan matrix.
  std::vector<std::vector<mpq_class>> a(r, std::vector<mpq_class>(r + 1, 0));
  for (int i = 0; i < r; ++i) {
    a[i][i] = 2;
    if (i > 0) a[i][i - 1] = -1;
    if (i + 1 < r) a[i][i + 1] = -1;
    a[i][r] = l[i];
  }
  for (int c = 0; c < r; ++c) {
    for (int i = c + 1; i < r; ++i) {
      if (sgn(a[i][c]) == 0) continue;
      const mpq_class f = a[i][c] / a[c][c];
      for (int j = c; j <= r; ++j) a[i][j] -= f * a[c][j];
    }
  }
  std::vector<mpq_class> v(r, 0);
  for (int i = r - 1; i >= 0; --i) {
    mpq_class acc = a[i][r];
    for (int j = i + 1; j < r; ++j) acc -= a[i][j] * v[j];
    v[i] = acc / a[i][i];
  }

  std::vector<mpq_class> diag(static_cast<size_t>(r) + 1, 0);
  for (int p = 0; p <= r; ++p) {
    mpq_class d = 0;
    if (p < r) d += v[p];
    if (p > 0) d -= v[p - 1];
    d.canonicalize();
    diag[p] = d;
  }
  return diag;
}

int degree_of_block(const GradationSpec& spec, int a, int b) {
  return block_degree(spec.labels(), a, b);
}

bool eigen_check(const GradingOperator& op, const CMatrix& x, int m) {
  if (x.rows() != op.q.rows() || x.cols() != op.q.cols()) {
    throw DimensionMismatch("eigen_check: matrix does not match grading operator");
  }
  const CMatrix comm = op.q * x - x * op.q;
  return (comm - static_cast<double>(m) * x).norm() < 1e-12 * std::max(1.0, x.norm());
}

}  // namespace ftoda
