#include "ftoda/linalg.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ftoda/errors.hpp"

namespace ftoda {

void require_finite(const CMatrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw NonFiniteValue(std::string(what) + " contains NaN or infinite entries");
  }
}

HermitianMetric::HermitianMetric(CMatrix h) : h_(std::move(h)) {
  if (h_.rows() != h_.cols() || h_.rows() == 0) {
    throw DimensionMismatch("hermitian metric must be a non-empty square matrix");
  }
  require_finite(h_, "hermitian metric");
  const double asym = (h_ - h_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) {
    throw InvalidArgument("metric is not hermitian (max |h - h^dagger| = " +
                          std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidArgument("metric is not positive definite");
  }
}

HermitianMetric HermitianMetric::identity(Eigen::Index n) {
  return HermitianMetric(CMatrix::Identity(n, n));
}

CMatrix HermitianMetric::factor() const {
  Eigen::LLT<CMatrix> llt(h_);
  return llt.matrixU();
}

BlockStructure::BlockStructure(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw InvalidArgument("block structure needs at least one block");
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  for (int k : sizes_) {
    if (k < 1) throw InvalidArgument("block sizes must be positive");
    offsets_.push_back(offsets_.back() + k);
  }
}

int BlockStructure::block_of(int index) const {
  for (int a = 0; a < count(); ++a) {
    if (index < offsets_[a + 1]) return a;
  }
  throw IndexOutOfRange("index " + std::to_string(index) + " outside block structure");
}

CMatrix hermitian_form(const CMatrix& a, const HermitianMetric& h, const CMatrix& b) {
  if (a.rows() != h.dim() || b.rows() != h.dim()) {
    throw DimensionMismatch("hermitian_form: operands must have " +
                            std::to_string(h.dim()) + " rows");
  }
  return a.adjoint() * h.matrix() * b;
}

int numerical_rank(const CMatrix& m, double tol_rel) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  if (smax == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol_rel * smax) ++rank;
  }
  return rank;
}

double condition_number(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 1.0;
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

GaussFactors gauss_decompose(const CMatrix& g, const BlockStructure& blocks) {
  const Eigen::Index n = g.rows();
  if (g.cols() != n || blocks.dim() != n) {
    throw DimensionMismatch("gauss_decompose: matrix is " + std::to_string(g.rows()) + "x" +
                            std::to_string(g.cols()) + ", partition covers " +
                            std::to_string(blocks.dim()));
  }
  require_finite(g, "gauss_decompose input");

  CMatrix schur = g;
  CMatrix lower = CMatrix::Identity(n, n);
  CMatrix upper = CMatrix::Identity(n, n);
  CMatrix eta = CMatrix::Zero(n, n);

  const double scale = n == 0 ? 0.0 : Eigen::JacobiSVD<CMatrix>(g).singularValues()(0);

  for (int a = 0; a < blocks.count(); ++a) {
    const int o = blocks.offset(a);
    const int k = blocks.size(a);
    const Eigen::Index rest = n - o - k;
    const CMatrix pivot = schur.block(o, o, k, k);
    // Measured against the input scale as well, so that tiny scalar pivots
    // are caught.
    const auto sv = Eigen::JacobiSVD<CMatrix>(pivot).singularValues();
    const double cond = std::max(scale, sv(0)) / sv(k - 1);
    if (!(cond <= kMaxPivotCondition)) {
      throw GaussDecompositionFailed(
          a, "leading block minor " + std::to_string(a) + " is singular or ill-conditioned (cond " +
                 std::to_string(cond) + ")");
    }
    eta.block(o, o, k, k) = pivot;
    if (rest == 0) break;

    Eigen::PartialPivLU<CMatrix> lu(pivot);
    const CMatrix u12 = lu.solve(schur.block(o, o + k, k, rest));
    const CMatrix l21 = schur.block(o + k, o, rest, k) * lu.inverse();
    upper.block(o, o + k, k, rest) = u12;
    lower.block(o + k, o, rest, k) = l21;
    schur.block(o + k, o + k, rest, rest) -= schur.block(o + k, o, rest, k) * u12;
  }

  // upper is unit upper triangular entrywise, so its inverse is too.
  CMatrix n_plus = upper.triangularView<Eigen::UnitUpper>().solve(CMatrix::Identity(n, n));
  return GaussFactors{std::move(lower), std::move(eta), std::move(n_plus)};
}

int block_degree(std::span<const int> labels, int a, int b) {
  const int t = static_cast<int>(labels.size());
  if (a < 0 || b < 0 || a > t || b > t) {
    throw IndexOutOfRange("block index outside 0.." + std::to_string(t));
  }
  if (a == b) return 0;
  if (a < b) return std::accumulate(labels.begin() + a, labels.begin() + b, 0);
  return -std::accumulate(labels.begin() + b, labels.begin() + a, 0);
}

CMatrix block_project(const CMatrix& x, const BlockStructure& blocks, int degree,
                      std::span<const int> labels) {
  if (x.rows() != blocks.dim() || x.cols() != blocks.dim()) {
    throw DimensionMismatch("block_project: matrix does not match partition");
  }
  if (static_cast<int>(labels.size()) != blocks.count() - 1) {
    throw DimensionMismatch("block_project: need one label per block boundary");
  }
  CMatrix out = CMatrix::Zero(x.rows(), x.cols());
  for (int a = 0; a < blocks.count(); ++a) {
    for (int b = 0; b < blocks.count(); ++b) {
      if (block_degree(labels, a, b) != degree) continue;
      out.block(blocks.offset(a), blocks.offset(b), blocks.size(a), blocks.size(b)) =
          x.block(blocks.offset(a), blocks.offset(b), blocks.size(a), blocks.size(b));
    }
  }
  return out;
}

CMatrix block(const CMatrix& x, const BlockStructure& blocks, int a, int b) {
  return x.block(blocks.offset(a), blocks.offset(b), blocks.size(a), blocks.size(b));
}

CMatrix block_diagonal(std::span<const CMatrix> blocks) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  CMatrix out = CMatrix::Zero(n, n);
  Eigen::Index o = 0;
  for (const auto& b : blocks) {
    out.block(o, o, b.rows(), b.cols()) = b;
    o += b.rows();
  }
  return out;
}

}  // namespace ftoda
