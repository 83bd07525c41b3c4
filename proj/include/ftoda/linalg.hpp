#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ftoda {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kMaxPivotCondition = 1e12;

/// Throws NonFiniteValue if any entry is NaN or infinite.
void require_finite(const CMatrix& m, std::string_view what);

/// Positive definite hermitian form (v, u) = v^† h u on C^n.
class HermitianMetric {
 public:
  /// Validates hermiticity (1e-12 entrywise) and positive definiteness.
  explicit HermitianMetric(CMatrix h);

  static HermitianMetric identity(Eigen::Index n);

  const CMatrix& matrix() const noexcept { return h_; }
  Eigen::Index dim() const noexcept { return h_.rows(); }

  /// Upper-triangular g with g^† g = h.
  CMatrix factor() const;

 private:
  CMatrix h_;
};

/// Ordered partition n = k_0 + ... + k_t of the row/column index range.
class BlockStructure {
 public:
  BlockStructure() = default;
  explicit BlockStructure(std::vector<int> sizes);

  const std::vector<int>& sizes() const noexcept { return sizes_; }
  int count() const noexcept { return static_cast<int>(sizes_.size()); }
  int dim() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  int size(int a) const { return sizes_.at(a); }
  int offset(int a) const { return offsets_.at(a); }
  int block_of(int index) const;

  bool operator==(const BlockStructure& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;  // prefix sums, offsets_[count()] == dim()
};

struct GaussFactors {
  CMatrix n_minus;  // block lower unitriangular
  CMatrix eta;      // block diagonal
  CMatrix n_plus;   // block upper unitriangular
};

CMatrix hermitian_form(const CMatrix& a, const HermitianMetric& h, const CMatrix& b);

/// Number of singular values above tol_rel * sigma_max.
int numerical_rank(const CMatrix& m, double tol_rel = kDefaultRankTol);

/// 2-norm condition number; infinity for singular input.
double condition_number(const CMatrix& m);

/// Block LDU factorisation g = n_minus * eta * n_plus^{-1}, computed by
/// sequential Schur-complement elimination. Throws GaussDecompositionFailed
/// naming the first block whose pivot is singular or has
/// max(||g||_2, ||pivot||_2) / sigma_min(pivot) above kMaxPivotCondition.
GaussFactors gauss_decompose(const CMatrix& g, const BlockStructure& blocks);

/// Grading degree of block (a, b) for Dynkin labels s_1..s_t:
/// sum of s_{a+1}..s_b above the diagonal, minus s_{b+1}..s_a below.
int block_degree(std::span<const int> labels, int a, int b);

/// Keeps only the blocks of x whose grading degree equals `degree`.
CMatrix block_project(const CMatrix& x, const BlockStructure& blocks, int degree,
                      std::span<const int> labels);

/// Block (a, b) of x under the given partition.
CMatrix block(const CMatrix& x, const BlockStructure& blocks, int a, int b);

/// Block-diagonal matrix assembled from square blocks.
CMatrix block_diagonal(std::span<const CMatrix> blocks);

}  // namespace ftoda
