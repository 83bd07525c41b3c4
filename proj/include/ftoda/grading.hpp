#pragma once

#include <vector>

#include <gmpxx.h>

#include "ftoda/linalg.hpp"

namespace ftoda {

/// Block Z-gradation of gl(n, C): partition (k_0, ..., k_t) and one
/// nonnegative Dynkin label s_a per block boundary. Labels inside a block
/// are zero.
class GradationSpec {
 public:
  GradationSpec(BlockStructure blocks, std::vector<int> labels);

  /// All labels equal to 2: the gradation tied to Frenet frames.
  static GradationSpec canonical(BlockStructure blocks);

  const BlockStructure& blocks() const noexcept { return blocks_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int t() const noexcept { return blocks_.count() - 1; }
  int dim() const noexcept { return blocks_.dim(); }
  bool is_canonical() const;

  /// Full sl(n) Dynkin labels l_1..l_{n-1} (zero within blocks).
  std::vector<int> dynkin_labels() const;

 private:
  BlockStructure blocks_;
  std::vector<int> labels_;
};

struct GradingOperator {
  std::vector<mpq_class> rho;  // one eigenvalue per block, exact
  CMatrix q;                   // blockdiag(rho_a * I_{k_a})
};

GradingOperator build_grading(const GradationSpec& spec);

/// Diagonal of q computed from the Cartan-matrix formula
/// q = sum_ij h_i (K^{-1})_ij l_j with h_i = E_ii - E_{i+1,i+1}.
/// Independent of build_grading; used to cross-check it.
std::vector<mpq_class> grading_diagonal_from_cartan(const GradationSpec& spec);

int degree_of_block(const GradationSpec& spec, int a, int b);

/// True iff ||[q, x] - m x||_F < 1e-12 * max(1, ||x||_F).
bool eigen_check(const GradingOperator& op, const CMatrix& x, int m);

}  // namespace ftoda
