#pragma once

// Osculating sequences and Frenet frames of polynomial curves in G^k(C^n).
//
// Convention: d_minus = d/dz, d_plus = d/dzbar.

#include <array>
#include <string>
#include <vector>

#include "ftoda/linalg.hpp"
#include "ftoda/poly.hpp"

namespace ftoda {

/// xi_0, ..., xi_t with d_minus xi_a = sum_{b <= a+1} xi_b B_{ba}. Every
/// prefix [xi_0 ... xi_a] has constant full rank on C.
struct OsculatingSequence {
  int n = 0;
  std::vector<PolyMatrix> xis;
  /// b_coeffs[a][b] = B_{ba}, exact, for b = 0..a+1 (b <= t).
  std::vector<std::vector<PolyMatrix>> b_coeffs;
  BlockStructure partition;
  /// Non-fatal diagnostics (e.g. the input lift had to be reduced).
  std::vector<std::string> warnings;
  /// Monic gcd of maximal minors of the original lift; its roots are where
  /// the input failed to be a lift.
  Poly input_rank_drop;

  std::vector<NumericPolyMatrix> xis_numeric;
  std::vector<NumericPolyMatrix> dxis_numeric;

  int t() const { return static_cast<int>(xis.size()) - 1; }
  int total_rank() const { return partition.dim(); }
};

OsculatingSequence build_osculating(const PolyMatrix& xi);

/// Pointwise Frenet data. Blocks are indexed a = 0..t.
struct FrenetPointData {
  Complex z;
  BlockStructure partition;
  CMatrix phi;                  // n x (k_0 + ... + k_t)
  std::vector<CMatrix> betas;   // beta_a = phi_a^dagger h phi_a
  std::vector<CMatrix> dbetas;  // d_minus beta_a (exact derivative of the Gram factorisation)
  std::vector<CMatrix> b_sub;   // B_{a+1,a}, a = 0..t-1
  std::vector<CMatrix> d_super; // D_{a,a+1} = -(B_{a+1,a})^dagger, a = 0..t-1
  double b_solve_residual = 0.0;

  int t() const { return partition.count() - 1; }
  CMatrix phi_block(int a) const;
  CMatrix gamma() const;  // blockdiag(beta_0, ..., beta_t)
};

/// Frenet frame at z via the projector chain phi_{a+1} = Pi_a ... Pi_0 xi_{a+1}.
/// Throws SingularBeta when some beta_a has condition number above 1e12.
FrenetPointData frame_at(const OsculatingSequence& seq, const HermitianMetric& h, Complex z);

struct FrameResidual {
  std::vector<double> minus;  // per a, equation for d_minus phi_a
  std::vector<double> plus;   // per a, equation for d_plus phi_a
  double max() const;
};

/// Finite-difference residuals of the two frame equations, each scaled by
/// max(1, ||lhs||_F).
FrameResidual verify_frame_equations(const OsculatingSequence& seq, const HermitianMetric& h,
                                     Complex z, double fd_step);

/// g_a(d_plus, d_minus) = tr(beta_a^{-1} B_{a+1,a}^dagger beta_{a+1} B_{a+1,a}); a < t.
double induced_metric(const FrenetPointData& data, int a);

/// |d_plus d_minus ln det beta_a - (g_a - g_{a-1})| per a = 0..t, with
/// g_{-1} = g_t = 0, scaled by max(1, |g_a - g_{a-1}|).
std::vector<double> kahler_check(const OsculatingSequence& seq, const HermitianMetric& h,
                                 Complex z, double fd_step);

/// Dense 4-index array (nu, alpha, beta, mu) with nu, mu horizontal
/// (0..n-k_0-1 here, k_0+1..n in 1-based frame numbering) and alpha, beta
/// fibre indices (0..k_0-1).
class ConnectionTensor {
 public:
  ConnectionTensor() = default;
  ConnectionTensor(int horizontal, int fibre)
      : h_(horizontal), f_(fibre), v_(static_cast<size_t>(horizontal) * horizontal * fibre * fibre) {}

  Complex& operator()(int nu, int alpha, int beta, int mu) { return v_[index(nu, alpha, beta, mu)]; }
  Complex operator()(int nu, int alpha, int beta, int mu) const {
    return v_[index(nu, alpha, beta, mu)];
  }
  int horizontal() const noexcept { return h_; }
  int fibre() const noexcept { return f_; }
  double max_abs() const;

 private:
  size_t index(int nu, int alpha, int beta, int mu) const {
    return ((static_cast<size_t>(nu) * f_ + alpha) * f_ + beta) * h_ + mu;
  }
  int h_ = 0;
  int f_ = 0;
  std::vector<Complex> v_;
};

struct ConnectionCoefficients {
  CMatrix lambda_minus;  // d_minus phi = phi lambda_minus
  CMatrix lambda_plus;   // d_plus phi = phi lambda_plus
  ConnectionTensor Lambda_minus;
  ConnectionTensor Lambda_plus;
};

ConnectionCoefficients connection_coefficients(const FrenetPointData& data, const CMatrix& dbeta0);

bool linear_fullness(const OsculatingSequence& seq, int n);

/// Grid points closer than `radius` to a root of seq.input_rank_drop.
bool near_rank_drop(const OsculatingSequence& seq, Complex z, double radius = 1e-3);

}  // namespace ftoda
