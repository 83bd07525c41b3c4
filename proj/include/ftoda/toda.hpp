#pragma once

// Nonabelian Toda systems for block gradations of gl(n, C):
//   d_plus(gamma^{-1} d_minus gamma) = [c_minus, gamma^{-1} c_plus gamma]
// with gamma block diagonal, c_minus holomorphic of degree -l and c_plus
// antiholomorphic of degree +l. d_minus = d/dz, d_plus = d/dzbar.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ftoda/frenet.hpp"
#include "ftoda/grading.hpp"
#include "ftoda/linalg.hpp"
#include "ftoda/poly.hpp"

namespace ftoda {

class TodaProblem {
 public:
  /// c_plus_bar is the polynomial Q with c_plus(z) = Q(zbar). In hermitian
  /// mode it must be omitted or equal -c_minus^dagger in that sense.
  TodaProblem(GradationSpec spec, int l, PolyMatrix c_minus, std::optional<PolyMatrix> c_plus_bar,
              HermitianMetric h, bool hermitian_mode);

  const GradationSpec& spec() const noexcept { return spec_; }
  const BlockStructure& blocks() const noexcept { return spec_.blocks(); }
  int l() const noexcept { return l_; }
  int dim() const noexcept { return spec_.dim(); }
  const PolyMatrix& c_minus_poly() const noexcept { return c_minus_; }
  const PolyMatrix& c_plus_poly() const noexcept { return c_plus_; }
  const HermitianMetric& h() const noexcept { return h_; }
  bool hermitian_mode() const noexcept { return hermitian_; }

  CMatrix c_minus(Complex z) const { return cm_.eval(z); }
  CMatrix c_plus(Complex z) const { return cp_.eval(std::conj(z)); }

 private:
  GradationSpec spec_;
  int l_;
  PolyMatrix c_minus_;
  PolyMatrix c_plus_;
  HermitianMetric h_;
  bool hermitian_;
  NumericPolyMatrix cm_;
  NumericPolyMatrix cp_;
};

/// The hermitian Toda problem whose c_minus collects the exact B_{a+1,a}
/// of an osculating sequence (canonical gradation, l = 2).
TodaProblem frenet_problem(const OsculatingSequence& seq, const HermitianMetric& h);

/// Holomorphic block-diagonal gamma_minus and, outside hermitian mode, the
/// polynomial Q with gamma_plus(z) = Q(zbar).
struct TodaSeed {
  PolyMatrix gamma_minus;
  std::optional<PolyMatrix> gamma_plus_bar;
};

/// Block-diagonal field z -> gamma(z). When with_d_minus is set it returns
/// gamma together with the exact d/dz gamma, which saves one level of
/// finite differencing.
struct GammaField {
  std::function<CMatrix(Complex)> gamma;
  std::function<std::pair<CMatrix, CMatrix>(Complex)> with_d_minus;
};

/// Per block a: ||lhs_a - rhs_a|| / max(1, ||lhs_a||, ||rhs_a||) with
/// lhs_a = d_plus(beta_a^{-1} d_minus beta_a) and rhs_a the (a, a) block of
/// [c_minus, gamma^{-1} c_plus gamma].
std::vector<double> toda_residual(const TodaProblem& problem, const GammaField& field, Complex z,
                                  double fd_step);

/// Same, with c_minus(z) and c_plus(z) given as matrices at the point.
std::vector<double> toda_residual(const BlockStructure& blocks, const GammaField& field,
                                  const CMatrix& c_minus, const CMatrix& c_plus, Complex z,
                                  double fd_step);

/// Gamma field of the Frenet frame: beta_a from frame_at, exact d_minus beta_a.
GammaField frenet_gamma_field(const OsculatingSequence& seq, const HermitianMetric& h);

/// c_minus and c_plus at a point assembled from frame data.
std::pair<CMatrix, CMatrix> frenet_c_pair(const FrenetPointData& data);

/// ||d_plus w_minus - d_minus w_plus - [w_minus, w_plus]|| scaled by the
/// largest term, for w_minus = gamma^{-1} d_minus gamma + c_minus and
/// w_plus = gamma^{-1} c_plus gamma.
double zero_curvature_check(const TodaProblem& problem, const GammaField& field, Complex z,
                            double fd_step);

struct MuPair {
  CMatrix minus;
  CMatrix plus;
};

/// Integrates mu_minus^{-1} d_minus mu_minus = gamma_minus c_minus gamma_minus^{-1}
/// (and the d_plus analogue for mu_plus) from mu = I at basepoint along the
/// straight segment to z with `steps` RK4 steps.
MuPair integrate_mu(const TodaProblem& problem, const TodaSeed& seed, Complex basepoint, Complex z,
                    int steps);

/// Same along a polygonal path through `vertices` (first is the basepoint),
/// `steps` RK4 steps per segment.
MuPair integrate_mu_path(const TodaProblem& problem, const TodaSeed& seed,
                         const std::vector<Complex>& vertices, int steps);

struct SolveOptions {
  Complex basepoint{0.0, 0.0};
  int steps = 1000;
};

struct TodaPoint {
  Complex z;
  CMatrix gamma;
  CMatrix d_minus_gamma;
  CMatrix phi;
  CMatrix mu_minus;
  CMatrix mu_plus;
};

/// Full construction at one point: Gauss-decompose mu_plus^{-1} mu_minus =
/// nu_minus eta nu_plus^{-1}, gamma = gamma_plus^{-1} eta gamma_minus and
/// phi = g0^{-1} mu_minus nu_plus gamma_minus.
TodaPoint solve_at(const TodaProblem& problem, const TodaSeed& seed, const CMatrix& g0, Complex z,
                   const SolveOptions& opts = {});

struct TodaSolution {
  std::vector<Complex> grid;
  std::vector<std::optional<TodaPoint>> points;
  std::vector<std::string> status;  // "ok" or the error tag
  std::vector<std::string> message;

  size_t failed() const;
};

/// Pointwise solve over the grid; failures are recorded per point.
/// `threads` <= 1 runs serially.
TodaSolution solve(const TodaProblem& problem, const TodaSeed& seed,
                   const std::vector<Complex>& grid, const CMatrix& g0,
                   const SolveOptions& opts = {}, int threads = 1);

/// Gamma field of the constructed solution, re-solving at each requested point.
GammaField solution_gamma_field(const TodaProblem& problem, const TodaSeed& seed,
                                const CMatrix& g0, const SolveOptions& opts = {});

/// max over solved points of ||phi^dagger h phi - gamma|| / ||gamma||.
double check_phi_relation(const TodaSolution& solution, const TodaProblem& problem);

/// ||gamma - gamma^dagger|| / ||gamma||.
double hermiticity_defect(const CMatrix& gamma);

/// True iff every diagonal block is (numerically) positive definite.
bool blocks_positive_definite(const CMatrix& gamma, const BlockStructure& blocks);

}  // namespace ftoda
