#include "ftoda/frenet.hpp"

#include <algorithm>
#include <cmath>

#include "ftoda/errors.hpp"

namespace ftoda {

namespace {

bool same_columns(const PolyMatrix& a, const PolyMatrix& b) { return a == b; }

double scaled(const CMatrix& diff, const CMatrix& lhs) {
  return diff.norm() / std::max(1.0, lhs.norm());
}

// Frame data at the four points of the first-derivative stencil, in the
// order z + d, z - d, z + i d, z - i d.
std::array<FrenetPointData, 4> stencil_frames(const OsculatingSequence& seq,
                                              const HermitianMetric& h, Complex z, double d) {
  const Complex i(0.0, 1.0);
  return {frame_at(seq, h, z + d), frame_at(seq, h, z - d), frame_at(seq, h, z + i * d),
          frame_at(seq, h, z - i * d)};
}

std::pair<CMatrix, CMatrix> wirtinger_pair(const std::array<CMatrix, 4>& v, double d) {
  const Complex i(0.0, 1.0);
  const CMatrix dx = (v[0] - v[1]) / (2.0 * d);
  const CMatrix dy = (v[2] - v[3]) / (2.0 * d);
  return {0.5 * (dx - i * dy), 0.5 * (dx + i * dy)};
}

double ln_det_hpd(const CMatrix& beta) {
  Eigen::LLT<CMatrix> llt(beta);
  if (llt.info() != Eigen::Success) throw SingularBeta("beta is not positive definite");
  double s = 0.0;
  for (Eigen::Index j = 0; j < beta.rows(); ++j) s += std::log(llt.matrixL()(j, j).real());
  return 2.0 * s;
}

}  // namespace

OsculatingSequence build_osculating(const PolyMatrix& xi) {
  if (xi.is_zero()) throw ZeroFunction("build_osculating: lift vanishes identically");
  OsculatingSequence seq;
  seq.n = xi.rows();

  const int k_in = generic_rank(xi);
  seq.input_rank_drop = minors_gcd(xi, k_in);

  ConstantRankReduction red = constant_rank_reduce(xi);
  if (red.rank < xi.cols()) {
    seq.warnings.push_back("lift columns are dependent; reduced from " + std::to_string(xi.cols()) +
                           " to " + std::to_string(red.rank) + " columns");
  } else if (!same_columns(red.gs, xi)) {
    seq.warnings.push_back("lift drops rank at the roots of " + seq.input_rank_drop.str() +
                           "; replaced by a constant-rank lift");
  }
  if (!is_constant_rank(red.gs)) throw NotConstantRank("reduced lift failed certification");

  ConstantRankBasis basis(seq.n, red.gs);
  seq.xis.push_back(red.gs);
  std::vector<std::vector<std::vector<Poly>>> raw;  // raw[a][j] = coeffs of d xi_a[:, j]

  for (int a = 0;; ++a) {
    const PolyMatrix dxi = seq.xis[a].derivative();
    const int before = basis.rank();
    std::vector<std::vector<Poly>> cols;
    for (int j = 0; j < dxi.cols(); ++j) cols.push_back(basis.absorb(dxi.column(j)).coeffs);
    raw.push_back(std::move(cols));
    const int added = basis.rank() - before;
    if (added == 0) break;
    seq.xis.push_back(basis.columns().columns(before, added));
  }
  if (!is_constant_rank(basis.columns())) {
    throw NotConstantRank("osculating flag failed certification");
  }

  std::vector<int> sizes;
  for (const auto& x : seq.xis) sizes.push_back(x.cols());
  seq.partition = BlockStructure(sizes);

  const int t = seq.t();
  seq.b_coeffs.resize(static_cast<size_t>(t) + 1);
  for (int a = 0; a <= t; ++a) {
    for (int b = 0; b <= std::min(a + 1, t); ++b) {
      PolyMatrix m(seq.partition.size(b), seq.partition.size(a));
      for (int j = 0; j < seq.partition.size(a); ++j) {
        const auto& c = raw[a][j];
        for (int i = 0; i < seq.partition.size(b); ++i) {
          const size_t idx = static_cast<size_t>(seq.partition.offset(b) + i);
          if (idx < c.size()) m(i, j) = c[idx];
        }
      }
      seq.b_coeffs[a].push_back(std::move(m));
    }
  }

  for (const auto& x : seq.xis) {
    seq.xis_numeric.push_back(x.numeric());
    seq.dxis_numeric.push_back(x.derivative().numeric());
  }
  return seq;
}

CMatrix FrenetPointData::phi_block(int a) const {
  return phi.middleCols(partition.offset(a), partition.size(a));
}

CMatrix FrenetPointData::gamma() const { return block_diagonal(betas); }

FrenetPointData frame_at(const OsculatingSequence& seq, const HermitianMetric& h, Complex z) {
  if (h.dim() != seq.n) throw DimensionMismatch("metric dimension differs from the curve's");
  const CMatrix& hm = h.matrix();
  const BlockStructure& p = seq.partition;
  const int t = seq.t();
  const int total = p.dim();

  FrenetPointData out;
  out.z = z;
  out.partition = p;
  out.phi = CMatrix::Zero(seq.n, total);

  CMatrix dxi(seq.n, total);
  // phi = Xi * nplus with nplus block upper unitriangular.
  CMatrix nplus = CMatrix::Zero(total, total);
  std::vector<Eigen::LLT<CMatrix>> inv;

  for (int a = 0; a <= t; ++a) {
    const int off = p.offset(a);
    const int k = p.size(a);
    dxi.middleCols(off, k) = seq.dxis_numeric[a].eval(z);
    CMatrix v = seq.xis_numeric[a].eval(z);
    require_finite(v, "xi");
    CMatrix coeff = CMatrix::Zero(total, k);
    coeff.middleRows(off, k).setIdentity();
    // Two sweeps of block modified Gram-Schmidt against the previous blocks.
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (int b = 0; b < a; ++b) {
        const auto phib = out.phi.middleCols(p.offset(b), p.size(b));
        const CMatrix c = inv[b].solve(phib.adjoint() * hm * v);
        v -= phib * c;
        coeff -= nplus.middleCols(p.offset(b), p.size(b)) * c;
      }
    }
    CMatrix beta = v.adjoint() * hm * v;
    beta = 0.5 * (beta + beta.adjoint()).eval();
    const double cond = condition_number(beta);
    if (!(cond <= kMaxPivotCondition)) {
      throw SingularBeta("beta_" + std::to_string(a) + " has condition number " +
                         std::to_string(cond));
    }
    out.phi.middleCols(off, k) = v;
    nplus.middleCols(off, k) = coeff;
    out.betas.push_back(beta);
    inv.emplace_back(beta);
  }

  // d_minus beta_a = phi_a^dagger h (d_minus Xi) nplus_a; the other terms of
  // d_minus phi_a lie in the span of earlier blocks.
  for (int a = 0; a <= t; ++a) {
    const auto phia = out.phi.middleCols(p.offset(a), p.size(a));
    out.dbetas.push_back(phia.adjoint() * hm * dxi * nplus.middleCols(p.offset(a), p.size(a)));
  }

  // B_{a+1,a} as the h-orthogonal least-squares coefficient of d xi_a along phi_{a+1}.
  for (int a = 0; a <= t; ++a) {
    const CMatrix dxa = dxi.middleCols(p.offset(a), p.size(a));
    CMatrix rest = dxa;
    for (int b = 0; b <= std::min(a + 1, t); ++b) {
      const auto phib = out.phi.middleCols(p.offset(b), p.size(b));
      const CMatrix c = inv[b].solve(phib.adjoint() * hm * dxa);
      rest -= phib * c;
      if (b == a + 1) {
        out.b_sub.push_back(c);
        out.d_super.push_back(-c.adjoint());
      }
    }
    out.b_solve_residual = std::max(out.b_solve_residual, scaled(rest, dxa));
  }
  return out;
}

double FrameResidual::max() const {
  double m = 0.0;
  for (double r : minus) m = std::max(m, r);
  for (double r : plus) m = std::max(m, r);
  return m;
}

FrameResidual verify_frame_equations(const OsculatingSequence& seq, const HermitianMetric& h,
                                     Complex z, double fd_step) {
  if (!(fd_step > 0.0)) throw InvalidArgument("fd_step must be positive");
  const FrenetPointData c = frame_at(seq, h, z);
  const auto s = stencil_frames(seq, h, z, fd_step);
  const int t = c.t();

  FrameResidual r;
  for (int a = 0; a <= t; ++a) {
    const auto [dm, dp] =
        wirtinger_pair({s[0].phi_block(a), s[1].phi_block(a), s[2].phi_block(a), s[3].phi_block(a)},
                       fd_step);
    const CMatrix phia = c.phi_block(a);

    CMatrix rhs_m = phia * c.betas[a].llt().solve(c.dbetas[a]);
    if (a < t) rhs_m += c.phi_block(a + 1) * c.b_sub[a];
    r.minus.push_back(scaled(dm - rhs_m, dm));

    CMatrix rhs_p = CMatrix::Zero(phia.rows(), phia.cols());
    if (a > 0) {
      rhs_p = c.phi_block(a - 1) * c.betas[a - 1].llt().solve(c.d_super[a - 1] * c.betas[a]);
    }
    r.plus.push_back(scaled(dp - rhs_p, dp));
  }
  return r;
}

double induced_metric(const FrenetPointData& data, int a) {
  if (a < 0 || a >= data.t()) {
    throw IndexOutOfRange("induced_metric: a must lie in [0, " + std::to_string(data.t()) + ")");
  }
  const CMatrix& b = data.b_sub[a];
  const CMatrix m = data.betas[a].llt().solve(b.adjoint() * data.betas[a + 1] * b);
  return m.trace().real();
}

std::vector<double> kahler_check(const OsculatingSequence& seq, const HermitianMetric& h,
                                 Complex z, double fd_step) {
  if (!(fd_step > 0.0)) throw InvalidArgument("fd_step must be positive");
  const FrenetPointData c = frame_at(seq, h, z);
  const int t = c.t();
  const auto s = stencil_frames(seq, h, z, fd_step);

  std::vector<double> g(static_cast<size_t>(t) + 1, 0.0);
  for (int a = 0; a < t; ++a) g[a] = induced_metric(c, a);

  std::vector<double> out;
  for (int a = 0; a <= t; ++a) {
    double lap = -4.0 * ln_det_hpd(c.betas[a]);
    for (const auto& f : s) lap += ln_det_hpd(f.betas[a]);
    const double lhs = 0.25 * lap / (fd_step * fd_step);
    const double rhs = g[a] - (a > 0 ? g[a - 1] : 0.0);
    out.push_back(std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return out;
}

double ConnectionTensor::max_abs() const {
  double m = 0.0;
  for (const auto& x : v_) m = std::max(m, std::abs(x));
  return m;
}

ConnectionCoefficients connection_coefficients(const FrenetPointData& data, const CMatrix& dbeta0) {
  const BlockStructure& p = data.partition;
  const int t = data.t();
  const int total = p.dim();
  const int k0 = p.size(0);
  if (dbeta0.rows() != k0 || dbeta0.cols() != k0) {
    throw DimensionMismatch("dbeta0 must be k_0 x k_0");
  }

  ConnectionCoefficients cc;
  cc.lambda_minus = CMatrix::Zero(total, total);
  cc.lambda_plus = CMatrix::Zero(total, total);
  for (int a = 0; a <= t; ++a) {
    const Eigen::LLT<CMatrix> ia(data.betas[a]);
    cc.lambda_minus.block(p.offset(a), p.offset(a), p.size(a), p.size(a)) = ia.solve(data.dbetas[a]);
    if (a < t) {
      cc.lambda_minus.block(p.offset(a + 1), p.offset(a), p.size(a + 1), p.size(a)) = data.b_sub[a];
      cc.lambda_plus.block(p.offset(a), p.offset(a + 1), p.size(a), p.size(a + 1)) =
          ia.solve(data.d_super[a] * data.betas[a + 1]);
    }
  }

  const int hz = total - k0;
  const CMatrix w = data.betas[0].llt().solve(dbeta0);
  cc.Lambda_minus = ConnectionTensor(hz, k0);
  cc.Lambda_plus = ConnectionTensor(hz, k0);
  for (int nu = 0; nu < hz; ++nu)
    for (int mu = 0; mu < hz; ++mu)
      for (int al = 0; al < k0; ++al)
        for (int be = 0; be < k0; ++be) {
          Complex m = 0.0;
          Complex pl = 0.0;
          if (al == be) {
            m = cc.lambda_minus(k0 + nu, k0 + mu);
            pl = cc.lambda_plus(k0 + nu, k0 + mu);
          }
          if (nu == mu) m -= w(al, be);
          cc.Lambda_minus(nu, al, be, mu) = m;
          cc.Lambda_plus(nu, al, be, mu) = pl;
        }
  return cc;
}

bool linear_fullness(const OsculatingSequence& seq, int n) { return seq.total_rank() == n; }

bool near_rank_drop(const OsculatingSequence& seq, Complex z, double radius) {
  if (seq.input_rank_drop.degree() <= 0) return false;
  for (const Complex& r : roots(seq.input_rank_drop))
    if (std::abs(z - r) < radius) return true;
  return false;
}

}  // namespace ftoda
