#include "ftoda/toda.hpp"

#include <algorithm>
#include <cmath>

#include "ftoda/errors.hpp"
#include "ftoda/parallel.hpp"
#include "ftoda/wirtinger.hpp"

namespace ftoda {

namespace {

void require_degree(const PolyMatrix& m, const GradationSpec& spec, int degree, const char* name) {
  const BlockStructure& p = spec.blocks();
  if (m.rows() != p.dim() || m.cols() != p.dim()) {
    throw DimensionMismatch(std::string(name) + " must be " + std::to_string(p.dim()) + " x " +
                            std::to_string(p.dim()));
  }
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      if (m(i, j).is_zero()) continue;
      if (block_degree(spec.labels(), p.block_of(i), p.block_of(j)) != degree) {
        throw InvalidArgument(std::string(name) + " has an entry at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") outside grading degree " +
                              std::to_string(degree));
      }
    }
}

void require_seed(const TodaProblem& problem, const TodaSeed& seed) {
  require_degree(seed.gamma_minus, problem.spec(), 0, "gamma_minus");
  if (!problem.hermitian_mode()) {
    if (!seed.gamma_plus_bar) throw InvalidArgument("gamma_plus is required outside hermitian mode");
    require_degree(*seed.gamma_plus_bar, problem.spec(), 0, "gamma_plus");
  }
}

CMatrix block_diagonal_part(const CMatrix& x, const BlockStructure& p) {
  CMatrix out = CMatrix::Zero(x.rows(), x.cols());
  for (int a = 0; a < p.count(); ++a)
    out.block(p.offset(a), p.offset(a), p.size(a), p.size(a)) =
        x.block(p.offset(a), p.offset(a), p.size(a), p.size(a));
  return out;
}

// Evaluates the seed and the flat connections at a point.
class SeedEval {
 public:
  SeedEval(const TodaProblem& problem, const TodaSeed& seed)
      : problem_(problem),
        gm_(seed.gamma_minus.numeric()),
        dgm_(seed.gamma_minus.derivative().numeric()) {
    if (seed.gamma_plus_bar) gp_ = seed.gamma_plus_bar->numeric();
  }

  CMatrix gamma_minus(Complex z) const { return gm_.eval(z); }
  CMatrix d_gamma_minus(Complex z) const { return dgm_.eval(z); }

  CMatrix gamma_plus(Complex z) const {
    if (problem_.hermitian_mode()) return invert(gm_.eval(z).adjoint(), "gamma_minus");
    return gp_.eval(std::conj(z));
  }

  // mu_minus^{-1} d_minus mu_minus
  CMatrix a_minus(Complex z) const {
    const CMatrix g = gm_.eval(z);
    return g * problem_.c_minus(z) * invert(g, "gamma_minus");
  }

  // mu_plus^{-1} d_plus mu_plus
  CMatrix a_plus(Complex z) const {
    const CMatrix g = gamma_plus(z);
    return g * problem_.c_plus(z) * invert(g, "gamma_plus");
  }

  static CMatrix invert(const CMatrix& m, const char* what) {
    Eigen::PartialPivLU<CMatrix> lu(m);
    if (!(std::abs(lu.determinant()) > 0.0) || condition_number(m) > kMaxPivotCondition) {
      throw InvalidArgument(std::string(what) + " is singular");
    }
    return lu.inverse();
  }

 private:
  const TodaProblem& problem_;
  NumericPolyMatrix gm_;
  NumericPolyMatrix dgm_;
  NumericPolyMatrix gp_;
};

// Classical RK4 for mu' = mu * f(s) on s in [0, 1].
template <class F>
CMatrix rk4(CMatrix mu, F&& f, int steps) {
  const double h = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    const double s = k * h;
    const CMatrix f1 = f(s);
    const CMatrix f2 = f(s + 0.5 * h);
    const CMatrix f4 = f(s + h);
    const CMatrix k1 = mu * f1;
    const CMatrix k2 = (mu + 0.5 * h * k1) * f2;
    const CMatrix k3 = (mu + 0.5 * h * k2) * f2;
    const CMatrix k4 = (mu + h * k3) * f4;
    mu += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double norm = mu.norm();
    if (!std::isfinite(norm) || norm > 1e12) {
      throw IntegrationDiverged("mu exceeded 1e12 at step " + std::to_string(k + 1));
    }
  }
  return mu;
}

MuPair integrate_segment(const TodaProblem& problem, const SeedEval& ev, MuPair mu, Complex from,
                         Complex to, int steps) {
  const Complex delta = to - from;
  auto path = [&](double s) { return from + s * delta; };
  mu.minus = rk4(mu.minus, [&](double s) { return (ev.a_minus(path(s)) * delta).eval(); }, steps);
  if (!problem.hermitian_mode()) {
    mu.plus = rk4(mu.plus, [&](double s) { return (ev.a_plus(path(s)) * std::conj(delta)).eval(); },
                  steps);
  }
  return mu;
}

MuPair finish(const TodaProblem& problem, MuPair mu) {
  if (problem.hermitian_mode()) mu.plus = SeedEval::invert(mu.minus.adjoint(), "mu_minus");
  return mu;
}

void check_cond(const CMatrix& gamma, const BlockStructure& p) {
  for (int a = 0; a < p.count(); ++a) {
    const double c = condition_number(block(gamma, p, a, a));
    if (!(c <= kMaxPivotCondition)) {
      throw SingularBeta("beta_" + std::to_string(a) + " has condition number " + std::to_string(c));
    }
  }
}

// gamma^{-1} d_minus gamma at w, analytic when available.
CMatrix log_derivative(const GammaField& field, Complex w, double step) {
  if (field.with_d_minus) {
    const auto [g, dg] = field.with_d_minus(w);
    return g.partialPivLu().solve(dg);
  }
  const CMatrix g = field.gamma(w);
  return g.partialPivLu().solve(wirtinger::d_minus(field.gamma, w, step));
}

}  // namespace

TodaProblem::TodaProblem(GradationSpec spec, int l, PolyMatrix c_minus,
                         std::optional<PolyMatrix> c_plus_bar, HermitianMetric h, bool hermitian_mode)
    : spec_(std::move(spec)),
      l_(l),
      c_minus_(std::move(c_minus)),
      h_(std::move(h)),
      hermitian_(hermitian_mode) {
  if (l_ < 1) throw InvalidArgument("grading gap l must be positive");
  for (int s : spec_.labels()) {
    if (s < l_) {
      throw InvalidArgument("every label must be at least l = " + std::to_string(l_) +
                            " so that no degree lies strictly between 0 and l");
    }
  }
  if (h_.dim() != spec_.dim()) throw DimensionMismatch("metric dimension differs from gradation");
  require_degree(c_minus_, spec_, -l_, "c_minus");
  const PolyMatrix herm = -c_minus_.conj_transpose();
  if (hermitian_) {
    if (c_plus_bar && !(*c_plus_bar == herm)) {
      throw InvalidArgument("hermitian mode requires c_plus = -c_minus^dagger");
    }
    c_plus_ = herm;
  } else {
    if (!c_plus_bar) throw InvalidArgument("c_plus is required outside hermitian mode");
    c_plus_ = *c_plus_bar;
  }
  require_degree(c_plus_, spec_, l_, "c_plus");
  cm_ = c_minus_.numeric();
  cp_ = c_plus_.numeric();
}

TodaProblem frenet_problem(const OsculatingSequence& seq, const HermitianMetric& h) {
  const BlockStructure& p = seq.partition;
  PolyMatrix cm(p.dim(), p.dim());
  for (int a = 0; a < seq.t(); ++a) cm.set_block(p.offset(a + 1), p.offset(a), seq.b_coeffs[a][a + 1]);
  // The Toda field lives on C^N with N = total rank; the ambient metric only
  // matches when the curve is linearly full.
  HermitianMetric hn = p.dim() == h.dim() ? h : HermitianMetric::identity(p.dim());
  return {GradationSpec::canonical(p), 2, cm, std::nullopt, hn, true};
}

std::vector<double> toda_residual(const BlockStructure& blocks, const GammaField& field,
                                  const CMatrix& c_minus, const CMatrix& c_plus, Complex z,
                                  double fd_step) {
  if (!(fd_step > 0.0)) throw InvalidArgument("fd_step must be positive");
  const CMatrix gamma = field.gamma(z);
  require_finite(gamma, "gamma");
  check_cond(gamma, blocks);

  const CMatrix lhs = wirtinger::d_plus(
      [&](Complex w) { return log_derivative(field, w, fd_step); }, z, fd_step);
  const auto lu = gamma.partialPivLu();
  const CMatrix w_plus = lu.solve(c_plus * gamma);
  const CMatrix rhs = c_minus * w_plus - w_plus * c_minus;

  std::vector<double> out;
  for (int a = 0; a < blocks.count(); ++a) {
    const CMatrix l = block(lhs, blocks, a, a);
    const CMatrix r = block(rhs, blocks, a, a);
    out.push_back((l - r).norm() / std::max({1.0, l.norm(), r.norm()}));
  }
  return out;
}

std::vector<double> toda_residual(const TodaProblem& problem, const GammaField& field, Complex z,
                                  double fd_step) {
  return toda_residual(problem.blocks(), field, problem.c_minus(z), problem.c_plus(z), z, fd_step);
}

GammaField frenet_gamma_field(const OsculatingSequence& seq, const HermitianMetric& h) {
  GammaField f;
  f.gamma = [&seq, h](Complex w) { return frame_at(seq, h, w).gamma(); };
  f.with_d_minus = [&seq, h](Complex w) {
    const FrenetPointData d = frame_at(seq, h, w);
    return std::pair<CMatrix, CMatrix>{d.gamma(), block_diagonal(d.dbetas)};
  };
  return f;
}

std::pair<CMatrix, CMatrix> frenet_c_pair(const FrenetPointData& data) {
  const BlockStructure& p = data.partition;
  CMatrix cm = CMatrix::Zero(p.dim(), p.dim());
  CMatrix cp = CMatrix::Zero(p.dim(), p.dim());
  for (int a = 0; a < data.t(); ++a) {
    cm.block(p.offset(a + 1), p.offset(a), p.size(a + 1), p.size(a)) = data.b_sub[a];
    cp.block(p.offset(a), p.offset(a + 1), p.size(a), p.size(a + 1)) = data.d_super[a];
  }
  return {cm, cp};
}

double zero_curvature_check(const TodaProblem& problem, const GammaField& field, Complex z,
                            double fd_step) {
  if (!(fd_step > 0.0)) throw InvalidArgument("fd_step must be positive");
  auto w_minus = [&](Complex w) -> CMatrix {
    return log_derivative(field, w, fd_step) + problem.c_minus(w);
  };
  auto w_plus = [&](Complex w) -> CMatrix {
    const CMatrix g = field.gamma(w);
    return g.partialPivLu().solve(problem.c_plus(w) * g);
  };
  const CMatrix g = field.gamma(z);
  require_finite(g, "gamma");
  check_cond(g, problem.blocks());

  const CMatrix t1 = wirtinger::d_plus(w_minus, z, fd_step);
  const CMatrix t2 = wirtinger::d_minus(w_plus, z, fd_step);
  const CMatrix wm = w_minus(z);
  const CMatrix wp = w_plus(z);
  const CMatrix comm = wm * wp - wp * wm;
  const double scale = std::max({1.0, t1.norm(), t2.norm(), comm.norm()});
  return (t1 - t2 - comm).norm() / scale;
}

MuPair integrate_mu(const TodaProblem& problem, const TodaSeed& seed, Complex basepoint, Complex z,
                    int steps) {
  return integrate_mu_path(problem, seed, {basepoint, z}, steps);
}

MuPair integrate_mu_path(const TodaProblem& problem, const TodaSeed& seed,
                         const std::vector<Complex>& vertices, int steps) {
  if (steps < 1) throw InvalidArgument("integration needs at least one step");
  if (vertices.empty()) throw InvalidArgument("path needs a basepoint");
  require_seed(problem, seed);
  const SeedEval ev(problem, seed);
  const int n = problem.dim();
  MuPair mu{CMatrix::Identity(n, n), CMatrix::Identity(n, n)};
  for (size_t i = 1; i < vertices.size(); ++i) {
    mu = integrate_segment(problem, ev, std::move(mu), vertices[i - 1], vertices[i], steps);
  }
  return finish(problem, std::move(mu));
}

TodaPoint solve_at(const TodaProblem& problem, const TodaSeed& seed, const CMatrix& g0, Complex z,
                   const SolveOptions& opts) {
  const int n = problem.dim();
  if (g0.rows() != n || g0.cols() != n) throw DimensionMismatch("g0 must be n x n");
  if (problem.hermitian_mode()) {
    const CMatrix& h = problem.h().matrix();
    if ((g0.adjoint() * g0 - h).norm() > 1e-10 * std::max(1.0, h.norm())) {
      throw InvalidArgument("hermitian mode requires g0^dagger g0 = h");
    }
  }
  const BlockStructure& p = problem.blocks();
  const SeedEval ev(problem, seed);

  TodaPoint out;
  out.z = z;
  const MuPair mu = integrate_mu(problem, seed, opts.basepoint, z, opts.steps);
  out.mu_minus = mu.minus;
  out.mu_plus = mu.plus;

  const auto mu_plus_lu = mu.plus.partialPivLu();
  const CMatrix m = mu_plus_lu.solve(mu.minus);
  const GaussFactors f = gauss_decompose(m, p);

  const CMatrix gm = ev.gamma_minus(z);
  const CMatrix gp_inv = SeedEval::invert(ev.gamma_plus(z), "gamma_plus");
  out.gamma = gp_inv * f.eta * gm;

  // mu_plus is antiholomorphic, so d_minus M = M A_minus; the diagonal blocks
  // of nu_minus^{-1} (d_minus M) nu_plus give d_minus eta.
  const CMatrix dm = m * ev.a_minus(z);
  const CMatrix deta =
      block_diagonal_part(f.n_minus.triangularView<Eigen::Lower>().solve(dm) * f.n_plus, p);
  out.d_minus_gamma = gp_inv * (deta * gm + f.eta * ev.d_gamma_minus(z));

  out.phi = g0.partialPivLu().solve(mu.minus * f.n_plus * gm);
  require_finite(out.gamma, "gamma");
  require_finite(out.phi, "phi");
  return out;
}

size_t TodaSolution::failed() const {
  return static_cast<size_t>(std::count_if(status.begin(), status.end(),
                                           [](const std::string& s) { return s != "ok"; }));
}

TodaSolution solve(const TodaProblem& problem, const TodaSeed& seed,
                   const std::vector<Complex>& grid, const CMatrix& g0, const SolveOptions& opts,
                   int threads) {
  require_seed(problem, seed);
  TodaSolution sol;
  sol.grid = grid;
  sol.points.resize(grid.size());
  sol.status.assign(grid.size(), "ok");
  sol.message.assign(grid.size(), "");
  parallel_for(grid.size(), threads, [&](size_t i) {
    try {
      sol.points[i] = solve_at(problem, seed, g0, grid[i], opts);
    } catch (const Error& e) {
      sol.status[i] = e.tag();
      sol.message[i] = e.what();
    }
  });
  return sol;
}

GammaField solution_gamma_field(const TodaProblem& problem, const TodaSeed& seed, const CMatrix& g0,
                                const SolveOptions& opts) {
  GammaField f;
  f.gamma = [&problem, &seed, g0, opts](Complex w) {
    return solve_at(problem, seed, g0, w, opts).gamma;
  };
  f.with_d_minus = [&problem, &seed, g0, opts](Complex w) {
    TodaPoint pt = solve_at(problem, seed, g0, w, opts);
    return std::pair<CMatrix, CMatrix>{std::move(pt.gamma), std::move(pt.d_minus_gamma)};
  };
  return f;
}

double check_phi_relation(const TodaSolution& solution, const TodaProblem& problem) {
  double worst = 0.0;
  for (const auto& pt : solution.points) {
    if (!pt) continue;
    const CMatrix d = pt->phi.adjoint() * problem.h().matrix() * pt->phi - pt->gamma;
    worst = std::max(worst, d.norm() / std::max(pt->gamma.norm(), 1e-300));
  }
  return worst;
}

double hermiticity_defect(const CMatrix& gamma) {
  return (gamma - gamma.adjoint()).norm() / std::max(gamma.norm(), 1e-300);
}

bool blocks_positive_definite(const CMatrix& gamma, const BlockStructure& blocks) {
  for (int a = 0; a < blocks.count(); ++a) {
    const CMatrix b = block(gamma, blocks, a, a);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (b + b.adjoint()));
    if (es.eigenvalues().minCoeff() <= 0.0) return false;
  }
  return true;
}

}  // namespace ftoda
