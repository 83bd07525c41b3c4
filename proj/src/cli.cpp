#include "ftoda/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "ftoda/errors.hpp"
#include "ftoda/frenet.hpp"
#include "ftoda/grid.hpp"
#include "ftoda/parallel.hpp"
#include "ftoda/toda.hpp"

namespace ftoda::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path, what);
}

std::string at(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string at(const std::string& path, size_t i) { return path + "[" + std::to_string(i) + "]"; }

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(at(path, key), "unknown field");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) fail(path, "must be positive");
  return v;
}

int integer(const json& j, const std::string& path, int min) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const long long v = j.get<long long>();
  if (v < min || v > 1000000000) fail(path, "must be at least " + std::to_string(min));
  return static_cast<int>(v);
}

Complex complex_value(const json& j, const std::string& path) {
  if (j.is_number()) return {number(j, path), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], at(path, 0)), number(j[1], at(path, 1))};
  fail(path, "expected a number or an [re, im] pair");
}

CMatrix complex_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(at(path, 0), "expected a non-empty row");
  CMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) fail(at(path, i), "rows must have equal length");
    for (size_t k = 0; k < cols; ++k) m(i, k) = complex_value(j[i][k], at(at(path, i), k));
  }
  return m;
}

long whole(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

// Coefficient: number, [re, im] (floats, rationalised) or
// [re_num, re_den, im_num, im_den] (exact).
GaussianRational coefficient(const json& j, const std::string& path, long bound) {
  auto approx = [&](const json& x, const std::string& p) {
    if (x.is_number_integer()) return mpq_class(x.get<long>());
    return rationalize(number(x, p), bound);
  };
  if (j.is_number()) return GaussianRational(approx(j, path));
  if (j.is_array() && j.size() == 2) {
    return GaussianRational(approx(j[0], at(path, 0)), approx(j[1], at(path, 1)));
  }
  if (j.is_array() && j.size() == 4) {
    const long rd = whole(j[1], at(path, 1));
    const long id = whole(j[3], at(path, 3));
    if (rd == 0) fail(at(path, 1), "zero denominator");
    if (id == 0) fail(at(path, 3), "zero denominator");
    return GaussianRational::from_parts(whole(j[0], at(path, 0)), rd, whole(j[2], at(path, 2)), id);
  }
  fail(path, "expected a number, [re, im] or [re_num, re_den, im_num, im_den]");
}

Poly polynomial(const json& j, const std::string& path, long bound) {
  if (j.is_number()) return Poly(coefficient(j, path, bound));
  if (!j.is_array()) fail(path, "expected a list of coefficients in ascending degree");
  std::vector<GaussianRational> cs;
  for (size_t k = 0; k < j.size(); ++k) cs.push_back(coefficient(j[k], at(path, k), bound));
  return Poly(std::move(cs));
}

PolyMatrix poly_matrix(const json& j, const std::string& path, long bound) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(at(path, 0), "expected a non-empty row");
  PolyMatrix m(static_cast<int>(j.size()), static_cast<int>(cols));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) fail(at(path, i), "rows must have equal length");
    for (size_t k = 0; k < cols; ++k) {
      m(static_cast<int>(i), static_cast<int>(k)) = polynomial(j[i][k], at(at(path, i), k), bound);
    }
  }
  return m;
}

std::vector<int> int_list(const json& j, const std::string& path, int min) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty list of integers");
  std::vector<int> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], at(path, i), min));
  return out;
}

PolyMatrix block_diagonal_poly(const std::vector<PolyMatrix>& blocks) {
  int n = 0;
  for (const auto& b : blocks) n += b.rows();
  PolyMatrix out(n, n);
  int off = 0;
  for (const auto& b : blocks) {
    out.set_block(off, off, b);
    off += b.rows();
  }
  return out;
}

void require_square(const CMatrix& m, Eigen::Index n, const std::string& path) {
  if (m.rows() != n || m.cols() != n) {
    fail(path, "expected a " + std::to_string(n) + " x " + std::to_string(n) + " matrix");
  }
}

void require_square(const PolyMatrix& m, int n, const std::string& path) {
  if (m.rows() != n || m.cols() != n) {
    fail(path, "expected a " + std::to_string(n) + " x " + std::to_string(n) + " matrix");
  }
}

// ---------------------------------------------------------------------------
// Report helpers

std::string timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json complex_json(Complex z) { return json::array({number_json(z.real()), number_json(z.imag())}); }

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

bool counts_as_failure(const std::string& status) {
  return status != "ok" && status != "NearRankDrop";
}

void mark_error(PointRecord& rec, const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  rec.status = err ? err->tag() : "InternalError";
  rec.message = e.what();
  rec.residuals.clear();
  rec.g.clear();
  rec.ln_det_beta.clear();
}

void finalize(Report& r, double tol) {
  Summary& s = r.summary;
  bool within = true;
  for (const auto& rec : r.points) {
    if (rec.status == "NearRankDrop") ++s.skipped_points;
    if (counts_as_failure(rec.status)) ++s.failed_points;
    for (const auto& [name, v] : rec.residuals) {
      auto [it, inserted] = s.max_residuals.emplace(name, v);
      if (!inserted && !(it->second >= v)) it->second = v;
      if (!(v <= tol)) within = false;
    }
  }
  s.passed = within && s.failed_points == 0;
}

double ln_abs_det(const CMatrix& m) { return std::log(std::abs(m.partialPivLu().determinant())); }

CMatrix metric_or_identity(const JobConfig& c, int n) {
  return c.metric_h ? *c.metric_h : CMatrix::Identity(n, n);
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// ---------------------------------------------------------------------------
// Modes

Report run_frenet(const JobConfig& c, int threads, bool verify) {
  Report r;
  r.mode = c.mode;
  r.residual_names = verify ? std::vector<std::string>{"b_solve", "frame_minus", "frame_plus", "kahler", "toda"}
                            : std::vector<std::string>{"b_solve"};
  const PolyMatrix& xi = *c.curve;
  const HermitianMetric h(metric_or_identity(c, xi.rows()));
  const OsculatingSequence seq = build_osculating(xi);
  const int t = seq.t();
  const int total = seq.total_rank();
  r.summary.partition = seq.partition.sizes();
  r.summary.linear_full = linear_fullness(seq, seq.n);
  r.summary.warnings = seq.warnings;
  if (!seq.input_rank_drop.is_constant()) {
    r.data["input_rank_drop"] = seq.input_rank_drop.str();
  }

  std::optional<TodaProblem> problem;
  std::optional<GammaField> field;
  if (verify) {
    problem.emplace(frenet_problem(seq, h));
    field.emplace(frenet_gamma_field(seq, h));
  }

  const auto grid = square_grid(c.grid.center, c.grid.radius, c.grid.nx, c.grid.ny);
  r.points.resize(grid.size());
  parallel_for(grid.size(), threads, [&](size_t i) {
    PointRecord& rec = r.points[i];
    rec.index = static_cast<int>(i);
    rec.z = grid[i];
    if (near_rank_drop(seq, rec.z)) {
      rec.status = "NearRankDrop";
      rec.message = "within 1e-3 of a point where the input lift drops rank";
      return;
    }
    try {
      const FrenetPointData d = frame_at(seq, h, rec.z);
      if (numerical_rank(d.phi, c.tol.rank_tol) != total) {
        throw SingularFrame("frame has numerical rank below " + std::to_string(total));
      }
      rec.residuals["b_solve"] = d.b_solve_residual;
      for (int a = 0; a < t; ++a) rec.g.push_back(induced_metric(d, a));
      for (const auto& beta : d.betas) rec.ln_det_beta.push_back(ln_abs_det(beta));
      if (verify) {
        const FrameResidual fr = verify_frame_equations(seq, h, rec.z, c.tol.fd_step);
        rec.residuals["frame_minus"] = max_of(fr.minus);
        rec.residuals["frame_plus"] = max_of(fr.plus);
        rec.residuals["kahler"] = max_of(kahler_check(seq, h, rec.z, c.tol.fd_step));
        rec.residuals["toda"] = max_of(toda_residual(*problem, *field, rec.z, c.tol.fd_step));
      }
    } catch (const std::exception& e) {
      mark_error(rec, e);
    }
  });
  finalize(r, c.tol.residual_tol);
  return r;
}

Report run_toda(const JobConfig& c, int threads, bool verify) {
  Report r;
  r.mode = c.mode;
  const bool herm = c.seeds.hermitian;
  if (herm) r.residual_names = {"hermiticity", "phi_relation"};
  if (verify) {
    r.residual_names.push_back("toda");
    r.residual_names.push_back("zero_curvature");
  }
  std::sort(r.residual_names.begin(), r.residual_names.end());

  const GradationSpec& spec = *c.gradation;
  const int n = spec.dim();
  const CMatrix hm = metric_or_identity(c, n);
  std::optional<TodaProblem> problem;
  try {
    problem.emplace(spec, c.seeds.l, *c.seeds.c_minus, c.seeds.c_plus_bar, HermitianMetric(hm), herm);
  } catch (const Error& e) {
    fail("seeds", e.what());
  }
  const TodaSeed seed{*c.seeds.gamma_minus, c.seeds.gamma_plus_bar};
  const CMatrix g0 = c.seeds.g0 ? *c.seeds.g0 : HermitianMetric(hm).factor();
  const SolveOptions opts{c.integration.basepoint, c.integration.steps};

  r.summary.partition = spec.blocks().sizes();
  r.data["hermitian_mode"] = herm;
  r.data["l"] = c.seeds.l;

  const auto grid = square_grid(c.grid.center, c.grid.radius, c.grid.nx, c.grid.ny);
  const TodaSolution sol = solve(*problem, seed, grid, g0, opts, threads);
  const GammaField field = solution_gamma_field(*problem, seed, g0, opts);
  std::vector<char> definite(grid.size(), 1);

  r.points.resize(grid.size());
  parallel_for(grid.size(), threads, [&](size_t i) {
    PointRecord& rec = r.points[i];
    rec.index = static_cast<int>(i);
    rec.z = grid[i];
    if (!sol.points[i]) {
      rec.status = sol.status[i];
      rec.message = sol.message[i];
      return;
    }
    try {
      const TodaPoint& pt = *sol.points[i];
      const BlockStructure& p = problem->blocks();
      for (int a = 0; a < p.count(); ++a) rec.ln_det_beta.push_back(ln_abs_det(block(pt.gamma, p, a, a)));
      if (herm) {
        rec.residuals["hermiticity"] = hermiticity_defect(pt.gamma);
        const CMatrix d = pt.phi.adjoint() * hm * pt.phi - pt.gamma;
        rec.residuals["phi_relation"] = d.norm() / std::max(pt.gamma.norm(), 1e-300);
        definite[i] = blocks_positive_definite(pt.gamma, p);
      }
      if (verify) {
        rec.residuals["toda"] = max_of(toda_residual(*problem, field, rec.z, c.tol.fd_step));
        rec.residuals["zero_curvature"] = zero_curvature_check(*problem, field, rec.z, c.tol.fd_step);
      }
    } catch (const std::exception& e) {
      mark_error(rec, e);
    }
  });
  const auto indefinite = std::count(definite.begin(), definite.end(), 0);
  if (indefinite > 0) {
    r.summary.warnings.push_back("beta blocks are not positive definite at " +
                                 std::to_string(indefinite) + " points");
  }
  finalize(r, c.tol.residual_tol);
  return r;
}

Report run_gauss(const JobConfig& c) {
  Report r;
  r.mode = c.mode;
  r.residual_names = {"round_trip"};
  const GaussConfig& gc = *c.gauss;
  const BlockStructure p(gc.blocks);
  r.summary.partition = gc.blocks;

  std::vector<CMatrix> inputs;
  if (gc.matrix) {
    inputs.push_back(*gc.matrix);
  } else {
    std::mt19937_64 rng(gc.seed);
    std::normal_distribution<double> nd;
    for (int s = 0; s < gc.samples; ++s) {
      CMatrix m(p.dim(), p.dim());
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = Complex(nd(rng), nd(rng));
      m += CMatrix::Identity(p.dim(), p.dim()) * (2.0 * p.dim());
      inputs.push_back(std::move(m));
    }
  }

  json samples = json::array();
  for (size_t i = 0; i < inputs.size(); ++i) {
    PointRecord rec;
    rec.index = static_cast<int>(i);
    json out;
    try {
      const GaussFactors f = gauss_decompose(inputs[i], p);
      const CMatrix back = f.n_minus * f.eta * f.n_plus.inverse();
      rec.residuals["round_trip"] = (back - inputs[i]).norm() / std::max(inputs[i].norm(), 1e-300);
      if (gc.matrix) {
        out["n_minus"] = matrix_json(f.n_minus);
        out["eta"] = matrix_json(f.eta);
        out["n_plus"] = matrix_json(f.n_plus);
      }
    } catch (const GaussDecompositionFailed& e) {
      mark_error(rec, e);
      out["failed_block"] = e.block();
    }
    if (!out.is_null()) {
      out["index"] = rec.index;
      samples.push_back(std::move(out));
    }
    r.points.push_back(std::move(rec));
  }
  r.data["samples"] = std::move(samples);
  finalize(r, c.tol.residual_tol);
  return r;
}

Report run_grading(const JobConfig& c) {
  Report r;
  r.mode = c.mode;
  r.residual_names = {"eigen_check"};
  const GradationSpec& spec = *c.gradation;
  const BlockStructure& p = spec.blocks();
  r.summary.partition = p.sizes();
  const GradingOperator op = build_grading(spec);

  json rho = json::array();
  mpq_class trace = 0;
  for (int a = 0; a < p.count(); ++a) {
    rho.push_back(op.rho[a].get_str());
    trace += op.rho[a] * p.size(a);
  }
  const auto diag = grading_diagonal_from_cartan(spec);
  bool cartan_agrees = true;
  for (int i = 0; i < spec.dim(); ++i) cartan_agrees = cartan_agrees && diag[i] == op.rho[p.block_of(i)];

  json degrees = json::array();
  double worst = 0.0;
  bool eigen_ok = true;
  for (int a = 0; a < p.count(); ++a) {
    json row = json::array();
    for (int b = 0; b < p.count(); ++b) {
      const int m = degree_of_block(spec, a, b);
      row.push_back(m);
      for (int i = 0; i < p.size(a); ++i)
        for (int k = 0; k < p.size(b); ++k) {
          CMatrix x = CMatrix::Zero(spec.dim(), spec.dim());
          x(p.offset(a) + i, p.offset(b) + k) = 1.0;
          worst = std::max(worst, (op.q * x - x * op.q - double(m) * x).norm());
          eigen_ok = eigen_ok && eigen_check(op, x, m);
        }
    }
    degrees.push_back(std::move(row));
  }
  r.data["rho"] = std::move(rho);
  r.data["trace_q"] = trace.get_str();
  r.data["dynkin_labels"] = spec.dynkin_labels();
  r.data["block_degrees"] = std::move(degrees);
  r.data["cartan_agrees"] = cartan_agrees;
  r.summary.max_residuals["eigen_check"] = worst;
  r.summary.passed = eigen_ok && cartan_agrees && trace == 0;
  return r;
}

}  // namespace

JobConfig parse_config(const json& doc, const std::string& mode_override) {
  reject_unknown(doc, "", {"mode", "curve", "gradation", "metric_h", "grid", "tolerances",
                           "integration", "seeds", "gauss", "rational_den_bound"});
  JobConfig c;
  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) fail("mode", "expected a string");
    c.mode = doc["mode"].get<std::string>();
  }
  if (!mode_override.empty()) {
    if (!c.mode.empty() && c.mode != mode_override) {
      fail("mode", "config says '" + c.mode + "' but '" + mode_override + "' was requested");
    }
    c.mode = mode_override;
  }
  if (std::find(modes().begin(), modes().end(), c.mode) == modes().end()) {
    fail("mode", "unknown mode '" + c.mode + "'");
  }

  long bound = kDefaultDenominatorBound;
  if (doc.contains("rational_den_bound")) bound = integer(doc["rational_den_bound"], "rational_den_bound", 1);

  if (doc.contains("curve")) c.curve = poly_matrix(doc["curve"], "curve", bound);
  if (doc.contains("metric_h")) c.metric_h = complex_matrix(doc["metric_h"], "metric_h");

  if (doc.contains("gradation")) {
    const json& g = doc["gradation"];
    reject_unknown(g, "gradation", {"blocks", "labels"});
    if (!g.contains("blocks")) fail("gradation.blocks", "missing");
    const std::vector<int> sizes = int_list(g["blocks"], "gradation.blocks", 1);
    std::vector<int> labels(sizes.size() - 1, 2);
    if (g.contains("labels")) {
      labels = g["labels"].is_array() && g["labels"].empty() ? std::vector<int>{}
                                                             : int_list(g["labels"], "gradation.labels", 0);
    }
    if (labels.size() + 1 != sizes.size()) fail("gradation.labels", "need one label per block boundary");
    try {
      c.gradation.emplace(BlockStructure(sizes), labels);
    } catch (const Error& e) {
      fail("gradation", e.what());
    }
  }

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    reject_unknown(g, "grid", {"center", "radius", "nx", "ny"});
    if (g.contains("center")) c.grid.center = complex_value(g["center"], "grid.center");
    if (g.contains("radius")) c.grid.radius = positive(g["radius"], "grid.radius");
    if (g.contains("nx")) c.grid.nx = integer(g["nx"], "grid.nx", 1);
    if (g.contains("ny")) c.grid.ny = integer(g["ny"], "grid.ny", 1);
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    reject_unknown(t, "tolerances", {"rank_tol", "fd_step", "residual_tol"});
    if (t.contains("rank_tol")) c.tol.rank_tol = positive(t["rank_tol"], "tolerances.rank_tol");
    if (t.contains("fd_step")) c.tol.fd_step = positive(t["fd_step"], "tolerances.fd_step");
    if (t.contains("residual_tol")) c.tol.residual_tol = positive(t["residual_tol"], "tolerances.residual_tol");
  }
  if (doc.contains("integration")) {
    const json& t = doc["integration"];
    reject_unknown(t, "integration", {"basepoint", "steps"});
    if (t.contains("basepoint")) c.integration.basepoint = complex_value(t["basepoint"], "integration.basepoint");
    if (t.contains("steps")) c.integration.steps = integer(t["steps"], "integration.steps", 1);
  }
  if (doc.contains("seeds")) {
    const json& s = doc["seeds"];
    reject_unknown(s, "seeds", {"l", "hermitian", "c_minus", "c_plus_bar", "gamma_minus",
                                "gamma_minus_blocks", "gamma_plus_bar", "g0"});
    if (s.contains("l")) c.seeds.l = integer(s["l"], "seeds.l", 1);
    if (s.contains("hermitian")) {
      if (!s["hermitian"].is_boolean()) fail("seeds.hermitian", "expected true or false");
      c.seeds.hermitian = s["hermitian"].get<bool>();
    }
    if (s.contains("c_minus")) c.seeds.c_minus = poly_matrix(s["c_minus"], "seeds.c_minus", bound);
    if (s.contains("c_plus_bar")) c.seeds.c_plus_bar = poly_matrix(s["c_plus_bar"], "seeds.c_plus_bar", bound);
    if (s.contains("gamma_minus") && s.contains("gamma_minus_blocks")) {
      fail("seeds.gamma_minus_blocks", "give either gamma_minus or gamma_minus_blocks");
    }
    if (s.contains("gamma_minus")) c.seeds.gamma_minus = poly_matrix(s["gamma_minus"], "seeds.gamma_minus", bound);
    if (s.contains("gamma_minus_blocks")) {
      const json& b = s["gamma_minus_blocks"];
      if (!b.is_array() || b.empty()) fail("seeds.gamma_minus_blocks", "expected a list of square blocks");
      std::vector<PolyMatrix> blocks;
      for (size_t i = 0; i < b.size(); ++i) {
        const std::string path = at("seeds.gamma_minus_blocks", i);
        blocks.push_back(poly_matrix(b[i], path, bound));
        require_square(blocks.back(), blocks.back().rows(), path);
      }
      c.seeds.gamma_minus = block_diagonal_poly(blocks);
    }
    if (s.contains("gamma_plus_bar")) {
      c.seeds.gamma_plus_bar = poly_matrix(s["gamma_plus_bar"], "seeds.gamma_plus_bar", bound);
    }
    if (s.contains("g0")) c.seeds.g0 = complex_matrix(s["g0"], "seeds.g0");
  }
  if (doc.contains("gauss")) {
    const json& g = doc["gauss"];
    reject_unknown(g, "gauss", {"blocks", "matrix", "samples", "seed"});
    GaussConfig gc;
    if (!g.contains("blocks")) fail("gauss.blocks", "missing");
    gc.blocks = int_list(g["blocks"], "gauss.blocks", 1);
    if (gc.blocks.size() < 2) fail("gauss.blocks", "need at least two blocks");
    if (g.contains("matrix")) gc.matrix = complex_matrix(g["matrix"], "gauss.matrix");
    if (g.contains("samples")) gc.samples = integer(g["samples"], "gauss.samples", 1);
    if (g.contains("seed")) {
      if (!g["seed"].is_number_unsigned()) fail("gauss.seed", "expected a non-negative integer");
      gc.seed = g["seed"].get<std::uint64_t>();
    }
    c.gauss = std::move(gc);
  }

  // Mode requirements and cross-field consistency.
  const std::string& m = c.mode;
  if (m == "frenet" || m == "verify-frenet") {
    if (!c.curve) fail("curve", "required in mode " + m);
    if (c.metric_h) require_square(*c.metric_h, c.curve->rows(), "metric_h");
  }
  if (m == "toda-solve" || m == "verify-toda" || m == "grading") {
    if (!c.gradation) fail("gradation", "required in mode " + m);
  }
  if (m == "toda-solve" || m == "verify-toda") {
    const int n = c.gradation->dim();
    if (c.metric_h) require_square(*c.metric_h, n, "metric_h");
    if (!c.seeds.c_minus) fail("seeds.c_minus", "required in mode " + m);
    require_square(*c.seeds.c_minus, n, "seeds.c_minus");
    if (c.seeds.c_plus_bar) require_square(*c.seeds.c_plus_bar, n, "seeds.c_plus_bar");
    if (!c.seeds.gamma_minus) fail("seeds.gamma_minus", "required in mode " + m);
    require_square(*c.seeds.gamma_minus, n, "seeds.gamma_minus");
    if (c.seeds.gamma_plus_bar) require_square(*c.seeds.gamma_plus_bar, n, "seeds.gamma_plus_bar");
    if (c.seeds.g0) require_square(*c.seeds.g0, n, "seeds.g0");
  }
  if (m == "gauss") {
    if (!c.gauss) fail("gauss", "required in mode gauss");
    int n = 0;
    for (int k : c.gauss->blocks) n += k;
    if (c.gauss->matrix) require_square(*c.gauss->matrix, n, "gauss.matrix");
  }
  if (c.metric_h) {
    try {
      HermitianMetric check(*c.metric_h);
    } catch (const Error& e) {
      fail("metric_h", e.what());
    }
  }
  return c;
}

Report run(const JobConfig& config, int threads) {
  Report r;
  const std::string& m = config.mode;
  if (m == "frenet" || m == "verify-frenet") {
    r = run_frenet(config, threads, m == "verify-frenet");
  } else if (m == "toda-solve" || m == "verify-toda") {
    r = run_toda(config, threads, m == "verify-toda");
  } else if (m == "gauss") {
    r = run_gauss(config);
  } else if (m == "grading") {
    r = run_grading(config);
  } else {
    fail("mode", "unknown mode '" + m + "'");
  }
  r.timestamp = timestamp_now();
  return r;
}

json to_json(const Report& r) {
  json points = json::array();
  for (const auto& p : r.points) {
    json res = json::object();
    for (const auto& [k, v] : p.residuals) res[k] = number_json(v);
    json g = json::array(), ld = json::array();
    for (double v : p.g) g.push_back(number_json(v));
    for (double v : p.ln_det_beta) ld.push_back(number_json(v));
    points.push_back({{"index", p.index},
                      {"z", complex_json(p.z)},
                      {"status", p.status},
                      {"message", p.message},
                      {"residuals", std::move(res)},
                      {"g", std::move(g)},
                      {"ln_det_beta", std::move(ld)}});
  }
  json maxr = json::object();
  for (const auto& [k, v] : r.summary.max_residuals) maxr[k] = number_json(v);
  json summary = {{"max_residuals", std::move(maxr)},
                  {"failed_points", r.summary.failed_points},
                  {"skipped_points", r.summary.skipped_points},
                  {"partition", r.summary.partition},
                  {"linear_full", r.summary.linear_full ? json(*r.summary.linear_full) : json(nullptr)},
                  {"warnings", r.summary.warnings},
                  {"passed", r.summary.passed}};
  return {{"spec_version", r.spec_version},
          {"mode", r.mode},
          {"timestamp", r.timestamp},
          {"residual_names", r.residual_names},
          {"points", std::move(points)},
          {"summary", std::move(summary)},
          {"data", r.data}};
}

Report from_json(const json& doc) {
  Report r;
  r.spec_version = doc.at("spec_version").get<std::string>();
  r.mode = doc.at("mode").get<std::string>();
  r.timestamp = doc.at("timestamp").get<std::string>();
  r.residual_names = doc.at("residual_names").get<std::vector<std::string>>();
  for (const auto& p : doc.at("points")) {
    PointRecord rec;
    rec.index = p.at("index").get<int>();
    rec.z = {number_from(p.at("z").at(0)), number_from(p.at("z").at(1))};
    rec.status = p.at("status").get<std::string>();
    rec.message = p.at("message").get<std::string>();
    for (const auto& [k, v] : p.at("residuals").items()) rec.residuals[k] = number_from(v);
    for (const auto& v : p.at("g")) rec.g.push_back(number_from(v));
    for (const auto& v : p.at("ln_det_beta")) rec.ln_det_beta.push_back(number_from(v));
    r.points.push_back(std::move(rec));
  }
  const json& s = doc.at("summary");
  for (const auto& [k, v] : s.at("max_residuals").items()) r.summary.max_residuals[k] = number_from(v);
  r.summary.failed_points = s.at("failed_points").get<int>();
  r.summary.skipped_points = s.at("skipped_points").get<int>();
  r.summary.partition = s.at("partition").get<std::vector<int>>();
  if (!s.at("linear_full").is_null()) r.summary.linear_full = s.at("linear_full").get<bool>();
  r.summary.warnings = s.at("warnings").get<std::vector<std::string>>();
  r.summary.passed = s.at("passed").get<bool>();
  r.data = doc.at("data");
  return r;
}

std::string to_csv(const Report& r) {
  const int blocks = static_cast<int>(r.summary.partition.size());
  const bool frenet = r.mode == "frenet" || r.mode == "verify-frenet";
  const bool toda = r.mode == "toda-solve" || r.mode == "verify-toda";
  const int g_cols = frenet ? std::max(blocks - 1, 0) : 0;
  const int det_cols = frenet || toda ? blocks : 0;

  auto cell = [](double v) {
    if (!std::isfinite(v)) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "z_re,z_im";
  for (const auto& name : r.residual_names) out << ',' << name;
  for (int a = 0; a < g_cols; ++a) out << ",g_" << a;
  for (int a = 0; a < det_cols; ++a) out << ",ln_det_beta_" << a;
  out << ",status\n";
  for (const auto& p : r.points) {
    out << cell(p.z.real()) << ',' << cell(p.z.imag());
    for (const auto& name : r.residual_names) {
      const auto it = p.residuals.find(name);
      out << ',' << (it == p.residuals.end() ? std::string() : cell(it->second));
    }
    for (int a = 0; a < g_cols; ++a) out << ',' << (a < static_cast<int>(p.g.size()) ? cell(p.g[a]) : "");
    for (int a = 0; a < det_cols; ++a) {
      out << ',' << (a < static_cast<int>(p.ln_det_beta.size()) ? cell(p.ln_det_beta[a]) : "");
    }
    out << ',' << p.status << '\n';
  }
  return out.str();
}

int exit_code(const Report& report) { return report.summary.passed ? 0 : 1; }

int threads_from_env() {
  if (const char* v = std::getenv("FTODA_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && n >= 1) return static_cast<int>(std::min(n, 256L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace ftoda::cli
