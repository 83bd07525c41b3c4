#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ftoda/cli.hpp"
#include "ftoda/errors.hpp"

using namespace ftoda;
using nlohmann::json;

namespace {

const json kFubiniStudy = json::parse(R"({
  "mode": "frenet",
  "curve": [[[1]], [[0, 1]]],
  "grid": {"center": [0, 0], "radius": 0.5, "nx": 3, "ny": 3}
})");

const json kHermitianToda = json::parse(R"({
  "gradation": {"blocks": [1, 1]},
  "grid": {"radius": 0.4, "nx": 2, "ny": 2},
  "integration": {"steps": 200},
  "seeds": {"c_minus": [[0, 0], [1, 0]], "gamma_minus": [[1, 0], [0, 1]]}
})");

// A requested mode replaces the one stored in the document.
cli::Report run_json(json doc, const std::string& mode = "", int threads = 1) {
  if (!mode.empty()) doc.erase("mode");
  return cli::run(cli::parse_config(doc, mode), threads);
}

std::string config_error_path(const json& doc, const std::string& mode = "") {
  try {
    cli::parse_config(doc, mode);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

size_t count_lines(const std::string& s) {
  size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("frenet mode reproduces the Fubini-Study metric") {
  const cli::Report r = run_json(kFubiniStudy);
  CHECK(r.summary.partition == std::vector<int>{1, 1});
  REQUIRE(r.summary.linear_full.has_value());
  CHECK(*r.summary.linear_full);
  REQUIRE(r.points.size() == 9);
  for (const auto& p : r.points) {
    CHECK(p.status == "ok");
    CHECK(std::abs(p.z) <= 0.5 + 1e-15);
    REQUIRE(p.g.size() == 1);
    const double expect = 1.0 / std::pow(1.0 + std::norm(p.z), 2);
    CHECK(std::abs(p.g[0] - expect) < 1e-12 * expect);
    REQUIRE(p.ln_det_beta.size() == 2);
    CHECK(std::abs(p.ln_det_beta[0] - std::log1p(std::norm(p.z))) < 1e-12);
  }
  CHECK(r.summary.passed);
  CHECK(cli::exit_code(r) == 0);
  CHECK(r.spec_version == cli::kReportVersion);
}

TEST_CASE("grading mode for blocks (2,1) and label 2") {
  const cli::Report r = run_json(json::parse(R"({"gradation": {"blocks": [2, 1], "labels": [2]}})"), "grading");
  CHECK(r.data["rho"] == json::array({"2/3", "-4/3"}));
  CHECK(r.data["trace_q"] == "0");
  CHECK(r.data["cartan_agrees"] == true);
  CHECK(r.summary.passed);
  CHECK(r.points.empty());
}

TEST_CASE("gauss mode reports a failing leading block") {
  const cli::Report r =
      run_json(json::parse(R"({"gauss": {"blocks": [1, 1], "matrix": [[0, 1], [1, 0]]}})"), "gauss");
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].status == "GaussDecompositionFailed");
  CHECK(r.data["samples"][0]["failed_block"] == 0);
  CHECK(r.summary.failed_points == 1);
  CHECK(cli::exit_code(r) == 1);

  const cli::Report ok =
      run_json(json::parse(R"({"gauss": {"blocks": [1, 1], "matrix": [[2, 1], [1, 1]]}})"), "gauss");
  CHECK(ok.points[0].status == "ok");
  CHECK(ok.points[0].residuals.at("round_trip") < 1e-15);
  CHECK(ok.data["samples"][0]["eta"][1][1][0] == doctest::Approx(0.5));

  const cli::Report random =
      run_json(json::parse(R"({"gauss": {"blocks": [1, 2, 1], "samples": 25, "seed": 3}})"), "gauss");
  CHECK(random.points.size() == 25);
  CHECK(random.summary.passed);
}

TEST_CASE("csv layout") {
  cli::Report empty;
  empty.mode = "frenet";
  empty.residual_names = {"b_solve"};
  empty.summary.partition = {1, 1};
  const std::string header = cli::to_csv(empty);
  CHECK(header == "z_re,z_im,b_solve,g_0,ln_det_beta_0,ln_det_beta_1,status\n");

  json one = kFubiniStudy;
  one["grid"] = {{"nx", 1}, {"ny", 1}, {"radius", 1.0}};
  const std::string csv = cli::to_csv(run_json(one));
  CHECK(count_lines(csv) == 2);
  CHECK(csv.substr(0, header.size()) == header);
  CHECK(csv.find("0,0,0,1,0,0,ok\n") != std::string::npos);

  cli::Report verify = run_json(kFubiniStudy, "verify-frenet");
  const std::string vh = cli::to_csv(verify).substr(0, cli::to_csv(verify).find('\n'));
  CHECK(vh == "z_re,z_im,b_solve,frame_minus,frame_plus,kahler,toda,g_0,ln_det_beta_0,ln_det_beta_1,status");
}

TEST_CASE("json round trip") {
  for (const auto& r : {run_json(kFubiniStudy), run_json(kFubiniStudy, "verify-frenet"),
                        run_json(kHermitianToda, "verify-toda"),
                        run_json(json::parse(R"({"gauss": {"blocks": [1, 1], "matrix": [[0, 1], [1, 0]]}})"),
                                 "gauss"),
                        run_json(json::parse(R"({"gradation": {"blocks": [1, 2, 1]}})"), "grading")}) {
    CHECK(cli::from_json(cli::to_json(r)) == r);
    CHECK(cli::from_json(json::parse(cli::to_json(r).dump())) == r);
  }
}

TEST_CASE("reports are deterministic and independent of the thread count") {
  cli::Report a = run_json(kHermitianToda, "toda-solve", 1);
  cli::Report b = run_json(kHermitianToda, "toda-solve", 4);
  cli::Report c = run_json(kHermitianToda, "toda-solve", 1);
  a.timestamp = b.timestamp = c.timestamp = "";
  CHECK(cli::to_json(a).dump() == cli::to_json(b).dump());
  CHECK(cli::to_json(a).dump() == cli::to_json(c).dump());
  CHECK(cli::to_csv(a) == cli::to_csv(b));
}

TEST_CASE("toda modes check hermiticity, the phi relation and the field equations") {
  const cli::Report r = run_json(kHermitianToda, "verify-toda");
  CHECK(r.residual_names == std::vector<std::string>{"hermiticity", "phi_relation", "toda", "zero_curvature"});
  REQUIRE(r.points.size() == 4);
  for (const auto& p : r.points) {
    CHECK(p.status == "ok");
    CHECK(p.residuals.at("hermiticity") < 1e-12);
    CHECK(p.residuals.at("phi_relation") < 1e-12);
    CHECK(p.residuals.at("toda") < 1e-5);
  }
  CHECK(r.summary.passed);
}

TEST_CASE("exit status follows the residual tolerance") {
  json strict = kFubiniStudy;
  strict["tolerances"] = {{"residual_tol", 1e-300}};
  const cli::Report r = run_json(strict, "verify-frenet");
  CHECK(r.summary.failed_points == 0);
  CHECK_FALSE(r.summary.passed);
  CHECK(cli::exit_code(r) == 1);
}

TEST_CASE("points near a rank drop of the input lift are skipped") {
  // (z, z^2) vanishes at 0, the centre of a 1 x 1 grid.
  const json doc = json::parse(R"({"curve": [[[0, 1]], [[0, 0, 1]]], "grid": {"nx": 1, "ny": 1}})");
  const cli::Report r = run_json(doc, "frenet");
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].status == "NearRankDrop");
  CHECK(r.summary.skipped_points == 1);
  CHECK(r.summary.failed_points == 0);
  CHECK_FALSE(r.summary.warnings.empty());
}

TEST_CASE("coefficient formats") {
  // Exact [re_num, re_den, im_num, im_den] and a float pair rationalised.
  const json doc = json::parse(R"({"curve": [[[1]], [[[0, 1, 0, 1], [1, 2, 1, 3]]], [[[0.25, -1.5]]]]})");
  const cli::JobConfig c = cli::parse_config(doc, "frenet");
  REQUIRE(c.curve);
  CHECK((*c.curve)(1, 0).coeff(1) == GaussianRational::from_parts(1, 2, 1, 3));
  CHECK((*c.curve)(2, 0).coeff(0) == GaussianRational(mpq_class(1, 4), mpq_class(-3, 2)));
}

TEST_CASE("configuration errors name the field") {
  CHECK(config_error_path(json::parse(R"({"mode": "bogus"})")) == "mode");
  CHECK(config_error_path(json::parse(R"({"mode": "frenet"})")) == "curve");
  CHECK(config_error_path(kFubiniStudy, "grading") == "mode");
  CHECK(config_error_path(json::parse(R"({"curve": [[[1]]], "colour": 1})"), "frenet") == "colour");
  CHECK(config_error_path(json::parse(R"({"curve": [[[1]], [[0, "x"]]]})"), "frenet") == "curve[1][0][1]");
  CHECK(config_error_path(json::parse(R"({"curve": [[[1]], [[[1, 0, 0, 1]]]]})"), "frenet") ==
        "curve[1][0][0][1]");
  CHECK(config_error_path(json::parse(R"({"curve": [[[1]]], "grid": {"radius": -1}})"), "frenet") ==
        "grid.radius");
  CHECK(config_error_path(json::parse(R"({"curve": [[[1]]], "tolerances": {"fd_step": 0}})"), "frenet") ==
        "tolerances.fd_step");
  CHECK(config_error_path(json::parse(R"({"curve": [[[1]], [[1]]], "metric_h": [[1, 2], [2, 1]]})"),
                          "frenet") == "metric_h");
  CHECK(config_error_path(json::parse(R"({"curve": [[[1]], [[1]]], "metric_h": [[1]]})"), "frenet") ==
        "metric_h");
  CHECK(config_error_path(json::parse(R"({"gradation": {"blocks": [1, 1], "labels": [2, 2]}})"), "grading") ==
        "gradation.labels");
  CHECK(config_error_path(json::parse(R"({"gradation": {"blocks": [1, 1]}, "seeds": {}})"), "toda-solve") ==
        "seeds.c_minus");
  CHECK(config_error_path(json::parse(R"({"gauss": {"blocks": [1, 1], "matrix": [[1]]}})"), "gauss") ==
        "gauss.matrix");

  // A c_minus of the wrong degree is rejected by the problem itself.
  json wrong = kHermitianToda;
  wrong["seeds"]["c_minus"] = json::parse("[[1, 0], [0, 0]]");
  CHECK_THROWS_AS(run_json(wrong, "toda-solve"), ConfigError);
}
